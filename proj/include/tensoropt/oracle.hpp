#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <string>

#include "tensoropt/core.hpp"

namespace tensoropt {

/// Uniform convexity data: f(y) >= f(x) + <grad f(x), y-x> + (sigma/q)|y-x|^q.
struct UniformConvexity {
  int q = 2;
  double sigma = 0.0;
};

/// Derivatives of f at a point, up to `order` in {1,2,3}. Third derivatives
/// are exposed only through the directional map h -> D3 f(x)[h,h]; consumers
/// that need the matrix D3 f(x)[h,.] recover it by polarization.
struct DerivativeBundle {
  Vector center;
  double value = 0.0;
  Vector gradient;
  Matrix hessian;  // present when order >= 2
  std::function<Vector(const Vector&)> third_dir;  // present when order >= 3
  int order = 1;
};

/// A problem oracle. Immutable after construction; safe to evaluate from
/// several threads at once.
class Problem {
 public:
  virtual ~Problem() = default;

  virtual int dimension() const = 0;
  virtual int max_order() const = 0;

  /// Exact derivatives up to `order` at x. Implementations do not validate
  /// inputs; callers go through evaluate().
  virtual DerivativeBundle eval_impl(const Vector& x, int order) const = 0;

  /// Lipschitz bound M_p for the p-th derivative. Throws UnsupportedOrder if
  /// no finite bound exists for this p.
  virtual double lipschitz_bound(int p) const = 0;

  virtual std::optional<Vector> known_minimizer() const { return {}; }
  virtual std::optional<double> known_optimum() const { return {}; }
  virtual std::optional<UniformConvexity> uniform_convexity() const {
    return {};
  }

  /// True when the infimum is attained at some finite point. Non-regularized
  /// logistic regression on separable data returns false.
  virtual bool minimum_attained() const { return true; }

  /// Canonical JSON description; hashed into the reference-cache fingerprint.
  virtual std::string fingerprint_json() const = 0;

  virtual std::string name() const = 0;
};

/// Static problem description used for validation and reporting.
struct ProblemSpec {
  int dimension = 0;
  int max_order = 0;
  double lipschitz = 0.0;  // M_p for the requested p
  std::optional<Vector> x_star;
  std::optional<double> f_star;
  std::optional<UniformConvexity> uniform;
};

/// Assembles the static description for a problem at derivative order p and
/// validates its invariants (M_p > 0; if uniform convexity is declared,
/// 2 <= q <= p+1 and sigma > 0). Throws ConfigError on violation.
ProblemSpec make_spec(const Problem& problem, int p);

/// Checked oracle call: validates 1 <= order <= max_order, finite input,
/// finite outputs, Hessian symmetry. Throws UnsupportedOrder / NonFinite.
DerivativeBundle evaluate(const Problem& problem, const Vector& x, int order);

/// Value of the regularized Taylor model
///   Omega(y) = sum_{r<=p} (1/r!) D^r f(x)[y-x,...] + M/(p+1)! |y-x|^{p+1}
/// around bundle.center. Requires bundle.order >= p, p in {1,2,3}, M >= 0.
double taylor_model_value(const DerivativeBundle& bundle, const Vector& y,
                          int p, double M);

/// Gradient of the regularized Taylor model at y. At y = center this is
/// exactly bundle.gradient.
Vector taylor_model_gradient(const DerivativeBundle& bundle, const Vector& y,
                             int p, double M);

/// Central-difference validation report. Relative errors use a
/// max(1, |exact|) denominator.
struct FiniteDiffReport {
  double gradient_rel_err = 0.0;   // analytic gradient vs central differences
  double hessian_vec_rel_err = 0.0;  // H*v vs differenced gradients, order>=2
  double third_dir_rel_err = 0.0;  // D3f[h,h] vs differenced Hessians, order>=3
};

FiniteDiffReport finite_diff_report(const Problem& problem, const Vector& x,
                                    int order, double step,
                                    std::uint64_t seed = 12345,
                                    int directions = 5);

}  // namespace tensoropt
