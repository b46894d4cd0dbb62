#pragma once

#include <memory>
#include <vector>

#include "tensoropt/oracle.hpp"

namespace tensoropt {

// ---------------------------------------------------------------------------
// Hard function family: f_m(x) = eta_{p+1}(A_m x) - x_1, where
// eta_{p+1}(u) = 1/(p+1) sum |u_i|^{p+1} and A_m = blockdiag(U_m, I_{n-m})
// with U_m upper bidiagonal (1 on the diagonal, -1 above it). A_m is applied
// as an O(n) operator and never materialized.
// ---------------------------------------------------------------------------

class HardFamilyProblem : public Problem {
 public:
  /// m = 1 degenerates to A = I (separable power term minus x_1).
  HardFamilyProblem(int n, int m, int p);

  int dimension() const override { return n_; }
  int max_order() const override { return p_ >= 2 ? 3 : 2; }
  DerivativeBundle eval_impl(const Vector& x, int order) const override;
  double lipschitz_bound(int p) const override;
  std::string fingerprint_json() const override;
  std::string name() const override { return "hard_family"; }

  int block_size() const { return m_; }
  int power() const { return p_; }

  Vector apply_a(const Vector& x) const;    // u = A_m x
  Vector apply_a_t(const Vector& v) const;  // A_m^T v

  /// Spectral norm of A_m by power iteration (deterministic start).
  double operator_norm() const;

 private:
  int n_, m_, p_;
  double op_norm_;  // cached at construction
};

/// M_p bound for the hard family: p! * |A_m|_2^{p+1}. m = 1 gives p! exactly.
double hard_family_lipschitz(int p, int m, int n);

// ---------------------------------------------------------------------------
// Non-regularized logistic regression:
//   f(x) = (1/d) sum_i ln(1 + exp(-y_i <w_i, x>)),  y_i in {-1,+1}.
// ---------------------------------------------------------------------------

class LogisticProblem : public Problem {
 public:
  /// features: d x n matrix (row per sample); labels: +-1 per sample.
  LogisticProblem(Matrix features, std::vector<int> labels,
                  std::string source_tag = "inline");

  int dimension() const override { return int(features_.cols()); }
  int max_order() const override { return 3; }
  DerivativeBundle eval_impl(const Vector& x, int order) const override;
  double lipschitz_bound(int p) const override;
  bool minimum_attained() const override { return false; }
  std::string fingerprint_json() const override;
  std::string name() const override { return "logistic"; }

  int sample_count() const { return int(features_.rows()); }
  const Matrix& features() const { return features_; }
  const std::vector<int>& labels() const { return labels_; }

 private:
  Matrix features_;
  std::vector<int> labels_;
  std::string source_tag_;  // folded into the fingerprint
};

/// Synthetic dataset: ground-truth x_hat and all feature entries uniform on
/// [-1,1] from SplitMix64(seed); labels y_i = sign(<w_i, x_hat>), zero
/// resolved to +1. Generation order: x_hat first, then features row by row.
std::unique_ptr<LogisticProblem> synth_logreg(int n, int d,
                                              std::uint64_t seed);

struct Dataset {
  std::string name;
  std::string path;
  int d = 0;  // sample count
  int n = 0;  // feature count
  std::string sha256;
  std::string label_mapping;
};

/// Parses the standard sparse text format ("label idx:val ...", 1-based
/// ascending indices). Label domains {-1,+1}, {0,1} (0 -> -1) and {1,2}
/// (2 -> -1) are accepted. Throws ParseError with a line number, or
/// LabelDomainError when more than two classes appear.
std::unique_ptr<LogisticProblem> load_libsvm(const std::string& path,
                                             Dataset* info = nullptr,
                                             int n_override = 0);

/// Writes a dense problem in libsvm text format (used by the `gen` command).
void write_libsvm(const LogisticProblem& problem, const std::string& path);

/// {name, path, sha256, d, n, label_mapping} manifest JSON string.
std::string dataset_manifest_json(const Dataset& info);

// ---------------------------------------------------------------------------
// Reference objectives for tests and restarts
// ---------------------------------------------------------------------------

/// f(x) = 1/2 sum d_i x_i^2. Strongly convex with sigma = min d_i.
class QuadraticProblem : public Problem {
 public:
  explicit QuadraticProblem(Vector diag);
  explicit QuadraticProblem(int n) : QuadraticProblem(Vector::Ones(n)) {}

  int dimension() const override { return int(diag_.size()); }
  int max_order() const override { return 3; }
  DerivativeBundle eval_impl(const Vector& x, int order) const override;
  // M_1 = max d_i; higher derivatives are constant, so any positive number
  // is a valid bound and 1.0 is returned by convention.
  double lipschitz_bound(int p) const override;
  std::optional<Vector> known_minimizer() const override {
    return Vector::Zero(diag_.size());
  }
  std::optional<double> known_optimum() const override { return 0.0; }
  std::optional<UniformConvexity> uniform_convexity() const override {
    return UniformConvexity{2, diag_.minCoeff()};
  }
  std::string fingerprint_json() const override;
  std::string name() const override { return "quadratic"; }

 private:
  Vector diag_;
};

/// Separable power objective f(x) = 1/r sum |x_i|^r, r >= 3. The r = 4 case
/// is the uniformly convex quartic used by the restart experiments.
class PowerProblem : public Problem {
 public:
  PowerProblem(int n, int degree);

  int dimension() const override { return n_; }
  int max_order() const override { return 3; }
  DerivativeBundle eval_impl(const Vector& x, int order) const override;
  double lipschitz_bound(int p) const override;  // finite only for p = r-1
  std::optional<Vector> known_minimizer() const override {
    return Vector::Zero(n_);
  }
  std::optional<double> known_optimum() const override { return 0.0; }
  std::string fingerprint_json() const override;
  std::string name() const override { return "power"; }

  int degree() const { return degree_; }

 private:
  int n_, degree_;
};

/// F_{L,z}(x) = f(x) + (L/2)|x - z|^2. Only value, gradient and Hessian
/// change; derivatives of order >= 3 are the base problem's.
class ProxShiftedProblem : public Problem {
 public:
  ProxShiftedProblem(const Problem& base, double L, Vector z);

  int dimension() const override { return base_.dimension(); }
  int max_order() const override { return base_.max_order(); }
  DerivativeBundle eval_impl(const Vector& x, int order) const override;
  double lipschitz_bound(int p) const override;
  std::string fingerprint_json() const override;
  std::string name() const override { return base_.name() + "+prox"; }

 private:
  const Problem& base_;
  double L_;
  Vector z_;
};

// Bounds on the logistic loss derivatives:
//   M_2 <= (1/(6 sqrt 3 d)) sum |w_i|^3   (sup |phi'''| = 1/(6 sqrt 3))
//   M_3 <= (1/(8 d)) sum |w_i|^4          (sup |phi''''| = 1/8)
double logreg_lipschitz(const LogisticProblem& problem, int p);

}  // namespace tensoropt
