#include "tensoropt/oracle.hpp"

#include <cmath>

namespace tensoropt {

ProblemSpec make_spec(const Problem& problem, int p) {
  ProblemSpec s;
  s.dimension = problem.dimension();
  s.max_order = problem.max_order();
  s.lipschitz = problem.lipschitz_bound(p);
  if (!(s.lipschitz > 0))
    throw ConfigError("M_p must be positive for " + problem.name());
  s.x_star = problem.known_minimizer();
  s.f_star = problem.known_optimum();
  s.uniform = problem.uniform_convexity();
  if (s.uniform) {
    if (s.uniform->q < 2 || s.uniform->q > p + 1)
      throw ConfigError("uniform convexity degree q must satisfy 2 <= q <= p+1");
    if (!(s.uniform->sigma > 0))
      throw ConfigError("uniform convexity modulus must be positive");
  }
  return s;
}

DerivativeBundle evaluate(const Problem& problem, const Vector& x, int order) {
  if (order < 1 || order > problem.max_order())
    throw UnsupportedOrder(problem.name() + ": derivative order " +
                           std::to_string(order) + " not supported (max " +
                           std::to_string(problem.max_order()) + ")");
  if (!x.allFinite()) throw NonFinite("evaluation point has non-finite entries");
  if (x.size() != problem.dimension())
    throw ConfigError("point dimension mismatch");

  DerivativeBundle b = problem.eval_impl(x, order);
  b.order = order;
  if (!std::isfinite(b.value) || !b.gradient.allFinite())
    throw NonFinite(problem.name() + ": non-finite value/gradient");
  if (order >= 2) {
    if (!b.hessian.allFinite()) throw NonFinite(problem.name() + ": non-finite Hessian");
    double asym = (b.hessian - b.hessian.transpose()).cwiseAbs().maxCoeff();
    double scale = std::max(1.0, b.hessian.cwiseAbs().maxCoeff());
    if (asym > 1e-12 * scale)
      throw NonFinite(problem.name() + ": Hessian asymmetry exceeds tolerance");
  }
  return b;
}

namespace {

void require_model_order(const DerivativeBundle& bundle, int p) {
  if (p < 1 || p > 3)
    throw UnsupportedOrder("Taylor model order p must be in {1,2,3}");
  if (bundle.order < p)
    throw UnsupportedOrder("bundle holds derivatives up to order " +
                           std::to_string(bundle.order) + ", model needs " +
                           std::to_string(p));
}

double factorial(int n) {
  double f = 1.0;
  for (int i = 2; i <= n; ++i) f *= i;
  return f;
}

}  // namespace

double taylor_model_value(const DerivativeBundle& bundle, const Vector& y,
                          int p, double M) {
  require_model_order(bundle, p);
  const Vector h = y - bundle.center;
  double v = bundle.value + bundle.gradient.dot(h);
  if (p >= 2) v += 0.5 * h.dot(bundle.hessian * h);
  if (p >= 3) v += bundle.third_dir(h).dot(h) / 6.0;
  const double r = h.norm();
  v += M / factorial(p + 1) * std::pow(r, p + 1);
  return v;
}

Vector taylor_model_gradient(const DerivativeBundle& bundle, const Vector& y,
                             int p, double M) {
  require_model_order(bundle, p);
  const Vector h = y - bundle.center;
  Vector g = bundle.gradient;
  if (p >= 2) g += bundle.hessian * h;
  if (p >= 3) g += 0.5 * bundle.third_dir(h);
  const double r = h.norm();
  if (r > 0) g += (M / factorial(p) * std::pow(r, p - 1)) * h;
  return g;
}

FiniteDiffReport finite_diff_report(const Problem& problem, const Vector& x,
                                    int order, double step, std::uint64_t seed,
                                    int directions) {
  if (!(step > 0)) throw ConfigError("finite-difference step must be positive");
  const int n = problem.dimension();
  FiniteDiffReport rep;

  auto rel = [](double err, double scale) {
    return err / std::max(1.0, scale);
  };

  const DerivativeBundle b = evaluate(problem, x, order);

  // Gradient vs central differences of f, coordinate by coordinate.
  {
    Vector fd(n);
    for (int i = 0; i < n; ++i) {
      Vector xp = x, xm = x;
      xp[i] += step;
      xm[i] -= step;
      fd[i] = (evaluate(problem, xp, 1).value - evaluate(problem, xm, 1).value) /
              (2 * step);
    }
    rep.gradient_rel_err = rel((fd - b.gradient).norm(), b.gradient.norm());
  }

  SplitMix64 rng(seed);
  if (order >= 2) {
    double worst = 0.0;
    for (int d = 0; d < directions; ++d) {
      Vector v = rng.vector_symmetric(n);
      v.normalize();
      Vector gp = evaluate(problem, x + step * v, 1).gradient;
      Vector gm = evaluate(problem, x - step * v, 1).gradient;
      Vector fd = (gp - gm) / (2 * step);
      Vector exact = b.hessian * v;
      worst = std::max(worst, rel((fd - exact).norm(), exact.norm()));
    }
    rep.hessian_vec_rel_err = worst;
  }
  if (order >= 3) {
    double worst = 0.0;
    for (int d = 0; d < directions; ++d) {
      Vector h = rng.vector_symmetric(n);
      h.normalize();
      Matrix hp = evaluate(problem, x + step * h, 2).hessian;
      Matrix hm = evaluate(problem, x - step * h, 2).hessian;
      Vector fd = ((hp - hm) / (2 * step)) * h;
      Vector exact = b.third_dir(h);
      worst = std::max(worst, rel((fd - exact).norm(), exact.norm()));
    }
    rep.third_dir_rel_err = worst;
  }
  return rep;
}

}  // namespace tensoropt
