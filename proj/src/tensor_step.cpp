#include "tensoropt/tensor_step.hpp"

#include <cmath>
#include <limits>
#include <cstdio>

#include <Eigen/Eigenvalues>

namespace tensoropt {

namespace {

double factorial(int n) {
  double f = 1.0;
  for (int i = 2; i <= n; ++i) f *= i;
  return f;
}

void validate(const DerivativeBundle& bundle, const TensorStepConfig& config) {
  if (!(config.M > 0)) throw ConfigError("tensor step requires M > 0");
  if (config.inner_tol < 0) throw ConfigError("inner_tol must be >= 0");
  if (config.prox_coefficient > 0 && !config.prox_center)
    throw ConfigError("prox coefficient set without a prox center");
  if (config.prox_center &&
      config.prox_center->size() != bundle.center.size())
    throw ConfigError("prox center dimension mismatch");
  if (bundle.order < std::min(config.p, 3))
    throw UnsupportedOrder("bundle order too low for requested step");
}

// Effective gradient at the step center: g + L(x - z).
Vector effective_gradient(const DerivativeBundle& bundle,
                          const TensorStepConfig& config) {
  Vector g = bundle.gradient;
  if (config.prox_coefficient > 0)
    g += config.prox_coefficient * (bundle.center - *config.prox_center);
  return g;
}

}  // namespace

double adaptive_inner_tol(double M, int p, double step_norm) {
  const double floor = 1e-12;
  const double subordinate =
      1e-2 * (M / factorial(p)) * std::pow(std::max(step_norm, 1e-8), p);
  return std::max(floor, subordinate);
}

double step_objective(const DerivativeBundle& bundle,
                      const TensorStepConfig& config, const Vector& y) {
  double v = taylor_model_value(bundle, y, std::min(config.p, bundle.order),
                                config.M);
  if (config.prox_coefficient > 0)
    v += 0.5 * config.prox_coefficient * (y - *config.prox_center).squaredNorm();
  return v;
}

// ---------------------------------------------------------------------------
// p = 1
// ---------------------------------------------------------------------------

TensorStepResult step_p1(const DerivativeBundle& bundle,
                         const TensorStepConfig& config) {
  validate(bundle, config);
  const double L = config.prox_coefficient;
  const Vector g = effective_gradient(bundle, config);
  TensorStepResult r;
  Vector h = -g / (config.M + L);
  r.y = bundle.center + h;
  r.step_norm = h.norm();
  r.model_grad_norm = (g + (config.M + L) * h).norm();
  r.inner_iters = 0;
  r.status = StepStatus::Converged;
  return r;
}

// ---------------------------------------------------------------------------
// p = 2: secular equation on r = |h|, h(r) = -(H + (M r / 2) I)^{-1} g.
// ---------------------------------------------------------------------------

TensorStepResult step_p2(const DerivativeBundle& bundle,
                         const TensorStepConfig& config) {
  validate(bundle, config);
  const double M = config.M;
  const double L = config.prox_coefficient;
  const Vector g = effective_gradient(bundle, config);
  const Eigen::Index n = g.size();

  TensorStepResult result;
  if (g.norm() == 0.0) {
    result.y = bundle.center;
    return result;
  }

  Matrix H = bundle.hessian;
  if (L > 0) H += L * Matrix::Identity(n, n);
  Eigen::SelfAdjointEigenSolver<Matrix> eig(H);
  const Vector lambda = eig.eigenvalues();
  const Vector ghat = eig.eigenvectors().transpose() * g;
  const double lambda_min = lambda.minCoeff();

  auto norm_h = [&](double r) {
    double s = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      const double den = lambda[i] + 0.5 * M * r;
      s += ghat[i] * ghat[i] / (den * den);
    }
    return std::sqrt(s);
  };
  // d|h(r)|/dr = -(M/2) sum ghat_i^2 / den^3 / |h(r)|
  auto dnorm_h = [&](double r, double nh) {
    double s = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      const double den = lambda[i] + 0.5 * M * r;
      s += ghat[i] * ghat[i] / (den * den * den);
    }
    return -0.5 * M * s / nh;
  };

  const double r_floor = std::max(0.0, -2.0 * lambda_min / M);
  double lo = r_floor > 0 ? r_floor * (1 + 1e-12) + 1e-300 : 0.0;
  double hi = std::max(1.0, 2 * r_floor);
  // |h(r)| is strictly decreasing while r grows, so phi(r) = |h(r)| - r has
  // at most one root right of the pole.
  int iters = 0;
  if (norm_h(lo + (lo == 0 ? 1e-300 : 0)) <= lo && lo > 0)
    throw InnerFailure(
        "secular equation has no bracket: model non-convex, M too small");
  while (norm_h(hi) > hi) {
    hi *= 2;
    if (++iters > 300) throw InnerFailure("secular bracket expansion failed");
  }
  double r = 0.5 * (lo + hi);
  for (int it = 0; it < 200; ++it) {
    ++iters;
    r = 0.5 * (lo + hi);
    const double phi = norm_h(r) - r;
    if (std::abs(phi) <= 1e-13 * std::max(1.0, r)) break;
    if (phi > 0)
      lo = r;
    else
      hi = r;
  }
  // Newton polish on phi(r).
  for (int it = 0; it < 8; ++it) {
    ++iters;
    const double nh = norm_h(r);
    const double phi = nh - r;
    const double dphi = dnorm_h(r, nh) - 1.0;
    const double next = r - phi / dphi;
    if (!(next > r_floor) || !std::isfinite(next)) break;
    r = next;
    if (std::abs(phi) <= 1e-12 * std::max(1.0, r)) break;
  }

  Vector hhat(n);
  for (Eigen::Index i = 0; i < n; ++i)
    hhat[i] = -ghat[i] / (lambda[i] + 0.5 * M * r);
  const Vector h = eig.eigenvectors() * hhat;

  result.y = bundle.center + h;
  result.step_norm = h.norm();
  result.model_grad_norm = (g + H * h + 0.5 * M * h.norm() * h).norm();
  result.inner_iters = iters;
  const double tol = config.inner_tol > 0
                         ? config.inner_tol
                         : adaptive_inner_tol(M, 2, result.step_norm);
  result.status = result.model_grad_norm <= tol ? StepStatus::Converged
                                                : StepStatus::MaxIters;
  return result;
}

// ---------------------------------------------------------------------------
// p = 3: damped Newton on the quartic model.
// ---------------------------------------------------------------------------

namespace {

/// Quartic model around bundle.center, in step coordinates h = y - x.
struct QuarticModel {
  const DerivativeBundle& bundle;
  double M;
  double L;
  Vector g;      // effective gradient
  Matrix H;      // effective Hessian
  Matrix third_diag_cache;  // column j holds D3f[e_j, e_j]

  QuarticModel(const DerivativeBundle& b, const TensorStepConfig& cfg)
      : bundle(b), M(cfg.M), L(cfg.prox_coefficient) {
    g = effective_gradient(b, cfg);
    H = b.hessian;
    const Eigen::Index n = g.size();
    if (L > 0) H += L * Matrix::Identity(n, n);
    third_diag_cache.resize(n, n);
    Vector e = Vector::Zero(n);
    for (Eigen::Index j = 0; j < n; ++j) {
      e[j] = 1.0;
      third_diag_cache.col(j) = b.third_dir(e);
      e[j] = 0.0;
    }
  }

  double value(const Vector& h) const {
    const double r2 = h.squaredNorm();
    return g.dot(h) + 0.5 * h.dot(H * h) + bundle.third_dir(h).dot(h) / 6.0 +
           M / 24.0 * r2 * r2;
  }

  Vector gradient(const Vector& h) const {
    return g + H * h + 0.5 * bundle.third_dir(h) +
           (M / 6.0) * h.squaredNorm() * h;
  }

  /// Full model Hessian at h. T[h,.] is recovered by polarization:
  /// T[h, e_j] = (D3f[h+e_j, h+e_j] - D3f[h,h] - D3f[e_j,e_j]) / 2.
  Matrix hessian(const Vector& h) const {
    const Eigen::Index n = g.size();
    Matrix out = H;
    const Vector thh = bundle.third_dir(h);
    Vector e = Vector::Zero(n);
    for (Eigen::Index j = 0; j < n; ++j) {
      e[j] = 1.0;
      out.col(j) +=
          0.5 * (bundle.third_dir(h + e) - thh - third_diag_cache.col(j));
      e[j] = 0.0;
    }
    out = 0.5 * (out + out.transpose()).eval();  // kill polarization rounding
    out += (M / 6.0) * (h.squaredNorm() * Matrix::Identity(n, n) +
                        2.0 * h * h.transpose());
    return out;
  }
};

}  // namespace

TensorStepResult step_p3(const DerivativeBundle& bundle,
                         const TensorStepConfig& config) {
  validate(bundle, config);
  if (bundle.order < 3)
    throw UnsupportedOrder("p=3 step requires third-order derivatives");

  const QuarticModel model(bundle, config);
  const Eigen::Index n = bundle.center.size();

  TensorStepResult result;
  if (model.g.norm() == 0.0) {
    result.y = bundle.center;
    return result;
  }

  Vector h = Vector::Zero(n);
  double fh = 0.0;  // model value at h (value(0) = 0)
  Vector grad = model.g;
  int iters = 0;

  auto target = [&](const Vector& hh) {
    return config.inner_tol > 0
               ? config.inner_tol
               : adaptive_inner_tol(config.M, 3, hh.norm());
  };

  while (iters < config.inner_max_iters) {
    if (grad.norm() <= target(h)) break;
    ++iters;

    Matrix Hm = model.hessian(h);
    const double scale = std::max(1.0, Hm.cwiseAbs().maxCoeff());
    Vector dir;
    bool have_newton = false;
    double mu = 0.0;
    for (int attempt = 0; attempt < 4; ++attempt) {
      Matrix Hreg = Hm;
      if (mu > 0) Hreg += mu * Matrix::Identity(n, n);
      Eigen::LDLT<Matrix> ldlt(Hreg);
      if (ldlt.info() == Eigen::Success) {
        Vector cand = ldlt.solve(-grad);
        if (cand.allFinite() && grad.dot(cand) < 0) {
          dir = cand;
          have_newton = true;
          break;
        }
      }
      mu = (mu == 0) ? 1e-10 * scale : mu * 100;
    }
    if (!have_newton) dir = -grad;  // gradient fallback

    const double slope = grad.dot(dir);

    // Once the predicted decrease falls below the value resolution the
    // Armijo test only reads rounding noise; the local Newton phase is
    // gated on gradient contraction instead.
    const double value_resolution =
        16 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(fh));
    if (have_newton && -slope < value_resolution) {
      const Vector h_try = h + dir;
      const Vector g_try = model.gradient(h_try);
      if (g_try.norm() < 0.9 * grad.norm()) {
        h = h_try;
        fh = model.value(h);
        grad = g_try;
        continue;
      }
      break;  // gradient at its evaluation floor
    }

    // Backtracking (Armijo) on the model value.
    double t = 1.0;
    bool moved = false;
    for (int bt = 0; bt < 60; ++bt) {
      const Vector h_try = h + t * dir;
      const double f_try = model.value(h_try);
      if (f_try <= fh + 1e-4 * t * slope) {
        h = h_try;
        fh = f_try;
        moved = true;
        break;
      }
      t *= 0.5;
    }
    if (!moved) break;  // no further progress representable
    grad = model.gradient(h);
  }

  result.status = grad.norm() <= target(h) ? StepStatus::Converged
                                           : StepStatus::MaxIters;
  result.y = bundle.center + h;
  result.step_norm = h.norm();
  result.model_grad_norm = grad.norm();
  result.inner_iters = iters;
  return result;
}

TensorStepResult step_p3(const Problem& problem, const Vector& x,
                         const TensorStepConfig& config) {
  return step_p3(evaluate(problem, x, 3), config);
}

TensorStepResult tensor_step(const Problem& problem, const Vector& x,
                             const TensorStepConfig& config) {
  if (config.p < 1 || config.p > 3)
    throw UnsupportedOrder("tensor step supports p in {1,2,3}");
  // Convexity of the model is only guaranteed at M >= p*M_p.
  static bool warned = false;
  if (!warned) {
    try {
      const double mp = problem.lipschitz_bound(config.p);
      if (config.M < config.p * mp - 1e-12 * mp) {
        std::fprintf(stderr,
                     "tensoropt: warning: M=%g below p*M_p=%g, model may be "
                     "non-convex\n",
                     config.M, config.p * mp);
        warned = true;
      }
    } catch (const UnsupportedOrder&) {
    }
  }
  const DerivativeBundle bundle = evaluate(problem, x, config.p);
  switch (config.p) {
    case 1:
      return step_p1(bundle, config);
    case 2:
      return step_p2(bundle, config);
    default:
      return step_p3(bundle, config);
  }
}

}  // namespace tensoropt
