#include "tensoropt/baselines.hpp"

#include <chrono>
#include <cmath>

namespace tensoropt {

namespace {

double factorial(int n) {
  double f = 1.0;
  for (int i = 2; i <= n; ++i) f *= i;
  return f;
}

bool should_stop(const BaselineConfig& config, std::optional<double> f_star,
                 double f, double grad_norm, RunStatus* status) {
  if (f_star && config.target_gap &&
      normalized_gap(f, *f_star) <= *config.target_gap) {
    *status = RunStatus::ReachedTarget;
    return true;
  }
  if (config.target_grad_norm && grad_norm <= *config.target_grad_norm) {
    *status = RunStatus::ReachedTarget;
    return true;
  }
  return false;
}

TensorStepConfig make_step_config(const Problem& problem,
                                  const BaselineConfig& config) {
  const double mp =
      config.M_p > 0 ? config.M_p : problem.lipschitz_bound(config.p);
  TensorStepConfig cfg;
  cfg.p = config.p;
  cfg.M = config.p * mp;
  cfg.inner_tol = config.inner_tol;
  cfg.inner_max_iters = config.inner_max_iters;
  return cfg;
}

}  // namespace

RunTrace run_plain(const Problem& problem, const Vector& x0,
                   const BaselineConfig& config,
                   std::optional<double> f_star) {
  RunTrace trace;
  trace.x0 = x0;
  trace.status = RunStatus::MaxIters;
  const TensorStepConfig step_cfg = make_step_config(problem, config);

  Vector y = x0;
  const auto t0 = std::chrono::steady_clock::now();
  for (int k = 0; k < config.max_iters; ++k) {
    if (config.wall_clock_sec) {
      const double el =
          std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
              .count();
      if (el > *config.wall_clock_sec) {
        trace.status = RunStatus::WallClock;
        break;
      }
    }
    const TensorStepResult step = tensor_step(problem, y, step_cfg);
    if (step.step_norm == 0.0) {
      trace.status = RunStatus::ConvergedAtCenter;
      break;
    }
    const DerivativeBundle at_y = evaluate(problem, step.y, 1);

    IterationRecord rec;
    rec.k = k;
    rec.x = y;
    rec.y_next = step.y;
    rec.u_next = step.y;
    rec.f_y = at_y.value;
    rec.grad_norm = at_y.gradient.norm();
    rec.step_norm = step.step_norm;
    rec.model_grad_norm = step.model_grad_norm;
    rec.inner_iters = step.inner_iters;
    rec.time_sec =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
            .count();
    trace.records.push_back(std::move(rec));

    y = step.y;
    if (should_stop(config, f_star, at_y.value, at_y.gradient.norm(),
                    &trace.status))
      break;
  }
  return trace;
}

double accelerated_alpha(int p) {
  const double pf = factorial(p);
  const double kappa =
      (p - 1) / pf * std::pow(pf / (p + 1), double(p + 1) / p);
  const double tau = std::pow(p / ((p + 1) * kappa), p);
  return std::pow(2.0, 1 - p) / (std::pow(double(p + 1), p + 1) * tau);
}

RunTrace run_accelerated(const Problem& problem, const Vector& x0,
                         const BaselineConfig& config,
                         std::optional<double> f_star) {
  if (config.p < 2)
    throw ConfigError("accelerated baseline needs p >= 2");
  RunTrace trace;
  trace.x0 = x0;
  trace.status = RunStatus::MaxIters;

  const double mp =
      config.M_p > 0 ? config.M_p : problem.lipschitz_bound(config.p);
  const TensorStepConfig step_cfg = make_step_config(problem, config);
  const double alpha = accelerated_alpha(config.p);
  const int p = config.p;

  Vector y = x0;
  Vector v = x0;
  Vector s = Vector::Zero(x0.size());  // sum of a_i grad f(y_i)
  double A = 0.0;

  const auto t0 = std::chrono::steady_clock::now();
  for (int k = 0; k < config.max_iters; ++k) {
    if (config.wall_clock_sec) {
      const double el =
          std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
              .count();
      if (el > *config.wall_clock_sec) {
        trace.status = RunStatus::WallClock;
        break;
      }
    }
    const double A_next = alpha * std::pow(double(k + 1), p + 1);
    const double a = A_next - A;

    const Vector x = (A * y + a * v) / A_next;
    const TensorStepResult step = tensor_step(problem, x, step_cfg);
    const DerivativeBundle at_y = evaluate(problem, step.y, 1);
    y = step.y;
    s += a * at_y.gradient;

    // v = argmin (M_p/(p+1)) |x - x0|^{p+1} + <s, x>: radial closed form.
    const double sn = s.norm();
    if (sn > 0) {
      const double radius = std::pow(sn / mp, 1.0 / p);
      v = x0 - (radius / sn) * s;
    } else {
      v = x0;
    }
    A = A_next;

    IterationRecord rec;
    rec.k = k;
    rec.a = a;
    rec.A_next = A_next;
    rec.x = x;
    rec.y_next = y;
    rec.u_next = v;
    rec.f_y = at_y.value;
    rec.grad_norm = at_y.gradient.norm();
    rec.step_norm = step.step_norm;
    rec.model_grad_norm = step.model_grad_norm;
    rec.inner_iters = step.inner_iters;
    rec.time_sec =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
            .count();
    trace.records.push_back(std::move(rec));

    if (should_stop(config, f_star, at_y.value, at_y.gradient.norm(),
                    &trace.status))
      break;
  }
  return trace;
}

}  // namespace tensoropt
