#include "tensoropt/optimal_method.hpp"

#include <cassert>
#include <chrono>
#include <cmath>
#include <limits>
#include <vector>

namespace tensoropt {

namespace {

double factorial(int n) {
  double f = 1.0;
  for (int i = 2; i <= n; ++i) f *= i;
  return f;
}

double resolve_mp(const Problem& problem, const MethodConfig& config) {
  return config.M_p > 0 ? config.M_p : problem.lipschitz_bound(config.p);
}

}  // namespace

double acceptance_ratio(double step_norm, double L, int p, double M_p) {
  if (!(L > 0) || !(M_p > 0) || step_norm < 0)
    throw ConfigError("acceptance_ratio: need L > 0, M_p > 0, step_norm >= 0");
  const double power =
      p == 1 ? 1.0 : std::pow(step_norm, p - 1);  // 0^0 := 1 at p = 1
  return 2.0 * (p + 1) * M_p * power / (factorial(p) * L);
}

IterationRecord probe(const Problem& problem, const HpeState& state, double L,
                      const MethodConfig& config) {
  const double M_p = resolve_mp(problem, config);
  const Coefficients c = step_coefficients(state.A, L);
  const Vector x = interpolate_x(state, c.a, c.A_next);

  TensorStepConfig step_cfg;
  step_cfg.p = config.p;
  step_cfg.M = config.p * M_p;
  step_cfg.inner_tol = config.inner_tol;
  step_cfg.inner_max_iters = config.inner_max_iters;
  step_cfg.prox_coefficient = L;
  step_cfg.prox_center = x;

  const TensorStepResult step = tensor_step(problem, x, step_cfg);

  IterationRecord rec;
  rec.k = state.k;
  rec.L = L;
  rec.a = c.a;
  rec.A_next = c.A_next;
  rec.x = x;
  rec.y_next = step.y;
  rec.step_norm = step.step_norm;
  rec.model_grad_norm = step.model_grad_norm;
  rec.inner_iters = step.inner_iters;
  rec.rho = acceptance_ratio(step.step_norm, L, config.p, M_p);

  const DerivativeBundle at_y = evaluate(problem, step.y, 1);
  rec.f_y = at_y.value;
  rec.grad_norm = at_y.gradient.norm();
  rec.u_next = extragradient_update(state, c.a, at_y.gradient);
  rec.cert_grad_norm = (at_y.gradient + L * (step.y - x)).norm();

  // Step certificate, checked inline in debug builds:
  // |grad F_{L,x}(y)| <= (p+1) M_p / p! |y-x|^p + inner residual.
  assert(rec.cert_grad_norm <=
         (config.p + 1) * M_p / factorial(config.p) *
                 std::pow(step.step_norm, config.p) * (1 + 1e-9) +
             step.model_grad_norm + 1e-12);
  return rec;
}

LineSearchResult find_L(const Problem& problem, const HpeState& state,
                        const MethodConfig& config, double warm_L) {
  const LineSearchConfig& ls = config.line_search;
  if (!(ls.expand_factor > 1) || ls.max_probes < 4)
    throw ConfigError("line search needs expand_factor > 1, max_probes >= 4");

  double L = warm_L > 0 ? warm_L : ls.L_init;
  double lo = 0.0;                                      // last L with rho > 1
  double hi = std::numeric_limits<double>::infinity();  // last L with rho < 1/2

  std::vector<IterationRecord> tried;
  tried.reserve(ls.max_probes);

  for (int attempt = 0; attempt < ls.max_probes; ++attempt) {
    IterationRecord rec = probe(problem, state, L, config);
    rec.probes = attempt + 1;

    if (rec.step_norm <= 1e-14) {
      // y = x^k: either the gradient of F vanished there (converged) or L
      // was absurdly large. Only the first ends the run.
      const double grad_at_x = evaluate(problem, rec.x, 1).gradient.norm();
      if (grad_at_x <= 1e-12) {
        LineSearchResult out;
        out.outcome = LineSearchOutcome::ConvergedAtCenter;
        out.record = std::move(rec);
        return out;
      }
    }

    if (rec.rho >= 0.5 && rec.rho <= 1.0) {
      LineSearchResult out;
      out.record = std::move(rec);
      return out;
    }
    tried.push_back(rec);

    if (rec.rho > 1.0) {
      lo = std::max(lo, L);
      L = std::isfinite(hi) ? std::sqrt(lo * hi) : L * ls.expand_factor;
    } else {
      hi = std::min(hi, L);
      L = lo > 0 ? std::sqrt(lo * hi) : L / ls.expand_factor;
    }
    if (std::isfinite(hi) && lo > 0 && hi / lo < 1 + 1e-12) break;
  }

  // Relaxed window fallback: first probe with rho in [0.4, 1.1].
  for (auto& rec : tried) {
    if (rec.rho >= 0.4 && rec.rho <= 1.1) {
      rec.relaxed = true;
      rec.probes = int(tried.size());
      LineSearchResult out;
      out.record = std::move(rec);
      return out;
    }
  }
  throw LineSearchExhausted(
      "no L with rho in [0.4, 1.1] after " + std::to_string(tried.size()) +
      " probes; M_p misestimated or inner tolerance too loose");
}

RunTrace run_optimal(const Problem& problem, const Vector& x0,
                     const StopCriteria& stop, const MethodConfig& config,
                     std::optional<double> f_star,
                     const std::function<void(const IterationRecord&)>&
                         on_iteration) {
  if (x0.size() != problem.dimension())
    throw ConfigError("starting point dimension mismatch");

  RunTrace trace;
  trace.x0 = x0;
  trace.status = RunStatus::MaxIters;

  HpeState state;
  state.u = x0;
  state.y = x0;

  double warm_L = config.line_search.L_init;
  const auto t0 = std::chrono::steady_clock::now();

  for (int k = 0; k < stop.max_iters; ++k) {
    if (stop.wall_clock_sec) {
      const double elapsed =
          std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
              .count();
      if (elapsed > *stop.wall_clock_sec) {
        trace.status = RunStatus::WallClock;
        break;
      }
    }

    LineSearchResult ls = find_L(problem, state, config, warm_L);
    if (ls.outcome == LineSearchOutcome::ConvergedAtCenter) {
      trace.status = RunStatus::ConvergedAtCenter;
      break;
    }
    IterationRecord rec = std::move(ls.record);
    rec.time_sec =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
            .count();

    state.k = k + 1;
    state.A = rec.A_next;
    state.y = rec.y_next;
    state.u = rec.u_next;
    state.last_L = rec.L;
    state.last_a = rec.a;
    warm_L = rec.L;

    trace.records.push_back(rec);
    if (on_iteration) on_iteration(trace.records.back());

    if (f_star && stop.target_gap &&
        normalized_gap(rec.f_y, *f_star) <= *stop.target_gap) {
      trace.status = RunStatus::ReachedTarget;
      break;
    }
    if (stop.target_grad_norm && rec.grad_norm <= *stop.target_grad_norm) {
      trace.status = RunStatus::ReachedTarget;
      break;
    }
  }
  return trace;
}

}  // namespace tensoropt
