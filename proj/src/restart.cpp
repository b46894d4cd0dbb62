#include "tensoropt/restart.hpp"

#include <chrono>
#include <cmath>
#include <limits>

namespace tensoropt {

double constant_c(int p) {
  if (p < 1) throw ConfigError("constant_c requires p >= 1");
  double fact = 1.0;
  for (int i = 2; i <= p; ++i) fact *= i;
  const double exponent = (3.0 * (p + 1) * (p + 1) + 4.0) / 4.0;
  return std::exp2(exponent) * (p + 1) / fact;
}

int stage_iterations(int p, double M_p, int q, double sigma_q,
                     double delta_k) {
  if (!(sigma_q > 0) || !(delta_k > 0))
    throw ConfigError("stage_iterations requires sigma_q > 0, delta_k > 0");
  const double c = constant_c(p);
  const double base = 2.0 * c * M_p * std::pow(double(q), double(p + 1) / q) *
                      std::pow(delta_k, double(p + 1 - q) / q) /
                      std::pow(sigma_q, double(p + 1) / q);
  const double n = std::pow(base, 2.0 / (3 * p + 1));
  if (!(n > 0) || !std::isfinite(n)) return 1;
  return std::max(int(std::ceil(n)), 1);
}

RestartTrace run_restarted(const Problem& problem, const Vector& z0,
                           double delta0, const RestartConfig& config,
                           std::optional<double> f_star) {
  if (!(delta0 > 0)) throw ConfigError("delta0 must be positive");
  const int p = config.method.p;
  int q = config.q;
  double sigma = config.sigma_q;
  if (q == 0 || sigma == 0.0) {
    const auto uc = problem.uniform_convexity();
    if (!uc)
      throw ConfigError("restart needs (q, sigma_q): not provided and the "
                        "problem declares none");
    if (q == 0) q = uc->q;
    if (sigma == 0.0) sigma = uc->sigma;
  }
  if (q < 2 || q > p + 1)
    throw ConfigError("restart requires 2 <= q <= p+1");
  if (!(sigma > 0)) throw ConfigError("sigma_q must be positive");

  const double M_p = config.method.M_p > 0 ? config.method.M_p
                                           : problem.lipschitz_bound(p);

  RestartTrace trace;
  trace.schedule = {p, q, M_p, sigma, delta0, constant_c(p)};
  trace.z0 = z0;

  Vector z = z0;
  int cumulative = 0;
  double warm_L = config.method.line_search.L_init;
  const auto t0 = std::chrono::steady_clock::now();

  for (int k = 0; k < config.max_stages; ++k) {
    const double delta_k = delta0 * std::exp2(double(-k));
    if (delta_k <= config.epsilon) break;
    if (config.wall_clock_sec) {
      const double el =
          std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
              .count();
      if (el > *config.wall_clock_sec) break;
    }

    const int budget = stage_iterations(p, M_p, q, sigma, delta_k);

    MethodConfig stage_cfg = config.method;
    stage_cfg.M_p = M_p;
    stage_cfg.line_search.L_init = warm_L;
    StopCriteria stop;
    stop.max_iters = budget;

    RunTrace stage_run = run_optimal(problem, z, stop, stage_cfg);
    for (const auto& rec : stage_run.records)
      trace.iterations.emplace_back(k, rec);

    if (!stage_run.records.empty()) {
      const IterationRecord& last = stage_run.records.back();
      z = last.y_next;
      warm_L = last.L;
    }
    cumulative += int(stage_run.records.size());

    RestartStage stage;
    stage.k = k;
    stage.delta = delta_k;
    stage.budget = budget;
    stage.z = z;
    stage.f = evaluate(problem, z, 1).value;
    stage.steps_taken = int(stage_run.records.size());
    stage.cumulative_steps = cumulative;
    if (f_star) {
      stage.gap = stage.f - *f_star;
      if (*stage.gap > delta_k / 2 + 1e-12 * std::max(1.0, std::abs(*f_star)))
        throw StageRegression(
            "stage " + std::to_string(k) + " ended above Delta_{k+1} = " +
            format_double(delta_k / 2) +
            ": sigma_q overestimated or M_p underestimated");
    }
    trace.stages.push_back(std::move(stage));
  }
  return trace;
}

double estimate_sigma_q(const Problem& problem, int q,
                        const PairSampler& sampler, int count) {
  if (count < 1000)
    throw ConfigError("sigma_q certificate needs at least 1000 pairs");
  if (q < 2) throw ConfigError("uniform convexity degree must be >= 2");
  const int n = problem.dimension();
  SplitMix64 rng(sampler.seed);
  double inf_ratio = std::numeric_limits<double>::infinity();
  for (int i = 0; i < count; ++i) {
    Vector x = sampler.radius * rng.vector_symmetric(n);
    Vector y = sampler.radius * rng.vector_symmetric(n);
    const double dist = (y - x).norm();
    if (dist < 1e-12) continue;
    const DerivativeBundle bx = evaluate(problem, x, 1);
    const double fy = evaluate(problem, y, 1).value;
    const double bregman = fy - bx.value - bx.gradient.dot(y - x);
    const double ratio = q * bregman / std::pow(dist, q);
    if (ratio < -1e-10)
      throw NonConvexWitness("negative Bregman ratio " + format_double(ratio) +
                             " at sampled pair " + std::to_string(i));
    inf_ratio = std::min(inf_ratio, ratio);
  }
  return 0.5 * std::max(inf_ratio, 0.0);
}

RestartReport check_restart(const RestartTrace& trace, const Vector& x_star,
                            double f_star) {
  RestartReport rep;
  const RestartSchedule& s = trace.schedule;
  double power_sum = 0.0;
  const double exp_i = 2.0 * (s.p + 1 - s.q) / (s.q * (3.0 * s.p + 1));
  for (std::size_t i = 0; i < trace.stages.size(); ++i) {
    const RestartStage& st = trace.stages[i];
    const double delta_next = st.delta / 2;
    const double gap = st.f - f_star;
    if (gap > delta_next * (1 + 1e-9) + 1e-15) rep.halving_ok = false;
    const double dist = (st.z - x_star).norm();
    if (s.sigma_q / s.q * std::pow(dist, s.q) > gap + 1e-12)
      rep.distance_ok = false;
    power_sum += std::exp2(-double(st.k) * exp_i);
    rep.cumulative_steps = st.cumulative_steps;
  }
  if (!trace.stages.empty()) {
    const int k = trace.stages.back().k;
    const double tilde_c = std::pow(
        2.0 * s.c * std::pow(double(s.q), double(s.p + 1) / s.q),
        2.0 / (3 * s.p + 1));
    rep.cumulative_bound =
        tilde_c * std::pow(s.M_p, 2.0 / (3 * s.p + 1)) /
            std::pow(s.sigma_q, 2.0 * (s.p + 1) / (s.q * (3.0 * s.p + 1))) *
            std::pow(s.delta0, exp_i) * power_sum +
        k;
    rep.cumulative_ok = rep.cumulative_steps <= rep.cumulative_bound;
  }
  return rep;
}

}  // namespace tensoropt
