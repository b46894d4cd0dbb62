#pragma once

#include "tensoropt/optimal_method.hpp"

namespace tensoropt {

/// Exact constant of the coefficient-growth estimate,
///   c = 2^{(3(p+1)^2 + 4)/4} (p+1) / p!.
/// The derivation assumes p >= 3; for p in {1,2} the same formula is used
/// and the resulting rate is verified empirically.
double constant_c(int p);

/// Stage budget of the restarted scheme:
///   N_k = max{ ceil( (2 c M_p q^{(p+1)/q} Delta_k^{(p+1-q)/q}
///                      / sigma_q^{(p+1)/q})^{2/(3p+1)} ), 1 }.
/// When q = p+1 the Delta exponent vanishes and N_k is stage-independent.
int stage_iterations(int p, double M_p, int q, double sigma_q, double delta_k);

struct RestartStage {
  int k = 0;
  double delta = 0.0;  // Delta_k
  int budget = 0;      // N_k
  Vector z;            // z_{k+1}, the stage output
  double f = 0.0;      // f(z_{k+1})
  std::optional<double> gap;
  int steps_taken = 0;  // actual tensor-method iterations this stage
  int cumulative_steps = 0;
};

struct RestartSchedule {
  int p = 3;
  int q = 4;
  double M_p = 0.0;
  double sigma_q = 0.0;
  double delta0 = 0.0;
  double c = 0.0;
};

struct RestartTrace {
  RestartSchedule schedule;
  Vector z0;
  std::vector<RestartStage> stages;
  // Full per-iteration records with their stage index, for CSV output.
  std::vector<std::pair<int, IterationRecord>> iterations;
};

struct RestartConfig {
  MethodConfig method;
  int q = 0;             // 0 = from problem.uniform_convexity()
  double sigma_q = 0.0;  // 0 = from problem / numeric certificate
  double epsilon = 1e-10;  // target bound on Delta_k
  int max_stages = 60;
  std::optional<double> wall_clock_sec;
};

/// Restarted optimal tensor method. Requires f(z0) - f* <= delta0 (the
/// caller's responsibility). Stages run until Delta_k <= epsilon. On
/// problems with a known reference, a stage ending above its Delta budget
/// raises StageRegression (sigma_q overestimate or M_p underestimate).
RestartTrace run_restarted(const Problem& problem, const Vector& z0,
                           double delta0, const RestartConfig& config,
                           std::optional<double> f_star = std::nullopt);

/// Seeded point-pair generator for the uniform-convexity certificate.
struct PairSampler {
  std::uint64_t seed = 2024;
  double radius = 1.0;  // pairs drawn uniformly from [-radius, radius]^n
};

/// Numeric lower estimate of sigma_q:
///   0.5 * inf over sampled (x,y) of q (f(y) - f(x) - <grad f(x), y-x>)
///                                   / |y - x|^q.
/// Underestimating is safe (inflates stage budgets, never voids the halving
/// guarantee). Throws NonConvexWitness when a sampled ratio is negative
/// beyond -1e-10.
double estimate_sigma_q(const Problem& problem, int q,
                        const PairSampler& sampler, int count);

/// Audit of a restarted run: per-stage halving
/// f(z_k) - f* <= Delta_0 2^{-k}, the distance corollary
/// (sigma_q/q)|z_k - x*|^q <= f(z_k) - f*, and the cumulative step bound.
struct RestartReport {
  bool halving_ok = true;
  bool distance_ok = true;
  bool cumulative_ok = true;
  double cumulative_bound = 0.0;
  int cumulative_steps = 0;
};

RestartReport check_restart(const RestartTrace& trace, const Vector& x_star,
                            double f_star);

}  // namespace tensoropt
