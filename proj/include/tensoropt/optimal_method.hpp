#pragma once

#include <functional>

#include "tensoropt/hpe.hpp"
#include "tensoropt/tensor_step.hpp"
#include "tensoropt/trace.hpp"

namespace tensoropt {

struct LineSearchConfig {
  double L_init = 1.0;        // first probe; warm-started across iterations
  double expand_factor = 2.0;
  int max_probes = 60;
  // The acceptance window is the fixed interval [1/2, 1]; when bisection
  // cannot land in it within max_probes, the first probe with
  // rho in [0.4, 1.1] is accepted and flagged as relaxed.
};

struct StopCriteria {
  int max_iters = 1000;
  std::optional<double> target_gap;        // normalized; needs a reference
  std::optional<double> target_grad_norm;
  std::optional<double> wall_clock_sec;
};

struct MethodConfig {
  int p = 3;
  double M_p = 0.0;  // Lipschitz bound of the p-th derivative; 0 = from problem
  LineSearchConfig line_search;
  double inner_tol = 0.0;  // 0 = adaptive
  int inner_max_iters = 100;
};

/// rho = 2 (p+1) M_p |y - x|^{p-1} / (p! L). Acceptance iff rho in [1/2, 1].
/// For p = 1 the step norm drops out (rho = 4 M_1 / L).
double acceptance_ratio(double step_norm, double L, int p, double M_p);

/// One trial value of L: coefficients, interpolation, prox-regularized tensor
/// step with M = p M_p and prox (L, x^k), extragradient update. Does not
/// mutate the state. The returned record carries rho; the caller decides
/// acceptance.
IterationRecord probe(const Problem& problem, const HpeState& state, double L,
                      const MethodConfig& config);

enum class LineSearchOutcome { Accepted, ConvergedAtCenter };

struct LineSearchResult {
  LineSearchOutcome outcome = LineSearchOutcome::Accepted;
  IterationRecord record;
};

/// Bracket-and-bisect search for L with rho in the window. Starts at the
/// warm L, expands while rho > 1, shrinks while rho < 1/2, then bisects on
/// log L. rho is not provably monotone in L (x^k moves with L through the
/// coefficients), so on oscillation the relaxed window applies. Throws
/// LineSearchExhausted when no probe lands even in the relaxed window.
/// Reports ConvergedAtCenter when the step norm vanishes with a vanishing
/// gradient at x^k.
LineSearchResult find_L(const Problem& problem, const HpeState& state,
                        const MethodConfig& config, double warm_L);

/// Full optimal-method run from u^0 = y^0 = x0.
RunTrace run_optimal(const Problem& problem, const Vector& x0,
                     const StopCriteria& stop, const MethodConfig& config,
                     std::optional<double> f_star = std::nullopt,
                     const std::function<void(const IterationRecord&)>&
                         on_iteration = nullptr);

}  // namespace tensoropt
