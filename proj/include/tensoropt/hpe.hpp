#pragma once

#include <span>

#include "tensoropt/trace.hpp"

namespace tensoropt {

/// Iterate tuple of the accelerated hybrid proximal extragradient loop.
struct HpeState {
  int k = 0;
  double A = 0.0;  // A_0 = 0
  Vector u;        // extragradient center u^k
  Vector y;        // primal iterate y^k
  double last_L = 0.0;
  double last_a = 0.0;
};

/// Coefficient recurrence: a = (1/L + sqrt(1/L^2 + 4A/L)) / 2, A' = A + a.
/// The identity L a^2 = A' holds to rounding.
struct Coefficients {
  double a = 0.0;
  double A_next = 0.0;
};
Coefficients step_coefficients(double A, double L);

/// x^k = (A_k/A_{k+1}) y^k + (a_{k+1}/A_{k+1}) u^k. Returns u exactly when
/// A = 0.
Vector interpolate_x(const HpeState& state, double a, double A_next);

/// u^{k+1} = u^k - a * grad f(y^{k+1}).
Vector extragradient_update(const HpeState& state, double a,
                            const Vector& grad_y_next);

/// Numeric audit of the convergence theory along a run:
///   (I)   1/2|u^N - x*|^2 + A_N (f(y^N) - f*)
///           + 1/4 sum_k A_k L_{k-1} |y^k - x^{k-1}|^2  <=  R^2/2
///   (II)  f(y^N) - f* <= R^2 / (2 A_N)   and   |u^N - x*| <= R
///   (III) sum_k A_k L_{k-1} |y^k - x^{k-1}|^2 <= 2 R^2
///   (IV)  A_N >= 1/4 (sum_k 1/sqrt(L_{k-1}))^2
/// evaluated at every prefix N. Slack = RHS - LHS; negative slack beyond the
/// tolerance is a violation. Inexact inner solves perturb (I)-(III), so the
/// absolute allowance N * max inner residual * max step norm is added on top
/// of the relative tolerance.
struct TheoryReport {
  bool passed = true;
  std::string first_failure;  // empty when passed
  double worst_violation = 0.0;  // most negative adjusted slack observed
  // Per-prefix slacks (index = N-1).
  std::vector<double> energy_slacks;    // (I)
  std::vector<double> step_sum_slacks;  // (III)
  std::vector<double> growth_slacks;    // (IV)
  // Final-prefix slacks, for reporting.
  double energy_slack = 0.0;      // (I)
  double gap_slack = 0.0;         // (II), gap part
  double radius_slack = 0.0;      // (II), |u - x*| part
  double step_sum_slack = 0.0;    // (III)
  double growth_slack = 0.0;      // (IV)
};

TheoryReport check_theory(const RunTrace& trace, const Vector& x_star,
                          double f_star, double tol = 1e-8);

/// Throwing wrapper: raises TheoryViolation naming the first failed
/// inequality and iteration.
void assert_theory(const RunTrace& trace, const Vector& x_star, double f_star,
                   double tol = 1e-8);

/// Objective-rate and coefficient-growth audit:
///   f(y^N) - f* <= c M_p R^{p+1} / N^{(3p+1)/2}    for all N >= 1,
///   A_N >= N^{(3p+1)/2} / (c M_p R^{p-1}),
/// plus the per-iteration window rho in [1/2,1] (relaxed acceptances
/// excluded), the theta bound |y-x|^{p-1}/L >= p!/(4(p+1)M_p), and the
/// admission certificate |grad F(y)| <= (L/2)|y-x| + inner residual.
struct RateReport {
  bool passed = true;
  std::string first_failure;
  double worst_rate_margin = 0.0;    // min over N of bound/gap - 1
  double worst_growth_margin = 0.0;  // min over N of A_N/bound - 1
};

RateReport check_rate(const RunTrace& trace, int p, double M_p, double R,
                      double f_star, double c);

}  // namespace tensoropt
