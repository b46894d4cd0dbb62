#pragma once

#include "tensoropt/optimal_method.hpp"

namespace tensoropt {

enum class BaselineMethod { PlainTensor, AcceleratedTensor };

struct BaselineConfig {
  BaselineMethod method = BaselineMethod::PlainTensor;
  int p = 3;  // experiment parity wants p in {2,3}
  double M_p = 0.0;  // 0 = from problem
  double inner_tol = 0.0;
  int inner_max_iters = 100;
  int max_iters = 1000;
  std::optional<double> target_gap;
  std::optional<double> target_grad_norm;
  std::optional<double> wall_clock_sec;
};

/// Plain tensor method: y_{k+1} = T_{p, p M_p}(y_k). Descent is monotone up
/// to the inner tolerance. The returned records reuse the iteration layout;
/// line-search fields are zero.
RunTrace run_plain(const Problem& problem, const Vector& x0,
                   const BaselineConfig& config,
                   std::optional<double> f_star = std::nullopt);

/// Accelerated tensor method with estimating sequences: aggregate lower model
///   psi_k(x) = (M_p/(p+1)) |x - x0|^{p+1} + sum_i a_i [f(y_i) + <g_i, x-y_i>],
/// coefficients A_k = alpha_p k^{p+1} (alpha_p a method constant),
/// x_k = (A_k y_k + a_{k+1} v_k)/A_{k+1}, y_{k+1} = T_{p,pM_p}(x_k), and
/// v_{k+1} = argmin psi_{k+1}, which for the pure power regularizer reduces
/// to a radial equation with a closed-form root. Contract: on reference
/// problems the gap decays as O(M_p R^{p+1} / N^{p+1}).
RunTrace run_accelerated(const Problem& problem, const Vector& x0,
                         const BaselineConfig& config,
                         std::optional<double> f_star = std::nullopt);

/// A_k growth coefficient alpha_p = 2^{1-p} / ((p+1)^{p+1} tau_p) with
/// tau_p = (p / ((p+1) kappa_p))^p, kappa_p = (p-1)/p! (p!/(p+1))^{(p+1)/p}.
double accelerated_alpha(int p);

}  // namespace tensoropt
