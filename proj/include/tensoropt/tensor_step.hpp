#pragma once

#include <optional>

#include "tensoropt/oracle.hpp"

namespace tensoropt {

enum class StepStatus { Converged, MaxIters };

struct TensorStepConfig {
  int p = 3;
  double M = 1.0;            // regularization weight, M > 0
  double inner_tol = 0.0;    // target on the model-gradient norm; 0 = adaptive
  int inner_max_iters = 100;
  double prox_coefficient = 0.0;       // L of the added (L/2)|y-z|^2 term
  std::optional<Vector> prox_center;   // z; required when L > 0
};

struct TensorStepResult {
  Vector y;
  double model_grad_norm = 0.0;  // |grad Omega(y)| including the prox term
  double step_norm = 0.0;        // |y - x|
  int inner_iters = 0;
  StepStatus status = StepStatus::Converged;
};

/// Residual target used when config.inner_tol == 0: keeps the inner residual
/// subordinate to the step certificate,
///   tol(h) = max(1e-12, 1e-2 * (M/p!) * max(|h|, 1e-8)^p).
double adaptive_inner_tol(double M, int p, double step_norm);

/// p = 1: closed form y = x - (g + L(x-z)) / (M + L).
TensorStepResult step_p1(const DerivativeBundle& bundle,
                         const TensorStepConfig& config);

/// p = 2: cubic-regularized Newton step via eigendecomposition of the
/// (prox-augmented) Hessian and a secular-equation solve on r = |h|
/// (bisection bracket, then Newton polish to 1e-12 residual). Throws
/// InnerFailure when the root cannot be bracketed (non-convex model, M too
/// small relative to the curvature).
TensorStepResult step_p2(const DerivativeBundle& bundle,
                         const TensorStepConfig& config);

/// p = 3: damped Newton on the convex quartic model with backtracking on the
/// model value, gradient fallback when the Newton system is near singular.
/// The model Hessian's third-order part is assembled by polarization of the
/// directional map (diagonal terms cached once per call).
TensorStepResult step_p3(const DerivativeBundle& bundle,
                         const TensorStepConfig& config);
TensorStepResult step_p3(const Problem& problem, const Vector& x,
                         const TensorStepConfig& config);

/// Evaluates the oracle at x and dispatches on config.p. Warns (once per
/// process) when M < p*M_p is requested, where convexity of the model is no
/// longer guaranteed.
TensorStepResult tensor_step(const Problem& problem, const Vector& x,
                             const TensorStepConfig& config);

/// Model value Omega(y) relative to the step's own objective (Taylor part,
/// regularizer, prox term). Used by tests asserting descent.
double step_objective(const DerivativeBundle& bundle,
                      const TensorStepConfig& config, const Vector& y);

}  // namespace tensoropt
