#pragma once

#include "tensoropt/baselines.hpp"
#include "tensoropt/optimal_method.hpp"

namespace tensoropt {

/// High-precision optimum used to evaluate gaps and theory checks. Never
/// hand-entered: always the output of a run.
struct ReferenceSolution {
  std::string fingerprint;
  Vector x_star;
  double f_star = 0.0;
  double grad_norm = 0.0;  // certified |grad f(x_star)|
  bool attained = true;    // false when the infimum is a limit (logistic)
  std::string method;
  double tol = 0.0;
};

struct ReferenceOptions {
  int p = 3;
  double M_p = 0.0;       // 0 = from problem
  double tol = 0.0;       // 0 = 1e-13 * max(1, |grad f(x0)|)
  int max_iters = 400;
  int polish_iters = 60;  // plain tensor steps after the accelerated run
  double L_init = 1.0;
};

/// Runs the optimal method to the gradient target and polishes with plain
/// tensor steps. Unattainable infima (problem.minimum_attained() == false)
/// yield attained = false with the best point of a fixed long run; otherwise
/// failing the target raises NotConverged.
ReferenceSolution compute_reference(const Problem& problem, const Vector& x0,
                                    const ReferenceOptions& options);

/// Cache directory: $TENSOROPT_CACHE_DIR, default ".tensoropt-cache".
std::string reference_cache_dir();

std::string problem_fingerprint(const Problem& problem);

/// Cached wrapper around compute_reference; entries keyed by the problem
/// fingerprint, stored as JSON files under the cache directory.
ReferenceSolution reference_for(const Problem& problem, const Vector& x0,
                                const ReferenceOptions& options,
                                bool* cache_hit = nullptr);

std::string reference_to_json(const ReferenceSolution& ref);
ReferenceSolution reference_from_json(const std::string& json_text);

}  // namespace tensoropt
