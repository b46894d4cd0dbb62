#pragma once

#include <memory>

#include "tensoropt/baselines.hpp"
#include "tensoropt/problems.hpp"
#include "tensoropt/restart.hpp"

namespace tensoropt {

enum class MethodKind { Optimal, Plain, Accelerated, Restart };

/// Parsed and validated run configuration. Unknown keys are rejected at
/// every level; JSON syntax errors surface with line/column positions.
struct RunConfig {
  std::unique_ptr<Problem> problem;
  std::string problem_json;  // canonical echo, for fingerprints/summaries

  MethodKind method = MethodKind::Optimal;
  int p = 3;
  double M_p = 0.0;  // 0 = "auto" (analytic bound from the problem)
  LineSearchConfig line_search;
  double inner_tol = 0.0;
  int inner_max_iters = 100;

  // restart-only
  int q = 0;
  double sigma_q = 0.0;  // 0 = numeric certificate
  double restart_epsilon = 1e-10;
  double delta0 = 0.0;  // 0 = f(x0) - f* from the reference, +1% headroom

  StopCriteria stop;
  std::uint64_t seed = 0;
  Vector x0;  // resolved starting point
  std::string out_path;
};

RunConfig parse_run_config(const std::string& json_text);
RunConfig load_run_config(const std::string& path);

std::unique_ptr<Problem> make_problem_from_json(const std::string& json_text);

MethodConfig method_config(const RunConfig& config);
BaselineConfig baseline_config(const RunConfig& config);

const char* method_kind_name(MethodKind kind);

}  // namespace tensoropt
