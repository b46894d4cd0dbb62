#include "tensoropt/run_config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

namespace tensoropt {

namespace {

using nlohmann::json;

[[noreturn]] void parse_fail(const std::string& text,
                             const json::parse_error& err) {
  // nlohmann reports a byte offset; translate to line/column.
  std::size_t offset = err.byte;
  std::size_t line = 1, col = 1;
  for (std::size_t i = 0; i < offset && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  std::ostringstream os;
  os << "config JSON parse error at line " << line << ", column " << col
     << ": " << err.what();
  throw ConfigError(os.str());
}

void reject_unknown(const json& obj, const std::set<std::string>& allowed,
                    const std::string& where) {
  if (!obj.is_object()) throw ConfigError(where + " must be a JSON object");
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    if (!allowed.count(it.key()))
      throw ConfigError("unknown key '" + it.key() + "' in " + where);
  }
}

double number_or_auto(const json& v, const std::string& where) {
  if (v.is_string()) {
    if (v.get<std::string>() == "auto") return 0.0;
    throw ConfigError(where + ": expected a number or \"auto\"");
  }
  if (!v.is_number()) throw ConfigError(where + ": expected a number");
  return v.get<double>();
}

std::unique_ptr<Problem> make_problem(const json& pj, std::uint64_t seed) {
  if (!pj.is_object()) throw ConfigError("problem must be an object");
  const std::string type = pj.at("type").get<std::string>();
  if (type == "hard_family") {
    reject_unknown(pj, {"type", "n", "m", "p"}, "problem");
    return std::make_unique<HardFamilyProblem>(pj.at("n").get<int>(),
                                               pj.at("m").get<int>(),
                                               pj.at("p").get<int>());
  }
  if (type == "quadratic") {
    reject_unknown(pj, {"type", "n", "diag"}, "problem");
    if (pj.contains("diag")) {
      const auto d = pj.at("diag").get<std::vector<double>>();
      return std::make_unique<QuadraticProblem>(
          Eigen::Map<const Vector>(d.data(), Eigen::Index(d.size())));
    }
    return std::make_unique<QuadraticProblem>(pj.at("n").get<int>());
  }
  if (type == "power") {
    reject_unknown(pj, {"type", "n", "degree"}, "problem");
    return std::make_unique<PowerProblem>(pj.at("n").get<int>(),
                                          pj.at("degree").get<int>());
  }
  if (type == "synth_logistic") {
    reject_unknown(pj, {"type", "n", "d", "seed"}, "problem");
    const std::uint64_t s =
        pj.contains("seed") ? pj.at("seed").get<std::uint64_t>() : seed;
    return synth_logreg(pj.at("n").get<int>(), pj.at("d").get<int>(), s);
  }
  if (type == "logistic") {
    reject_unknown(pj, {"type", "path", "n_override"}, "problem");
    const int n_override =
        pj.contains("n_override") ? pj.at("n_override").get<int>() : 0;
    return load_libsvm(pj.at("path").get<std::string>(), nullptr, n_override);
  }
  throw ConfigError("unknown problem type '" + type + "'");
}

}  // namespace

const char* method_kind_name(MethodKind kind) {
  switch (kind) {
    case MethodKind::Optimal: return "optimal";
    case MethodKind::Plain: return "plain";
    case MethodKind::Accelerated: return "accelerated";
    case MethodKind::Restart: return "restart";
  }
  return "?";
}

RunConfig parse_run_config(const std::string& json_text) {
  json root;
  try {
    root = json::parse(json_text);
  } catch (const json::parse_error& err) {
    parse_fail(json_text, err);
  }
  reject_unknown(root, {"problem", "method", "limits", "seed", "x0", "out"},
                 "config");

  RunConfig cfg;
  cfg.seed = root.contains("seed") ? root.at("seed").get<std::uint64_t>() : 0;
  cfg.problem = make_problem(root.at("problem"), cfg.seed);
  cfg.problem_json = root.at("problem").dump();

  const json& mj = root.at("method");
  reject_unknown(mj,
                 {"name", "p", "M_p", "line_search", "inner", "q", "sigma_q",
                  "epsilon", "delta0"},
                 "method");
  const std::string name = mj.at("name").get<std::string>();
  if (name == "optimal") cfg.method = MethodKind::Optimal;
  else if (name == "plain") cfg.method = MethodKind::Plain;
  else if (name == "accelerated") cfg.method = MethodKind::Accelerated;
  else if (name == "restart") cfg.method = MethodKind::Restart;
  else throw ConfigError("unknown method '" + name + "'");

  cfg.p = mj.at("p").get<int>();
  if (mj.contains("M_p")) cfg.M_p = number_or_auto(mj.at("M_p"), "method.M_p");
  if (mj.contains("line_search")) {
    const json& lj = mj.at("line_search");
    reject_unknown(lj, {"L_init", "expand_factor", "max_probes"},
                   "method.line_search");
    if (lj.contains("L_init"))
      cfg.line_search.L_init = lj.at("L_init").get<double>();
    if (lj.contains("expand_factor"))
      cfg.line_search.expand_factor = lj.at("expand_factor").get<double>();
    if (lj.contains("max_probes"))
      cfg.line_search.max_probes = lj.at("max_probes").get<int>();
  }
  if (mj.contains("inner")) {
    const json& ij = mj.at("inner");
    reject_unknown(ij, {"tol", "max_iters"}, "method.inner");
    if (ij.contains("tol"))
      cfg.inner_tol = number_or_auto(ij.at("tol"), "method.inner.tol");
    if (ij.contains("max_iters"))
      cfg.inner_max_iters = ij.at("max_iters").get<int>();
  }
  if (mj.contains("q")) cfg.q = mj.at("q").get<int>();
  if (mj.contains("sigma_q"))
    cfg.sigma_q = number_or_auto(mj.at("sigma_q"), "method.sigma_q");
  if (mj.contains("epsilon")) cfg.restart_epsilon = mj.at("epsilon").get<double>();
  if (mj.contains("delta0"))
    cfg.delta0 = number_or_auto(mj.at("delta0"), "method.delta0");

  if (root.contains("limits")) {
    const json& lj = root.at("limits");
    reject_unknown(
        lj, {"max_iters", "target_gap", "target_grad_norm", "wall_clock_sec"},
        "limits");
    if (lj.contains("max_iters"))
      cfg.stop.max_iters = lj.at("max_iters").get<int>();
    if (lj.contains("target_gap"))
      cfg.stop.target_gap = lj.at("target_gap").get<double>();
    if (lj.contains("target_grad_norm"))
      cfg.stop.target_grad_norm = lj.at("target_grad_norm").get<double>();
    if (lj.contains("wall_clock_sec"))
      cfg.stop.wall_clock_sec = lj.at("wall_clock_sec").get<double>();
  }

  const int n = cfg.problem->dimension();
  cfg.x0 = Vector::Zero(n);
  if (root.contains("x0")) {
    const json& xj = root.at("x0");
    reject_unknown(xj, {"kind", "values"}, "x0");
    const std::string kind = xj.at("kind").get<std::string>();
    if (kind == "zeros") cfg.x0 = Vector::Zero(n);
    else if (kind == "ones") cfg.x0 = Vector::Ones(n);
    else if (kind == "custom") {
      const auto vals = xj.at("values").get<std::vector<double>>();
      if (int(vals.size()) != n)
        throw ConfigError("x0.values length must equal the dimension");
      cfg.x0 = Eigen::Map<const Vector>(vals.data(), n);
    } else throw ConfigError("x0.kind must be zeros|ones|custom");
  }

  if (root.contains("out")) cfg.out_path = root.at("out").get<std::string>();

  // Early validation: the analytic M_p must exist when "auto" is requested,
  // and a declared uniform-convexity pair must satisfy 2 <= q <= p+1.
  if (cfg.M_p == 0.0) {
    try {
      make_spec(*cfg.problem, cfg.p);
    } catch (const UnsupportedOrder& e) {
      throw ConfigError(std::string("method.M_p is \"auto\" but ") + e.what());
    }
  } else if (cfg.M_p < 0) {
    throw ConfigError("method.M_p must be positive");
  }
  return cfg;
}

RunConfig load_run_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_run_config(ss.str());
}

std::unique_ptr<Problem> make_problem_from_json(const std::string& json_text) {
  json pj;
  try {
    pj = json::parse(json_text);
  } catch (const json::parse_error& err) {
    parse_fail(json_text, err);
  }
  return make_problem(pj, 0);
}

MethodConfig method_config(const RunConfig& config) {
  MethodConfig m;
  m.p = config.p;
  m.M_p = config.M_p;
  m.line_search = config.line_search;
  m.inner_tol = config.inner_tol;
  m.inner_max_iters = config.inner_max_iters;
  return m;
}

BaselineConfig baseline_config(const RunConfig& config) {
  BaselineConfig b;
  b.method = config.method == MethodKind::Plain
                 ? BaselineMethod::PlainTensor
                 : BaselineMethod::AcceleratedTensor;
  b.p = config.p;
  b.M_p = config.M_p;
  b.inner_tol = config.inner_tol;
  b.inner_max_iters = config.inner_max_iters;
  b.max_iters = config.stop.max_iters;
  b.target_gap = config.stop.target_gap;
  b.target_grad_norm = config.stop.target_grad_norm;
  b.wall_clock_sec = config.stop.wall_clock_sec;
  return b;
}

}  // namespace tensoropt
