#include "impvo/config.hpp"

#include "impvo/tables.hpp"

#include <json.hpp>

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

namespace impvo {

namespace {

using json = nlohmann::json;

std::string join(const std::string& base, const std::string& key) {
  return base.empty() ? key : base + "." + key;
}

void check_keys(const json& obj, const std::string& path, const std::set<std::string>& allowed) {
  if (!obj.is_object()) throw ConfigError(path, "expected an object");
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    if (!allowed.count(it.key())) throw ConfigError(join(path, it.key()), "unknown key '" + it.key() + "'");
  }
}

double number(const json& v, const std::string& path) {
  if (!v.is_number()) throw ConfigError(path, "expected a number");
  return v.get<double>();
}

int integer(const json& v, const std::string& path) {
  if (!v.is_number_integer()) throw ConfigError(path, "expected an integer");
  return v.get<int>();
}

bool boolean(const json& v, const std::string& path) {
  if (!v.is_boolean()) throw ConfigError(path, "expected true or false");
  return v.get<bool>();
}

double positive(const json& v, const std::string& path) {
  const double x = number(v, path);
  if (!(x > 0.0)) throw ConfigError(path, "must be positive");
  return x;
}

std::vector<double> number_list(const json& v, const std::string& path) {
  if (!v.is_array()) throw ConfigError(path, "expected an array of numbers");
  std::vector<double> out;
  for (std::size_t k = 0; k < v.size(); ++k) out.push_back(number(v[k], path + "[" + std::to_string(k) + "]"));
  return out;
}

std::pair<int, int> line_column(const std::string& text, std::size_t byte) {
  int line = 1, col = 1;
  for (std::size_t k = 0; k + 1 < byte && k < text.size(); ++k) {
    if (text[k] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return {line, col};
}

}  // namespace

RunConfig parse_config(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    const auto [line, col] = line_column(text, e.byte);
    throw ConfigError("", "parse error at line " + std::to_string(line) + ", column " + std::to_string(col));
  }

  check_keys(doc, "", {"command", "problem", "parameters", "schedule", "min_gap", "controls", "mesh", "solver",
                       "optimizer", "gradient", "output_dir"});
  RunConfig c;
  if (!doc.contains("command") || !doc["command"].is_string()) throw ConfigError("command", "required string");
  c.command = doc["command"].get<std::string>();
  if (c.command != "solve" && c.command != "grad" && c.command != "check" && c.command != "optimize")
    throw ConfigError("command", "must be one of solve, grad, check, optimize");
  if (!doc.contains("problem") || !doc["problem"].is_string()) throw ConfigError("problem", "required string");
  c.problem = doc["problem"].get<std::string>();

  if (doc.contains("parameters")) {
    const json& p = doc["parameters"];
    if (!p.is_object()) throw ConfigError("parameters", "expected an object");
    for (auto it = p.begin(); it != p.end(); ++it)
      c.parameters[it.key()] = number(it.value(), "parameters." + it.key());
  }
  if (doc.contains("schedule")) c.schedule = number_list(doc["schedule"], "schedule");
  if (doc.contains("min_gap")) c.min_gap = positive(doc["min_gap"], "min_gap");
  if (doc.contains("controls")) {
    const json& a = doc["controls"];
    if (!a.is_array()) throw ConfigError("controls", "expected an array of levels");
    std::vector<std::vector<double>> levels;
    for (std::size_t i = 0; i < a.size(); ++i) {
      const std::string path = "controls[" + std::to_string(i) + "]";
      if (a[i].is_number())
        levels.push_back({a[i].get<double>()});
      else
        levels.push_back(number_list(a[i], path));
    }
    c.controls = levels;
  }
  if (doc.contains("mesh")) {
    c.mesh = integer(doc["mesh"], "mesh");
    if (*c.mesh < 2) throw ConfigError("mesh", "points per interval must be >= 2");
  }
  if (doc.contains("solver")) {
    const json& s = doc["solver"];
    check_keys(s, "solver", {"fp_tol", "fp_max_iter"});
    if (s.contains("fp_tol")) c.solver.fp_tol = positive(s["fp_tol"], "solver.fp_tol");
    if (s.contains("fp_max_iter")) {
      c.solver.fp_max_iter = integer(s["fp_max_iter"], "solver.fp_max_iter");
      if (c.solver.fp_max_iter < 1) throw ConfigError("solver.fp_max_iter", "must be >= 1");
    }
  }
  if (doc.contains("optimizer")) {
    const json& o = doc["optimizer"];
    check_keys(o, "optimizer", {"max_iters", "shrink", "sufficient_decrease", "initial_step", "max_shrinks",
                                "tau_tol", "vi_tol", "alternating"});
    auto& op = c.optimizer;
    if (o.contains("max_iters")) {
      op.max_iters = integer(o["max_iters"], "optimizer.max_iters");
      if (op.max_iters < 0) throw ConfigError("optimizer.max_iters", "must be >= 0");
    }
    if (o.contains("shrink")) {
      op.shrink = number(o["shrink"], "optimizer.shrink");
      if (!(op.shrink > 0.0 && op.shrink < 1.0)) throw ConfigError("optimizer.shrink", "must lie in (0, 1)");
    }
    if (o.contains("sufficient_decrease"))
      op.sufficient_decrease = positive(o["sufficient_decrease"], "optimizer.sufficient_decrease");
    if (o.contains("initial_step")) op.initial_step = positive(o["initial_step"], "optimizer.initial_step");
    if (o.contains("max_shrinks")) {
      op.max_shrinks = integer(o["max_shrinks"], "optimizer.max_shrinks");
      if (op.max_shrinks < 1) throw ConfigError("optimizer.max_shrinks", "must be >= 1");
    }
    if (o.contains("tau_tol")) op.tau_tol = positive(o["tau_tol"], "optimizer.tau_tol");
    if (o.contains("vi_tol")) op.vi_tol = positive(o["vi_tol"], "optimizer.vi_tol");
    if (o.contains("alternating")) op.alternating = boolean(o["alternating"], "optimizer.alternating");
  }
  if (doc.contains("gradient")) {
    const json& g = doc["gradient"];
    check_keys(g, "gradient", {"fd", "h_tau", "h_a"});
    if (g.contains("fd")) c.gradient.fd = boolean(g["fd"], "gradient.fd");
    if (g.contains("h_tau")) c.gradient.h_tau = positive(g["h_tau"], "gradient.h_tau");
    if (g.contains("h_a")) c.gradient.h_a = positive(g["h_a"], "gradient.h_a");
  }
  if (doc.contains("output_dir")) {
    if (!doc["output_dir"].is_string() || doc["output_dir"].get<std::string>().empty())
      throw ConfigError("output_dir", "expected a non-empty string");
    c.output_dir = doc["output_dir"].get<std::string>();
  }

  resolve(c);  // validates problem, parameters, schedule and controls
  return c;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read config " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

ResolvedRun resolve(const RunConfig& config) {
  const auto names = problem_names();
  if (std::find(names.begin(), names.end(), config.problem) == names.end()) {
    std::string known;
    for (const auto& n : names) known += (known.empty() ? "" : ", ") + n;
    throw ConfigError("problem", "unknown problem '" + config.problem + "' (known: " + known + ")");
  }
  const ParameterMap defaults = problem_defaults(config.problem);
  for (const auto& [key, value] : config.parameters)
    if (!defaults.count(key)) throw ConfigError("parameters." + key, "unknown parameter '" + key + "'");

  ResolvedRun r{make_problem(config.problem, config.parameters), {}, {}, 0};
  r.schedule = r.problem.schedule;
  r.schedule.horizon = r.problem.spec.horizon;
  if (config.min_gap) r.schedule.min_gap = *config.min_gap;
  if (config.schedule) r.schedule.times = *config.schedule;
  const auto violations = validate_schedule(r.schedule.times, r.schedule.horizon, r.schedule.min_gap);
  if (!violations.empty()) {
    std::string msg;
    for (const auto& v : violations) msg += (msg.empty() ? "" : "; ") + v.message;
    throw ConfigError("schedule", msg);
  }

  if (config.controls) {
    for (const auto& level : *config.controls) {
      Vector a(static_cast<Eigen::Index>(level.size()));
      for (std::size_t k = 0; k < level.size(); ++k) a(k) = level[k];
      r.controls.push_back(a);
    }
  } else {
    r.controls = r.problem.controls;
    if (static_cast<int>(r.controls.size()) != r.schedule.size() + 1)
      throw ConfigError("controls", "the schedule changes the impulse count; give controls explicitly");
  }
  const auto issues = validate_controls(r.problem.spec, r.schedule.size(), r.controls);
  if (!issues.empty()) throw ConfigError("controls", issues.front());
  r.points_per_interval = config.mesh.value_or(r.problem.points_per_interval);
  return r;
}

}  // namespace impvo
