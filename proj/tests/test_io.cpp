#include "impvo/config.hpp"
#include "impvo/problems.hpp"
#include "impvo/run.hpp"
#include "impvo/tables.hpp"

#include <doctest.h>

#include <json.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

using namespace impvo;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "impvo_tests" / name;
  fs::remove_all(dir);
  return dir;
}

std::string config_error(const std::string& text) {
  try {
    parse_config(text);
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "";
}

int run_text(const std::string& text, const fs::path& out, std::string* log_text = nullptr) {
  RunConfig c = parse_config(text);
  c.output_dir = out.string();
  std::ostringstream log, err;
  const int code = run(c, log, err);
  if (log_text) *log_text = log.str() + err.str();
  return code;
}

}  // namespace

TEST_CASE("config parsing") {
  const RunConfig c = parse_config(R"({"command": "solve", "problem": "P-LIN"})");
  CHECK(c.command == "solve");
  CHECK(c.problem == "P-LIN");
  CHECK_FALSE(c.schedule.has_value());
  CHECK(c.output_dir == "out");
  const ResolvedRun r = resolve(c);
  CHECK(r.points_per_interval == 200);
  CHECK(r.schedule.size() == 0);

  const RunConfig o = parse_config(R"({"command": "grad", "problem": "P-FULL", "schedule": [0.3],
      "controls": [[0.2], [0.7]], "mesh": 40, "parameters": {"kappa": 0.5},
      "gradient": {"fd": true, "h_tau": 1e-5}, "optimizer": {"alternating": true}})");
  CHECK(o.gradient.fd);
  CHECK(o.gradient.h_tau == 1e-5);
  CHECK(o.optimizer.alternating);
  const ResolvedRun ro = resolve(o);
  CHECK(ro.schedule.times == std::vector<double>{0.3});
  CHECK(ro.controls[1](0) == 0.7);
  CHECK(ro.points_per_interval == 40);
  CHECK(ro.problem.parameters.at("kappa") == 0.5);
}

TEST_CASE("config errors") {
  CHECK(config_error(R"({"command": "solve", "problem": "P-JUMP", "schedule": [0.7, 0.3]})").find("tau_2 - tau_1") !=
        std::string::npos);
  const std::string unknown = config_error(R"({"command": "solve", "problem": "P-LIN", "meshh": 10})");
  CHECK(unknown.find("meshh") != std::string::npos);
  const std::string syntax = config_error("{\"command\": \"solve\",\n  \"problem\" \"P-LIN\"}");
  CHECK(syntax.find("line 2") != std::string::npos);
  CHECK(syntax.find("column") != std::string::npos);
  CHECK(config_error(R"({"command": "fly", "problem": "P-LIN"})").find("command") != std::string::npos);
  CHECK(config_error(R"({"command": "solve", "problem": "P-NOPE"})").find("P-NOPE") != std::string::npos);
  CHECK(config_error(R"({"command": "solve", "problem": "P-LIN", "parameters": {"q": 1}})").find("parameters.q") !=
        std::string::npos);
  CHECK(config_error(R"({"command": "solve", "problem": "P-LIN", "solver": {"tol": 1}})").find("solver.tol") !=
        std::string::npos);
  CHECK(config_error(R"({"command": "solve", "problem": "P-LIN", "mesh": 1})").find("mesh") != std::string::npos);
  CHECK(config_error(R"({"command": "solve", "problem": "P-FULL", "controls": [[3], [0.5]]})").find("controls") !=
        std::string::npos);
  CHECK_THROWS_AS(load_config("/nonexistent/impvo.json"), IoError);
}

TEST_CASE("csv round trip") {
  const Table t{{"t", "y_1", "side"}, {{"0", "1.5", "-"}, {format_number(0.1), format_number(1.0 / 3.0), "+"}}};
  const Table back = parse_csv(to_csv(t));
  CHECK(back.header == t.header);
  CHECK(back.rows == t.rows);
  CHECK(back.number(1, "y_1") == 1.0 / 3.0);
  CHECK(std::stod(format_number(std::exp(1.0))) == std::exp(1.0));

  const fs::path dir = scratch("csv");
  fs::create_directories(dir);
  write_table(dir / "t.csv", t);
  CHECK(read_table(dir / "t.csv").rows == t.rows);
  CHECK_THROWS_AS(read_table(dir / "missing.csv"), IoError);
}

TEST_CASE("solve writes a trajectory with one-sided rows") {
  const fs::path out = scratch("solve");
  CHECK(run_text(R"({"command": "solve", "problem": "P-JUMP", "mesh": 4})", out) == kExitOk);
  const Table t = read_table(out / "trajectory.csv");
  CHECK(t.header.front() == "t");
  CHECK(t.header.back() == "side");
  int left = 0, right = 0;
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    if (t.rows[r].back() == kSideLeft) ++left;
    if (t.rows[r].back() == kSideRight) {
      ++right;
      CHECK(t.number(r, "y_1") == t.number(r - 1, "y_1") + 1.0);
    }
  }
  CHECK(left == 2);
  CHECK(right == 2);
  CHECK(fs::exists(out / "metadata.json"));
  CHECK_FALSE(fs::exists(out / "error.json"));
}

TEST_CASE("grad reports the closed-form jump gradient") {
  const fs::path out = scratch("grad");
  CHECK(run_text(R"({"command": "grad", "problem": "P-JUMP", "gradient": {"fd": true}})", out) == kExitOk);
  const Table t = read_table(out / "gradient_tau.csv");
  REQUIRE(t.rows.size() == 2);
  CHECK(std::abs(t.number(0, "dJ_dtau") + 1.0) < 1e-10);
  CHECK(std::abs(t.number(1, "dJ_dtau") + 3.0) < 1e-10);
  CHECK(std::abs(t.number(0, "fd_dtau") + 1.0) < 1e-6);
  CHECK(fs::exists(out / "gradient_a.csv"));
  CHECK(fs::exists(out / "gradient_terms.csv"));

  const fs::path nofd = scratch("grad_nofd");
  CHECK(run_text(R"({"command": "grad", "problem": "P-JUMP"})", nofd) == kExitOk);
  CHECK(read_table(nofd / "gradient_tau.csv").rows[0][2].empty());
}

TEST_CASE("check passes on every built-in problem") {
  for (const auto& name : problem_names()) {
    CAPTURE(name);
    const fs::path out = scratch("check_" + name);
    std::string log;
    const std::string mesh = name == "P-ODE" || name == "P-COUPLED-FULL" || name == "P-LIN" ? "100" : "40";
    CHECK(run_text(R"({"command": "check", "problem": ")" + name + R"(", "mesh": )" + mesh + "}", out, &log) ==
          kExitOk);
    CAPTURE(log);
    const Table t = read_table(out / "checks.csv");
    CHECK(t.rows.size() >= 12);
  }
}

TEST_CASE("optimize writes a monotone trace") {
  const fs::path out = scratch("optimize");
  CHECK(run_text(R"({"command": "optimize", "problem": "P-FULL"})", out) == kExitOk);
  const Table t = read_table(out / "trace.csv");
  REQUIRE(t.rows.size() > 2);
  for (std::size_t r = 1; r < t.rows.size(); ++r) CHECK(t.number(r, "J") < t.number(r - 1, "J"));
  CHECK(fs::exists(out / "gradient_tau.csv"));

  const fs::path capped = scratch("optimize_capped");
  CHECK(run_text(R"({"command": "optimize", "problem": "P-FULL", "optimizer": {"max_iters": 2}})", capped) ==
        kExitNumerical);
}

TEST_CASE("errors leave a machine-readable record") {
  const fs::path out = scratch("errors");
  RunConfig c = parse_config(R"({"command": "solve", "problem": "P-FULL", "solver": {"fp_max_iter": 1, "fp_tol": 1e-300}})");
  c.output_dir = out.string();
  std::ostringstream log, err;
  CHECK(run(c, log, err) == kExitNumerical);
  std::ifstream in(out / "error.json");
  const nlohmann::json e = nlohmann::json::parse(in);
  CHECK(e["error"]["kind"] == "numerical");

  // A regular file where the output directory should be.
  const fs::path blocker = scratch("blocked");
  fs::create_directories(blocker.parent_path());
  std::ofstream(blocker) << "x";
  c = parse_config(R"({"command": "solve", "problem": "P-LIN"})");
  c.output_dir = (blocker / "sub").string();
  CHECK(run(c, log, err) == kExitIo);
}
