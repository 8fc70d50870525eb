#pragma once

// JSON run configuration with strict key checking.

#include "impvo/optimizer.hpp"
#include "impvo/problems.hpp"
#include "impvo/state_solver.hpp"

#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace impvo {

/// Invalid configuration; `path()` names the offending field ("" for the
/// document as a whole).
class ConfigError : public std::invalid_argument {
 public:
  ConfigError(const std::string& path, const std::string& what)
      : std::invalid_argument(path.empty() ? what : path + ": " + what), path_(path) {}
  const std::string& path() const { return path_; }

 private:
  std::string path_;
};

struct GradientOptions {
  bool fd = false;
  double h_tau = 1e-4;
  double h_a = 1e-5;
};

struct RunConfig {
  std::string command;  // solve | grad | check | optimize
  std::string problem;
  ParameterMap parameters;
  std::optional<std::vector<double>> schedule;
  std::optional<double> min_gap;
  std::optional<std::vector<std::vector<double>>> controls;
  std::optional<int> mesh;
  SolveOptions solver;
  OptimizeOptions optimizer;
  GradientOptions gradient;
  std::string output_dir = "out";
};

/// Parses and validates; the built-in problem is instantiated to check the
/// schedule and controls against it.
RunConfig parse_config(const std::string& text);

/// Reads a file and parses it. Unreadable files raise IoError.
RunConfig load_config(const std::filesystem::path& path);

/// Problem, schedule, controls and mesh size with config overrides applied.
struct ResolvedRun {
  BuiltinProblem problem;
  ImpulseSchedule schedule;
  ControlVector controls;
  int points_per_interval = 100;
};

ResolvedRun resolve(const RunConfig& config);

}  // namespace impvo
