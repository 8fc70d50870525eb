#pragma once

// Built-in problem registry. Problems are closures over formulas, so configs
// select them by name and may override their numeric parameters.

#include "impvo/core_types.hpp"
#include "impvo/ode_specialization.hpp"

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace impvo {

using ParameterMap = std::map<std::string, double>;

struct BuiltinProblem {
  std::string name;
  ProblemSpec spec;
  /// Present for problems defined as impulsive ODEs; `spec` is then its lift.
  std::optional<OdeProblemSpec> ode;
  ImpulseSchedule schedule;
  ControlVector controls;
  int points_per_interval = 100;
  ParameterMap parameters;  // effective values after overrides
};

std::vector<std::string> problem_names();

/// Default parameter values of a built-in problem.
ParameterMap problem_defaults(const std::string& name);

/// Throws std::invalid_argument for an unknown problem or parameter name.
BuiltinProblem make_problem(const std::string& name, const ParameterMap& overrides = {});

}  // namespace impvo
