#pragma once

// Command dispatch for the CLI: solve, grad, check, optimize.

#include "impvo/config.hpp"
#include "impvo/tables.hpp"

#include <filesystem>
#include <ostream>
#include <string>
#include <vector>

namespace impvo {

enum ExitCode : int { kExitOk = 0, kExitValidation = 1, kExitNumerical = 2, kExitIo = 3 };

/// Every residual check available for a problem at the given point.
std::vector<CheckResult> run_checks(const ResolvedRun& run, const SolveOptions& options);

/// Gradient report with the FD columns filled when `gradient.fd` is set.
GradientReport gradient_report(const ResolvedRun& run, const SolveOptions& options,
                               const GradientOptions& gradient);

/// Executes the configured command, writing result tables into
/// config.output_dir, and returns the process exit code. Errors are written
/// to `err` and to error.json in the output directory.
int run(const RunConfig& config, std::ostream& log, std::ostream& err);

/// Loads the config at `path` and runs it; `output_dir` (if not empty)
/// overrides the configured directory. Load failures are reported like run
/// errors, with error.json written to the override directory when one is given.
int run_file(const std::filesystem::path& path, const std::string& output_dir, std::ostream& log,
             std::ostream& err);

}  // namespace impvo
