#pragma once

// Comma-separated result tables. Numbers are written with 17 significant
// digits so that reading a table back reproduces every double exactly.

#include "impvo/gradient_engine.hpp"
#include "impvo/optimizer.hpp"
#include "impvo/state_solver.hpp"

#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

namespace impvo {

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  int column(const std::string& name) const;  // throws if absent
  double number(std::size_t row, const std::string& name) const;
};

std::string format_number(double v);

void write_table(const std::filesystem::path& path, const Table& table);
Table read_table(const std::filesystem::path& path);
std::string to_csv(const Table& table);
Table parse_csv(const std::string& text);

/// Marks of the `side` column: left limit, right limit, single-valued node.
inline constexpr const char* kSideLeft = "-";
inline constexpr const char* kSideRight = "+";
inline constexpr const char* kSideNone = "\xC2\xB7";  // middle dot

/// One row per mesh point: t, y_1..y_n, side. Impulse nodes appear twice.
Table trajectory_table(const PiecewiseTrajectory& trajectory);

/// j, dJ_dtau, fd_dtau, abs_err, rel_err (FD columns empty without FD).
Table gradient_tau_table(const GradientReport& report);
/// i, k, dJ_da, fd_da, abs_err, rel_err.
Table gradient_a_table(const GradientReport& report);
/// j and the per-term breakdown of dJ/dtau_j.
Table gradient_terms_table(const GradientReport& report);

struct CheckResult {
  std::string name;
  double value = 0.0;
  double threshold = 0.0;
  bool pass() const { return value <= threshold; }
};

Table check_table(const std::vector<CheckResult>& checks);

/// iteration, tau_1..tau_N, a_<i>_<k>..., J, grad_tau_norm, vi_residual, step, M.
Table trace_table(const OptimizationTrace& trace);

/// Relative error |a - b| / max(|b|, floor).
double relative_error(double a, double b, double floor = 1e-12);

}  // namespace impvo
