#pragma once

// Projected-gradient descent over (tau, a), finite-difference and grid-search
// oracles.

#include "impvo/core_types.hpp"
#include "impvo/gradient_engine.hpp"
#include "impvo/state_solver.hpp"

#include <vector>

namespace impvo {

struct FdGradient {
  Vector tau;
  ControlVector a;
};

/// Central differences of J with full re-solves. Control components that sit
/// within h_a of their box use a one-sided difference pointing into the box.
/// Throws std::invalid_argument when some tau_j +- h_tau leaves the admissible
/// schedule set.
FdGradient fd_gradient(const ProblemSpec& problem, const ImpulseSchedule& schedule,
                       const ControlVector& controls, int points_per_interval, double h_tau,
                       double h_a, const SolveOptions& options = {});

/// Euclidean projection onto {tau_1 >= d, tau_{i+1} - tau_i >= d, tau_N <= T - d}.
/// Feasible input is returned unchanged.
std::vector<double> project_schedule(const std::vector<double>& times, double min_gap, double horizon);

ControlVector project_controls(const ProblemSpec& problem, const ControlVector& controls);

struct OptimizeOptions {
  int max_iters = 200;
  double shrink = 0.5;
  double sufficient_decrease = 1e-4;
  double initial_step = 1.0;
  int max_shrinks = 60;
  double tau_tol = 1e-4;
  double vi_tol = 1e-4;
  int points_per_interval = 60;
  bool alternating = false;
  SolveOptions solve;
};

struct TraceRecord {
  int iteration = 0;
  std::vector<double> tau;
  ControlVector a;
  double cost = 0.0;
  double grad_tau_norm = 0.0;
  double vi_residual = 0.0;
  double tau_gap = 0.0;  // max |tau - Pi(tau - grad)|, zero on the schedule boundary optimum
  double step = 0.0;  // step accepted to reach the next record; 0 on the last
  int mesh_points = 0;
};

struct OptimizationTrace {
  std::vector<TraceRecord> records;
  bool converged = false;
  /// Stopped because the projected gradient vanished while the plain
  /// impulse-time gradient did not: the optimum sits on a schedule constraint.
  bool constrained_stop = false;
  ImpulseSchedule schedule;
  ControlVector controls;
  GradientReport final_report;
};

/// Raised when the line search cannot find a decrease; carries the gradient
/// report at the point where it stalled.
class LineSearchStall : public SolverError {
 public:
  LineSearchStall(const std::string& what, int iteration, GradientReport report)
      : SolverError(what, iteration), report_(std::move(report)) {}
  const GradientReport& report() const { return report_; }

 private:
  GradientReport report_;
};

/// max |tau - Pi(tau - grad)| over the schedule constraint set.
double projected_tau_gap(const ImpulseSchedule& schedule, const Vector& grad);

OptimizationTrace optimize(const ProblemSpec& problem, const ImpulseSchedule& init_schedule,
                           const ControlVector& init_controls, const OptimizeOptions& options = {});

struct GridResult {
  std::vector<double> tau;
  ControlVector a;
  double cost = 0.0;
  /// Largest |J(neighbour) - J(min)| over the grid neighbours of the minimum.
  double cell_variation = 0.0;
  int evaluations = 0;
};

/// Dense grid search for problems with one impulse and scalar controls:
/// tau on `tau_points` equispaced points of [d, T-d], every level on
/// `a_points` equispaced points of its box.
GridResult grid_search(const ProblemSpec& problem, double min_gap, int tau_points, int a_points,
                       int points_per_interval, const SolveOptions& options = {});

}  // namespace impvo
