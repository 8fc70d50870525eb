#pragma once

#include "impvo/core_types.hpp"
#include "impvo/mesh.hpp"

#include <stdexcept>
#include <vector>

namespace impvo {

/// Raised when a numerical iteration fails; `where` names the offending
/// mesh point or iteration.
class SolverError : public std::runtime_error {
 public:
  SolverError(const std::string& what, int where) : std::runtime_error(what), where_(where) {}
  int where() const { return where_; }

 private:
  int where_;
};

struct SolveOptions {
  double fp_tol = 1e-12;
  int fp_max_iter = 50;
};

/// State on a mesh. Column p of `states` is y at mesh point p; at an impulse
/// node the left and right limits live in different points (see Mesh).
struct PiecewiseTrajectory {
  Mesh mesh;
  ImpulseSchedule schedule;
  ControlVector controls;
  Matrix states;  // n x point_count

  int state_dim() const { return static_cast<int>(states.rows()); }
  Vector at(int p) const { return states.col(p); }
  /// y(tau_l^-), l = 1..N+1.
  Vector left_limit(int l) const { return states.col(mesh.left_point(l)); }
  /// y(tau_i^+), i = 1..N.
  Vector right_limit(int i) const { return states.col(mesh.right_point(i)); }
  /// Level used by point p: a_i for every point of interval i.
  const Vector& level_at(int p) const { return controls[mesh.interval_of(p)]; }
  /// Single-valued states at the distinct mesh nodes; at impulse nodes the
  /// right limit is reported.
  std::vector<Vector> node_values() const;
};

/// Impulse history (tau_1..tau_i, y(tau_1^-)..y(tau_i^-), a_0..a_i) seen by
/// every point of interval i. Built from a trajectory.
class HistoryTable {
 public:
  HistoryTable(const PiecewiseTrajectory& trajectory);
  ImpulseHistory at_interval(int i) const;
  ImpulseHistory at_point(int p) const { return at_interval(mesh_->interval_of(p)); }

 private:
  const Mesh* mesh_;
  std::vector<double> times_;
  std::vector<Vector> left_;
  std::vector<Vector> levels_;
};

TerminalArgs terminal_args(const PiecewiseTrajectory& trajectory, std::vector<Vector>& storage);

/// Trapezoid solution of the state equation, marching forward in time. The
/// implicit diagonal term at each point is resolved by fixed-point iteration.
PiecewiseTrajectory solve_state(const ProblemSpec& problem, const ImpulseSchedule& schedule,
                                const ControlVector& controls, const Mesh& mesh,
                                const SolveOptions& options = {});

/// Norms of (y(tau_i^+) - y(tau_i^-)) - [g with i impulses - g with i-1].
std::vector<double> jump_residual(const ProblemSpec& problem, const PiecewiseTrajectory& trajectory);

double evaluate_cost(const ProblemSpec& problem, const PiecewiseTrajectory& trajectory);

/// Solve and evaluate in one call.
double solve_cost(const ProblemSpec& problem, const ImpulseSchedule& schedule,
                  const ControlVector& controls, int points_per_interval,
                  const SolveOptions& options = {});

}  // namespace impvo
