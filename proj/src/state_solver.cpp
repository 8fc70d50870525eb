#include "impvo/state_solver.hpp"

#include <cmath>
#include <string>

namespace impvo {

std::vector<Vector> PiecewiseTrajectory::node_values() const {
  std::vector<Vector> out;
  out.reserve(mesh.nodes().size());
  const int M = mesh.points_per_interval();
  for (int i = 0; i < mesh.interval_count(); ++i) {
    for (int m = 0; m < M; ++m) out.push_back(states.col(mesh.point(i, m)));
  }
  out.push_back(states.col(mesh.point_count() - 1));
  return out;
}

HistoryTable::HistoryTable(const PiecewiseTrajectory& trajectory) : mesh_(&trajectory.mesh) {
  const int N = mesh_->impulse_count();
  times_ = trajectory.schedule.times;
  left_.reserve(N);
  for (int l = 1; l <= N; ++l) left_.push_back(trajectory.left_limit(l));
  levels_ = trajectory.controls;
}

ImpulseHistory HistoryTable::at_interval(int i) const {
  return ImpulseHistory{std::span<const double>(times_.data(), i),
                        std::span<const Vector>(left_.data(), i),
                        std::span<const Vector>(levels_.data(), i + 1)};
}

TerminalArgs terminal_args(const PiecewiseTrajectory& trajectory, std::vector<Vector>& storage) {
  const int N = trajectory.mesh.impulse_count();
  storage.clear();
  for (int l = 1; l <= N + 1; ++l) storage.push_back(trajectory.left_limit(l));
  return TerminalArgs{trajectory.schedule.times, storage, trajectory.controls};
}

namespace {

void check_problem_shapes(const ProblemSpec& problem, const ImpulseSchedule& schedule,
                          const ControlVector& controls, const Mesh& mesh) {
  if (problem.state_dim < 1 || problem.control_dim < 1)
    throw std::invalid_argument("state and control dimensions must be positive");
  if (std::abs(schedule.horizon - problem.horizon) > 0.0)
    throw std::invalid_argument("schedule horizon differs from the problem horizon");
  if (mesh.impulse_count() != schedule.size())
    throw std::invalid_argument("mesh was built for a different schedule");
  for (int i = 1; i <= schedule.size(); ++i) {
    if (mesh.boundary(i) != schedule.times[i - 1])
      throw std::invalid_argument("mesh was built for a different schedule");
  }
  auto issues = validate_controls(problem, schedule.size(), controls);
  if (!issues.empty()) throw std::invalid_argument("invalid controls: " + issues.front());
}

}  // namespace

PiecewiseTrajectory solve_state(const ProblemSpec& problem, const ImpulseSchedule& schedule,
                                const ControlVector& controls, const Mesh& mesh,
                                const SolveOptions& options) {
  if (!(options.fp_tol > 0.0) || options.fp_max_iter < 1)
    throw std::invalid_argument("fp_tol must be > 0 and fp_max_iter >= 1");
  require_valid_schedule(schedule);
  check_problem_shapes(problem, schedule, controls, mesh);

  const int n = problem.state_dim;
  const int P = mesh.point_count();
  PiecewiseTrajectory traj{mesh, schedule, controls, Matrix::Zero(n, P)};

  std::vector<double> times;
  std::vector<Vector> left;
  for (int p = 0; p < P; ++p) {
    const int i = mesh.interval_of(p);
    const double t = mesh.time(p);
    const Vector& a = controls[i];

    if (mesh.is_interval_start(p) && i > 0) {
      times.push_back(schedule.times[i - 1]);
      left.push_back(traj.states.col(mesh.left_point(i)));
    }
    const ImpulseHistory hist{times, left, std::span<const Vector>(controls.data(), i + 1)};

    Vector rhs = problem.y0(t) + problem.g(t, hist);
    for (int q = 0; q < p; ++q) {
      const double w = mesh.forward_weight(p, q);
      if (w == 0.0) continue;
      rhs.noalias() += w * problem.f(t, mesh.time(q), traj.states.col(q), traj.level_at(q));
    }

    const double wd = mesh.forward_weight(p, p);
    if (wd == 0.0) {
      traj.states.col(p) = rhs;
      continue;
    }
    Vector y = p > 0 ? Vector(traj.states.col(p - 1)) : rhs;
    bool converged = false;
    for (int it = 0; it < options.fp_max_iter; ++it) {
      Vector next = rhs + wd * problem.f(t, t, y, a);
      const double change = (next - y).lpNorm<Eigen::Infinity>();
      y = std::move(next);
      if (!std::isfinite(change))
        throw SolverError("state iteration diverged at mesh point " + std::to_string(p), p);
      if (change <= options.fp_tol) {
        converged = true;
        break;
      }
    }
    if (!converged) {
      throw SolverError("fixed-point iteration did not converge at mesh point " +
                            std::to_string(p) + " (t = " + std::to_string(t) +
                            "); refine the mesh",
                        p);
    }
    traj.states.col(p) = y;
  }
  return traj;
}

std::vector<double> jump_residual(const ProblemSpec& problem, const PiecewiseTrajectory& trajectory) {
  const int N = trajectory.mesh.impulse_count();
  HistoryTable hist(trajectory);
  std::vector<double> out;
  for (int i = 1; i <= N; ++i) {
    const double tau = trajectory.schedule.times[i - 1];
    const Vector jump = trajectory.right_limit(i) - trajectory.left_limit(i);
    const Vector gdiff = problem.g(tau, hist.at_interval(i)) - problem.g(tau, hist.at_interval(i - 1));
    out.push_back((jump - gdiff).norm());
  }
  return out;
}

double evaluate_cost(const ProblemSpec& problem, const PiecewiseTrajectory& trajectory) {
  const Mesh& mesh = trajectory.mesh;
  double J = 0.0;
  for (int p = 0; p < mesh.point_count(); ++p) {
    J += mesh.trapezoid_weight(p) *
         problem.F(mesh.time(p), trajectory.states.col(p), trajectory.level_at(p));
  }
  if (problem.G) {
    std::vector<Vector> storage;
    J += problem.G(terminal_args(trajectory, storage));
  }
  return J;
}

double solve_cost(const ProblemSpec& problem, const ImpulseSchedule& schedule,
                  const ControlVector& controls, int points_per_interval,
                  const SolveOptions& options) {
  const Mesh mesh(schedule, points_per_interval);
  return evaluate_cost(problem, solve_state(problem, schedule, controls, mesh, options));
}

}  // namespace impvo
