#include "impvo/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace impvo {

namespace {

double cost_at(const ProblemSpec& problem, const std::vector<double>& tau, double min_gap,
               const ControlVector& controls, int M, const SolveOptions& options) {
  return solve_cost(problem, ImpulseSchedule{tau, problem.horizon, min_gap}, controls, M, options);
}

bool schedule_ok(const std::vector<double>& tau, double horizon, double min_gap) {
  return validate_schedule(tau, horizon, min_gap).empty();
}

}  // namespace

FdGradient fd_gradient(const ProblemSpec& problem, const ImpulseSchedule& schedule,
                       const ControlVector& controls, int points_per_interval, double h_tau,
                       double h_a, const SolveOptions& options) {
  if (!(h_tau > 0.0) || !(h_a > 0.0)) throw std::invalid_argument("FD steps must be positive");
  const int N = schedule.size();
  const double d = schedule.min_gap;
  FdGradient out{Vector::Zero(N), {}};

  for (int j = 0; j < N; ++j) {
    std::vector<double> up = schedule.times, down = schedule.times;
    up[j] += h_tau;
    down[j] -= h_tau;
    if (!schedule_ok(up, schedule.horizon, d) || !schedule_ok(down, schedule.horizon, d))
      throw std::invalid_argument("tau_" + std::to_string(j + 1) +
                                  " is within h_tau of the schedule constraints");
    const double Jp = cost_at(problem, up, d, controls, points_per_interval, options);
    const double Jm = cost_at(problem, down, d, controls, points_per_interval, options);
    out.tau(j) = (Jp - Jm) / (2.0 * h_tau);
  }

  const double J0 = solve_cost(problem, schedule, controls, points_per_interval, options);
  for (int i = 0; i <= N; ++i) {
    Vector g(problem.control_dim);
    for (int k = 0; k < problem.control_dim; ++k) {
      ControlVector up = controls, down = controls;
      up[i](k) += h_a;
      down[i](k) -= h_a;
      const bool up_ok = problem.box(i).contains(up[i]);
      const bool down_ok = problem.box(i).contains(down[i]);
      if (up_ok && down_ok) {
        g(k) = (cost_at(problem, schedule.times, d, up, points_per_interval, options) -
                cost_at(problem, schedule.times, d, down, points_per_interval, options)) /
               (2.0 * h_a);
      } else if (up_ok) {
        g(k) = (cost_at(problem, schedule.times, d, up, points_per_interval, options) - J0) / h_a;
      } else if (down_ok) {
        g(k) = (J0 - cost_at(problem, schedule.times, d, down, points_per_interval, options)) / h_a;
      } else {
        throw std::invalid_argument("control box of a_" + std::to_string(i) + " is narrower than h_a");
      }
    }
    out.a.push_back(std::move(g));
  }
  return out;
}

std::vector<double> project_schedule(const std::vector<double>& times, double min_gap, double horizon) {
  const int N = static_cast<int>(times.size());
  if (!(min_gap > 0.0) || !(horizon > 0.0)) throw std::invalid_argument("min_gap and horizon must be positive");
  if ((N + 1) * min_gap > horizon)
    throw std::invalid_argument("no schedule of " + std::to_string(N) + " impulses fits with min_gap " +
                                std::to_string(min_gap));
  if (N == 0 || schedule_ok(times, horizon, min_gap)) return times;

  // x_i = tau_i - i*d must be non-decreasing in [0, T - (N+1) d]: isotonic
  // regression by pooling adjacent violators, then clamping.
  std::vector<double> sum, cnt;
  for (int i = 0; i < N; ++i) {
    sum.push_back(times[i] - (i + 1) * min_gap);
    cnt.push_back(1.0);
    while (sum.size() > 1 && sum[sum.size() - 2] / cnt[cnt.size() - 2] > sum.back() / cnt.back()) {
      sum[sum.size() - 2] += sum.back();
      cnt[cnt.size() - 2] += cnt.back();
      sum.pop_back();
      cnt.pop_back();
    }
  }
  const double upper = horizon - (N + 1) * min_gap;
  std::vector<double> out;
  for (std::size_t b = 0; b < sum.size(); ++b) {
    const double x = std::clamp(sum[b] / cnt[b], 0.0, upper);
    for (int k = 0; k < static_cast<int>(cnt[b]); ++k) {
      const int i = static_cast<int>(out.size());
      out.push_back(x + (i + 1) * min_gap);
    }
  }
  return out;
}

ControlVector project_controls(const ProblemSpec& problem, const ControlVector& controls) {
  ControlVector out;
  for (std::size_t i = 0; i < controls.size(); ++i)
    out.push_back(problem.box(static_cast<int>(i)).clamp(controls[i]));
  return out;
}

double projected_tau_gap(const ImpulseSchedule& schedule, const Vector& grad) {
  const int N = schedule.size();
  if (N == 0) return 0.0;
  std::vector<double> moved = schedule.times;
  for (int j = 0; j < N; ++j) moved[j] -= grad(j);
  moved = project_schedule(moved, schedule.min_gap, schedule.horizon);
  double gap = 0.0;
  for (int j = 0; j < N; ++j) gap = std::max(gap, std::abs(moved[j] - schedule.times[j]));
  return gap;
}

OptimizationTrace optimize(const ProblemSpec& problem, const ImpulseSchedule& init_schedule,
                           const ControlVector& init_controls, const OptimizeOptions& options) {
  if (options.max_iters < 0 || !(options.shrink > 0.0 && options.shrink < 1.0) ||
      !(options.sufficient_decrease > 0.0) || !(options.initial_step > 0.0) || options.max_shrinks < 1 ||
      !(options.tau_tol > 0.0) || !(options.vi_tol > 0.0))
    throw std::invalid_argument("invalid optimizer options");
  require_valid_schedule(init_schedule);
  const auto issues = validate_controls(problem, init_schedule.size(), init_controls);
  if (!issues.empty()) throw std::invalid_argument("invalid initial controls: " + issues.front());

  const int M = options.points_per_interval;
  const double d = init_schedule.min_gap;
  const int N = init_schedule.size();
  ImpulseSchedule schedule = init_schedule;
  ControlVector controls = init_controls;
  OptimizationTrace trace;

  for (int it = 0;; ++it) {
    const PiecewiseTrajectory traj = solve_state(problem, schedule, controls, Mesh(schedule, M), options.solve);
    GradientReport rep = compute_gradients(problem, traj);
    const double gap = projected_tau_gap(schedule, rep.dJ_dtau);
    trace.records.push_back(TraceRecord{it, schedule.times, controls, rep.cost, rep.tau_stationarity,
                                        rep.a_vi_residual, gap, 0.0, M});
    const bool tau_done = rep.tau_stationarity < options.tau_tol;
    const bool a_done = rep.a_vi_residual < options.vi_tol;
    const bool blocked = !tau_done && gap < options.tau_tol;
    if ((tau_done && a_done) || (blocked && a_done) || it >= options.max_iters) {
      trace.converged = tau_done && a_done;
      trace.constrained_stop = blocked && a_done;
      trace.final_report = std::move(rep);
      break;
    }

    bool move_tau = true, move_a = true;
    if (options.alternating) {
      const bool tau_can_move = N > 0 && gap >= options.tau_tol;
      move_tau = tau_can_move && (it % 2 == 0 || a_done);
      move_a = !move_tau;
    }

    double step = options.initial_step;
    bool accepted = false;
    for (int k = 0; k < options.max_shrinks; ++k, step *= options.shrink) {
      std::vector<double> tau = schedule.times;
      if (move_tau) {
        for (int j = 0; j < N; ++j) tau[j] -= step * rep.dJ_dtau(j);
        tau = project_schedule(tau, d, schedule.horizon);
      }
      ControlVector a = controls;
      if (move_a) {
        for (std::size_t i = 0; i < a.size(); ++i) a[i] -= step * rep.dJ_da[i];
        a = project_controls(problem, a);
      }
      double predicted = 0.0;
      for (int j = 0; j < N; ++j) predicted += rep.dJ_dtau(j) * (tau[j] - schedule.times[j]);
      for (std::size_t i = 0; i < a.size(); ++i) predicted += rep.dJ_da[i].dot(a[i] - controls[i]);

      double J;
      try {
        J = cost_at(problem, tau, d, a, M, options.solve);
      } catch (const SolverError&) {
        continue;
      }
      if (predicted < 0.0 && J < rep.cost && J <= rep.cost + options.sufficient_decrease * predicted) {
        schedule.times = tau;
        controls = a;
        trace.records.back().step = step;
        accepted = true;
        break;
      }
    }
    if (!accepted) {
      throw LineSearchStall("line search found no decrease after " + std::to_string(options.max_shrinks) +
                                " step reductions at iteration " + std::to_string(it),
                            it, std::move(rep));
    }
  }
  trace.schedule = schedule;
  trace.controls = controls;
  return trace;
}

GridResult grid_search(const ProblemSpec& problem, double min_gap, int tau_points, int a_points,
                       int points_per_interval, const SolveOptions& options) {
  if (problem.control_dim != 1) throw std::invalid_argument("grid search needs scalar controls");
  if (tau_points < 2 || a_points < 2) throw std::invalid_argument("grid needs at least 2 points per axis");
  const double T = problem.horizon;
  auto axis = [](double lo, double hi, int count, int k) { return lo + (hi - lo) * k / (count - 1); };

  // J[t][a0][a1]
  const int A = a_points;
  std::vector<double> J(static_cast<std::size_t>(tau_points) * A * A);
  auto idx = [&](int t, int i, int k) { return (static_cast<std::size_t>(t) * A + i) * A + k; };
  auto point = [&](int t, int i, int k) {
    std::vector<double> tau{axis(min_gap, T - min_gap, tau_points, t)};
    ControlVector a{Vector::Constant(1, axis(problem.box(0).lower(0), problem.box(0).upper(0), A, i)),
                    Vector::Constant(1, axis(problem.box(1).lower(0), problem.box(1).upper(0), A, k))};
    return std::make_pair(tau, a);
  };

  GridResult best;
  best.cost = std::numeric_limits<double>::infinity();
  int bt = 0, bi = 0, bk = 0;
  for (int t = 0; t < tau_points; ++t)
    for (int i = 0; i < A; ++i)
      for (int k = 0; k < A; ++k) {
        auto [tau, a] = point(t, i, k);
        const double v = cost_at(problem, tau, min_gap, a, points_per_interval, options);
        J[idx(t, i, k)] = v;
        ++best.evaluations;
        if (v < best.cost) {
          best.cost = v;
          bt = t, bi = i, bk = k;
        }
      }
  auto [tau, a] = point(bt, bi, bk);
  best.tau = tau;
  best.a = a;
  for (int dt = -1; dt <= 1; ++dt)
    for (int di = -1; di <= 1; ++di)
      for (int dk = -1; dk <= 1; ++dk) {
        const int t = bt + dt, i = bi + di, k = bk + dk;
        if (t < 0 || t >= tau_points || i < 0 || i >= A || k < 0 || k >= A) continue;
        best.cell_variation = std::max(best.cell_variation, std::abs(J[idx(t, i, k)] - best.cost));
      }
  return best;
}

}  // namespace impvo
