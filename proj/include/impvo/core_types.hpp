#pragma once

// Problem data model for controlled impulsive Volterra equations
//
//   y(t) = y0(t) + sum_i int_{tau_i}^{t ^ tau_{i+1}} f(t, s, y(s), a_i) ds
//               + g(t, tau_(t), y_(t), a_(t))
//   J    = sum_i int_{tau_i}^{tau_{i+1}} F(t, y(t), a_i) dt + G(tau, y, a)
//
// with piecewise-constant control u(t) = a_i on (tau_i, tau_{i+1}).

#include <Eigen/Dense>

#include <functional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace impvo {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Control levels a_0..a_N, one vector in R^m per inter-impulse interval.
using ControlVector = std::vector<Vector>;

/// Arguments of the impulse aggregate g at a time t: the impulse times
/// strictly before t, the state left limits at those times, and the control
/// levels a_0..a_k of every interval that has started (one more entry than
/// `times`).
struct ImpulseHistory {
  std::span<const double> times;
  std::span<const Vector> left_limits;
  std::span<const Vector> levels;
};

/// Arguments of the terminal/impulse cost G: all N impulse times, the N+1
/// left limits y(tau_1^-)..y(tau_{N+1}^-) (tau_{N+1} = T) and all N+1 levels.
struct TerminalArgs {
  std::span<const double> times;
  std::span<const Vector> left_limits;
  std::span<const Vector> levels;
};

/// Partials of G. `tau[j]`, `y[l]`, `a[i]` follow the TerminalArgs indexing;
/// gradients of scalars are stored as column vectors.
struct TerminalGradient {
  Vector tau;
  std::vector<Vector> y;
  std::vector<Vector> a;
};

struct ControlBox {
  Vector lower;
  Vector upper;

  bool contains(const Vector& a) const;
  Vector clamp(const Vector& a) const;
};

/// User-supplied dynamics, costs and their partial derivatives.
///
/// Index conventions for the g-partials: `g_tau(t, h, j)` and `g_y(t, h, j)`
/// differentiate with respect to h.times[j] / h.left_limits[j] (impulse j+1);
/// `g_a(t, h, i)` with respect to h.levels[i] (level a_i). `g_t` and `f_t1`
/// differentiate with respect to the first time argument.
struct ProblemSpec {
  using TimeFn = std::function<Vector(double)>;
  using KernelFn = std::function<Vector(double, double, const Vector&, const Vector&)>;
  using KernelJacFn = std::function<Matrix(double, double, const Vector&, const Vector&)>;
  using JumpFn = std::function<Vector(double, const ImpulseHistory&)>;
  using JumpPartialFn = std::function<Vector(double, const ImpulseHistory&, int)>;
  using JumpJacFn = std::function<Matrix(double, const ImpulseHistory&, int)>;
  using RunningFn = std::function<double(double, const Vector&, const Vector&)>;
  using RunningGradFn = std::function<Vector(double, const Vector&, const Vector&)>;
  using TerminalFn = std::function<double(const TerminalArgs&)>;
  using TerminalGradFn = std::function<TerminalGradient(const TerminalArgs&)>;

  int state_dim = 1;
  int control_dim = 1;
  double horizon = 1.0;

  TimeFn y0;
  TimeFn y0_dot;

  KernelFn f;
  KernelJacFn f_y;
  KernelJacFn f_a;
  KernelFn f_t1;

  JumpFn g;
  JumpFn g_t;
  JumpPartialFn g_tau;
  JumpJacFn g_y;
  JumpJacFn g_a;

  RunningFn F;
  RunningGradFn F_y;
  RunningGradFn F_a;

  TerminalFn G;
  TerminalGradFn G_grad;

  /// One box per level, or a single box shared by every level.
  std::vector<ControlBox> control_boxes;

  const ControlBox& box(int level) const;
};

/// Impulse instants tau_1 < ... < tau_N inside (0, T), kept at least
/// `min_gap` apart from each other and from both ends of the horizon.
struct ImpulseSchedule {
  std::vector<double> times;
  double horizon = 1.0;
  double min_gap = 1e-3;

  int size() const { return static_cast<int>(times.size()); }
  /// tau_i with the sentinels tau_0 = 0 and tau_{N+1} = T.
  double boundary(int i) const;
};

struct ScheduleViolation {
  int index;  // 1-based impulse index the constraint is attached to
  std::string message;
};

/// Lists every violated schedule constraint; an empty result means the
/// schedule lies in the admissible set.
std::vector<ScheduleViolation> validate_schedule(std::span<const double> times, double horizon,
                                                 double min_gap);

/// Throws std::invalid_argument listing all violations.
void require_valid_schedule(const ImpulseSchedule& schedule);

/// Checks control count, dimensions and box membership.
std::vector<std::string> validate_controls(const ProblemSpec& problem, int impulse_count,
                                           const ControlVector& controls);

enum class Side { Left, Right };

/// Level active at t. At an impulse instant the left variant returns
/// a_{i-1} and the right variant a_i; elsewhere both agree.
const Vector& control_at(const ImpulseSchedule& schedule, const ControlVector& controls, double t,
                         Side side = Side::Right);

}  // namespace impvo
