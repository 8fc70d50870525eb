#pragma once

#include "impvo/core_types.hpp"

#include <vector>

namespace impvo {

/// Per-interval uniform mesh with every impulse instant as a node.
///
/// Values are stored per *point*: interval i (0..N) owns the M+1 points
/// t = tau_i + m*h_i, m = 0..M, both ends included. An impulse node therefore
/// appears twice, as the last point of interval i-1 (the left limit) and the
/// first point of interval i (the right limit). The distinct `nodes()` are the
/// (N+1)*M + 1 time values.
///
/// Quadrature weights. Every integral in the library is a trapezoid sum over
/// points. For a point p in interval i at offset m:
///  - `forward_weight(p, q)`  weights q in  int_0^{t_p}
///  - `trapezoid_weight(q)`   weights q in  int_0^T
///  - `adjoint_weight(q, p)`  weights p in  int_{t_q}^T, the transpose of the
///    forward rule with respect to the trapezoid inner product
///  - `tail_weight(q, p)`     weights p in  int_{t_q}^T, plain trapezoid
/// The adjoint rule differs from the plain tail rule only in the self-weight
/// at interval end points, where the forward scheme is implicit.
class Mesh {
 public:
  Mesh() = default;
  Mesh(const ImpulseSchedule& schedule, int points_per_interval);

  int impulse_count() const { return static_cast<int>(boundaries_.size()) - 2; }
  int interval_count() const { return impulse_count() + 1; }
  int points_per_interval() const { return M_; }
  int point_count() const { return interval_count() * (M_ + 1); }
  double horizon() const { return boundaries_.back(); }

  int point(int interval, int offset) const { return interval * (M_ + 1) + offset; }
  int interval_of(int p) const { return p / (M_ + 1); }
  int offset_of(int p) const { return p % (M_ + 1); }
  double time(int p) const { return times_[p]; }
  double step(int interval) const { return steps_[interval]; }
  /// tau_i with tau_0 = 0 and tau_{N+1} = T.
  double boundary(int i) const { return boundaries_[i]; }
  bool is_interval_start(int p) const { return offset_of(p) == 0; }
  bool is_interval_end(int p) const { return offset_of(p) == M_; }

  /// Point holding y(tau_l^-), l = 1..N+1 (l = N+1 is the final point T).
  int left_point(int l) const { return point(l - 1, M_); }
  /// Point holding y(tau_i^+), i = 1..N.
  int right_point(int i) const { return point(i, 0); }

  const std::vector<double>& nodes() const { return nodes_; }
  /// impulse_node_index()[i-1] is the node index of tau_i.
  const std::vector<int>& impulse_node_index() const { return impulse_nodes_; }

  double trapezoid_weight(int q) const;
  double forward_weight(int p, int q) const;
  double adjoint_weight(int q, int p) const;
  double tail_weight(int q, int p) const;
  /// Weight of the middle point r in the kernel composition
  /// (X o Y)(t_p, s_q) = int X(t_p, t_r) Y(t_r, s_q) dt_r that is exact for
  /// the discrete resolvent; equals forward_weight(p, r) except at r == q.
  double composition_weight(int p, int r, int q) const;

 private:
  int M_ = 2;
  std::vector<double> boundaries_;
  std::vector<double> steps_;
  std::vector<double> times_;
  std::vector<double> nodes_;
  std::vector<int> impulse_nodes_;
};

/// Builds the mesh; throws std::invalid_argument for M < 2 or an invalid
/// schedule.
Mesh build_mesh(const ImpulseSchedule& schedule, int points_per_interval);

}  // namespace impvo
