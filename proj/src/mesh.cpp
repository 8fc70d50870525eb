#include "impvo/mesh.hpp"

#include <stdexcept>

namespace impvo {

Mesh::Mesh(const ImpulseSchedule& schedule, int points_per_interval) : M_(points_per_interval) {
  if (points_per_interval < 2) throw std::invalid_argument("points_per_interval must be >= 2");
  require_valid_schedule(schedule);

  const int N = schedule.size();
  boundaries_.resize(N + 2);
  for (int i = 0; i <= N + 1; ++i) boundaries_[i] = schedule.boundary(i);

  steps_.resize(N + 1);
  times_.resize((N + 1) * (M_ + 1));
  nodes_.reserve((N + 1) * M_ + 1);
  for (int i = 0; i <= N; ++i) {
    const double a = boundaries_[i];
    const double b = boundaries_[i + 1];
    steps_[i] = (b - a) / M_;
    for (int m = 0; m <= M_; ++m) {
      // End points are copied, not recomputed, so impulse instants are exact.
      const double t = m == 0 ? a : (m == M_ ? b : a + m * steps_[i]);
      times_[point(i, m)] = t;
      if (m < M_) nodes_.push_back(t);
    }
    if (i > 0) impulse_nodes_.push_back(i * M_);
  }
  nodes_.push_back(boundaries_.back());
}

Mesh build_mesh(const ImpulseSchedule& schedule, int points_per_interval) {
  return Mesh(schedule, points_per_interval);
}

double Mesh::trapezoid_weight(int q) const {
  const int m = offset_of(q);
  const double h = steps_[interval_of(q)];
  return (m == 0 || m == M_) ? 0.5 * h : h;
}

double Mesh::forward_weight(int p, int q) const {
  const int ip = interval_of(p);
  const int iq = interval_of(q);
  if (iq < ip) return trapezoid_weight(q);
  if (iq > ip) return 0.0;
  const int mp = offset_of(p);
  const int mq = offset_of(q);
  if (mq > mp || mp == 0) return 0.0;
  const double h = steps_[ip];
  return (mq == 0 || mq == mp) ? 0.5 * h : h;
}

double Mesh::adjoint_weight(int q, int p) const {
  const double w = forward_weight(p, q);
  if (w == 0.0) return 0.0;
  return trapezoid_weight(p) * w / trapezoid_weight(q);
}

double Mesh::tail_weight(int q, int p) const {
  const int iq = interval_of(q);
  const int ip = interval_of(p);
  if (ip > iq) return trapezoid_weight(p);
  if (ip < iq) return 0.0;
  const int mq = offset_of(q);
  const int mp = offset_of(p);
  if (mp < mq || mq == M_) return 0.0;
  const double h = steps_[ip];
  return (mp == mq || mp == M_) ? 0.5 * h : h;
}

double Mesh::composition_weight(int p, int r, int q) const {
  if (r == q) return forward_weight(q, q);
  if (r < q) return 0.0;
  return forward_weight(p, r);
}

}  // namespace impvo
