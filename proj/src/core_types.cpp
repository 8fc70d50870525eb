#include "impvo/core_types.hpp"

#include <cmath>
#include <limits>
#include <sstream>

namespace impvo {

bool ControlBox::contains(const Vector& a) const {
  if (a.size() != lower.size()) return false;
  for (Eigen::Index k = 0; k < a.size(); ++k) {
    if (!(a[k] >= lower[k] && a[k] <= upper[k])) return false;
  }
  return true;
}

Vector ControlBox::clamp(const Vector& a) const { return a.cwiseMax(lower).cwiseMin(upper); }

const ControlBox& ProblemSpec::box(int level) const {
  if (control_boxes.empty()) throw std::logic_error("problem has no control boxes");
  if (control_boxes.size() == 1) return control_boxes.front();
  if (level < 0 || level >= static_cast<int>(control_boxes.size()))
    throw std::out_of_range("control box index " + std::to_string(level));
  return control_boxes[level];
}

double ImpulseSchedule::boundary(int i) const {
  if (i == 0) return 0.0;
  if (i == size() + 1) return horizon;
  return times.at(i - 1);
}

std::vector<ScheduleViolation> validate_schedule(std::span<const double> times, double horizon,
                                                 double min_gap) {
  if (!(horizon > 0.0) || !std::isfinite(horizon))
    throw std::invalid_argument("horizon must be a positive finite number");
  if (!(min_gap > 0.0) || !std::isfinite(min_gap))
    throw std::invalid_argument("min_gap must be a positive finite number");
  for (std::size_t i = 0; i < times.size(); ++i) {
    if (!std::isfinite(times[i]))
      throw std::invalid_argument("impulse time " + std::to_string(i + 1) + " is not finite");
  }

  // A few ulps of slack so that projected schedules sitting exactly on a
  // constraint are not rejected because of rounding in tau_{i+1} - tau_i.
  const double slack = 8.0 * std::numeric_limits<double>::epsilon() * horizon;
  std::vector<ScheduleViolation> out;
  auto fmt = [](double v) {
    std::ostringstream os;
    os << v;
    return os.str();
  };
  const int n = static_cast<int>(times.size());
  if (n == 0) return out;
  if (times[0] < min_gap - slack)
    out.push_back({1, "tau_1 = " + fmt(times[0]) + " < min_gap " + fmt(min_gap)});
  for (int i = 0; i + 1 < n; ++i) {
    const double gap = times[i + 1] - times[i];
    if (gap < min_gap - slack) {
      out.push_back({i + 2, "tau_" + std::to_string(i + 2) + " - tau_" + std::to_string(i + 1) +
                                " = " + fmt(gap) + " < min_gap " + fmt(min_gap)});
    }
  }
  if (times[n - 1] > horizon - min_gap + slack) {
    out.push_back({n, "tau_N = " + fmt(times[n - 1]) + " > T - min_gap = " +
                          fmt(horizon - min_gap)});
  }
  return out;
}

void require_valid_schedule(const ImpulseSchedule& schedule) {
  auto v = validate_schedule(schedule.times, schedule.horizon, schedule.min_gap);
  if (v.empty()) return;
  std::string msg = "invalid impulse schedule:";
  for (const auto& e : v) msg += " [" + e.message + "]";
  throw std::invalid_argument(msg);
}

std::vector<std::string> validate_controls(const ProblemSpec& problem, int impulse_count,
                                           const ControlVector& controls) {
  std::vector<std::string> out;
  if (static_cast<int>(controls.size()) != impulse_count + 1) {
    out.push_back("expected " + std::to_string(impulse_count + 1) + " control levels, got " +
                  std::to_string(controls.size()));
    return out;
  }
  if (problem.control_boxes.size() > 1 &&
      static_cast<int>(problem.control_boxes.size()) != impulse_count + 1) {
    out.push_back("problem defines " + std::to_string(problem.control_boxes.size()) +
                  " control boxes for " + std::to_string(impulse_count + 1) + " levels");
    return out;
  }
  for (int i = 0; i <= impulse_count; ++i) {
    if (controls[i].size() != problem.control_dim) {
      out.push_back("level a_" + std::to_string(i) + " has dimension " +
                    std::to_string(controls[i].size()));
    } else if (!problem.box(i).contains(controls[i])) {
      out.push_back("level a_" + std::to_string(i) + " lies outside its control box");
    }
  }
  return out;
}

const Vector& control_at(const ImpulseSchedule& schedule, const ControlVector& controls, double t,
                         Side side) {
  if (!(t >= 0.0 && t <= schedule.horizon))
    throw std::out_of_range("time outside [0, T]");
  if (static_cast<int>(controls.size()) != schedule.size() + 1)
    throw std::invalid_argument("control count does not match the schedule");
  int level = 0;
  for (int i = 0; i < schedule.size(); ++i) {
    const double tau = schedule.times[i];
    if (t > tau || (t == tau && side == Side::Right)) level = i + 1;
  }
  return controls[level];
}

}  // namespace impvo
