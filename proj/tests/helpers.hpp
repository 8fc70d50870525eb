#pragma once

#include "impvo/core_types.hpp"
#include "impvo/state_solver.hpp"

namespace testing_support {

using impvo::ImpulseHistory;
using impvo::Matrix;
using impvo::Vector;

inline Vector s1(double v) { return Vector::Constant(1, v); }
inline Matrix m1(double v) { return Matrix::Constant(1, 1, v); }

// Scalar problem with every callback identically zero; tests overwrite the
// pieces they need.
inline impvo::ProblemSpec zero_problem(double horizon = 1.0) {
  impvo::ProblemSpec s;
  s.horizon = horizon;
  s.y0 = [](double) { return s1(0.0); };
  s.y0_dot = s.y0;
  s.f = [](double, double, const Vector&, const Vector&) { return s1(0.0); };
  s.f_y = [](double, double, const Vector&, const Vector&) { return m1(0.0); };
  s.f_a = s.f_y;
  s.f_t1 = s.f;
  s.g = [](double, const ImpulseHistory&) { return s1(0.0); };
  s.g_t = s.g;
  s.g_tau = [](double, const ImpulseHistory&, int) { return s1(0.0); };
  s.g_y = [](double, const ImpulseHistory&, int) { return m1(0.0); };
  s.g_a = s.g_y;
  s.F = [](double, const Vector&, const Vector&) { return 0.0; };
  s.F_y = [](double, const Vector&, const Vector&) { return s1(0.0); };
  s.F_a = s.F_y;
  s.control_boxes = {impvo::ControlBox{s1(-10.0), s1(10.0)}};
  return s;
}

inline impvo::ControlVector levels(std::initializer_list<double> v) {
  impvo::ControlVector out;
  for (double x : v) out.push_back(s1(x));
  return out;
}

inline impvo::PiecewiseTrajectory solve(const impvo::ProblemSpec& s, std::vector<double> tau,
                                        const impvo::ControlVector& a, int M) {
  impvo::ImpulseSchedule sched{std::move(tau), s.horizon, 1e-3};
  return impvo::solve_state(s, sched, a, impvo::Mesh(sched, M));
}

}  // namespace testing_support
