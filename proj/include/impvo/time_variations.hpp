#pragma once

// Sensitivities of the state with respect to a single impulse instant tau_j.

#include "impvo/core_types.hpp"
#include "impvo/linear_resolvent.hpp"
#include "impvo/state_solver.hpp"

#include <type_traits>
#include <vector>

namespace impvo {

/// Linearization of a problem around a solved trajectory, shared by every
/// sensitivity computation.
struct LinearizedModel {
  LinearImpulsiveSystem system;
  LambdaArray lambda;  // size N+1
  GammaArray gamma;    // size N+1
  DiscreteResolvent resolvent;

  const Mesh& mesh() const { return system.mesh; }
};

LinearizedModel linearize_model(const ProblemSpec& problem, const PiecewiseTrajectory& trajectory);

/// Omega phi at tau_i: phi(tau_i, y(tau_i^-), a_{i-1}) - phi(tau_i, y(tau_i^+), a_i).
template <class Phi>
auto oscillation(const Phi& phi, int i, const PiecewiseTrajectory& trajectory) {
  using Result = std::decay_t<std::invoke_result_t<const Phi&, double, const Vector&, const Vector&>>;
  const double t = trajectory.schedule.times[i - 1];
  const Vector left = trajectory.left_limit(i);
  const Vector right = trajectory.right_limit(i);
  return Result(phi(t, left, trajectory.controls[i - 1]) - phi(t, right, trajectory.controls[i]));
}

/// D_j = d/dtau_j y(tau_j^-): the left-limit velocity of the state at tau_j.
Vector total_derivative(const ProblemSpec& problem, const PiecewiseTrajectory& trajectory, int j);

/// eta_j at every point; zero on intervals before tau_j.
PointValues eta_j(const ProblemSpec& problem, const PiecewiseTrajectory& trajectory, const Vector& Dj,
                  int j);

PointValues eta_tilde_j(const LinearizedModel& model, const PointValues& eta);

struct VariationBundle {
  int j = 1;
  Vector Dj;
  PointValues eta;
  PointValues eta_tilde;
  /// d y(t_p) / d tau_j at fixed t_p; zero on intervals before tau_j.
  PointValues djy;
  /// left_limits[l-1] = d y(tau_l^-) / d tau_j at fixed tau_l, l = 1..N+1;
  /// zero for l <= j (the moving left limit is described by Dj).
  std::vector<Vector> left_limits;
};

VariationBundle state_variation(const ProblemSpec& problem, const PiecewiseTrajectory& trajectory,
                                const LinearizedModel& model, int j);

/// Residual of the un-lifted variational equation, including the left-limit
/// recursion at tau_l^-, l > j.
double variation_residual(const LinearizedModel& model, const VariationBundle& bundle);

}  // namespace impvo
