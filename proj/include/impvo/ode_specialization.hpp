#pragma once

// Impulsive controlled ODEs
//
//   y' = f(t, y, a_i) between impulses,  y(tau_i^+) = I(tau_i, y(tau_i^-), a_{i-1}),
//
// embedded in the Volterra framework, plus the reduced gradient formulas
// written with psi(t) = int_t^T p and rho_l(t) = int_t^{tau_l} R(tau_l^-, s) ds.

#include "impvo/core_types.hpp"
#include "impvo/linear_resolvent.hpp"
#include "impvo/state_solver.hpp"

#include <vector>

namespace impvo {

struct OdeProblemSpec {
  using DynFn = std::function<Vector(double, const Vector&, const Vector&)>;
  using DynJacFn = std::function<Matrix(double, const Vector&, const Vector&)>;

  /// Replacement: I is the post-jump state. Increment: I is added to y(tau^-).
  enum class JumpConvention { Replacement, Increment };

  int state_dim = 1;
  int control_dim = 1;
  double horizon = 1.0;
  Vector y0;

  DynFn f;
  DynJacFn f_y;
  DynJacFn f_a;

  DynFn jump;
  DynFn jump_tau;
  DynJacFn jump_y;
  DynJacFn jump_a;
  JumpConvention convention = JumpConvention::Replacement;

  ProblemSpec::RunningFn F;
  ProblemSpec::RunningGradFn F_y;
  ProblemSpec::RunningGradFn F_a;
  ProblemSpec::TerminalFn G;
  ProblemSpec::TerminalGradFn G_grad;
  std::vector<ControlBox> control_boxes;

  /// Jump increment y(tau^+) - y(tau^-) and its partials.
  Vector increment(double tau, const Vector& y, const Vector& a) const;
  Vector increment_tau(double tau, const Vector& y, const Vector& a) const;
  Matrix increment_y(double tau, const Vector& y, const Vector& a) const;
  Matrix increment_a(double tau, const Vector& y, const Vector& a) const;
};

/// Volterra form: f(t, s, y, a) = f_ode(s, y, a), g = sum of jump increments.
ProblemSpec lift_ode_problem(const OdeProblemSpec& ode);

/// psi at every point (trapezoid tail integral of p); psi(T) = 0 and psi is
/// continuous, so the left and right points of an impulse agree.
PointValues psi_costate(const Mesh& mesh, const PointValues& p);

/// Residual of the backward equation for psi at interior points of each
/// interval, with psi' = -p.
double psi_residual(const OdeProblemSpec& ode, const PiecewiseTrajectory& trajectory,
                    const PointValues& p, const PointValues& psi);

struct RhoMatrix {
  Mesh mesh;
  int n = 1;
  /// rows[l-1]: n x (left_point(l)+1)*n, block q = rho_l(t_q).
  std::vector<Matrix> rows;

  Matrix at(int l, int q) const { return rows[l - 1].middleCols(q * n, n); }
};

RhoMatrix rho_matrix(const DiscreteResolvent& resolvent);

/// Residual of the backward equation for rho_l at interior points before tau_l.
double rho_residual(const OdeProblemSpec& ode, const PiecewiseTrajectory& trajectory,
                    const DiscreteResolvent& resolvent, const RhoMatrix& rho);

/// Lambda built from the jump partials: Lambda_ij = I_y at tau_j for i > j.
LambdaArray ode_lambda(const OdeProblemSpec& ode, const PiecewiseTrajectory& trajectory);

Vector ode_total_derivative(const OdeProblemSpec& ode, const PiecewiseTrajectory& trajectory, int j);

Vector ode_grad_tau(const OdeProblemSpec& ode, const PiecewiseTrajectory& trajectory,
                    const PointValues& psi, const RhoMatrix& rho);

double ode_stationarity(const Vector& grad);

}  // namespace impvo
