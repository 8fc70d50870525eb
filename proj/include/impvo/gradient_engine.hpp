#pragma once

// Adjoint gradients of J with respect to the impulse instants and the
// control levels.

#include "impvo/core_types.hpp"
#include "impvo/linear_resolvent.hpp"
#include "impvo/state_solver.hpp"
#include "impvo/time_variations.hpp"

#include <vector>

namespace impvo {

/// F_y at every point (row gradients stored as columns).
PointValues running_cost_gradient(const ProblemSpec& problem, const PiecewiseTrajectory& trajectory);

/// G partials at the trajectory; zeros when the problem has no G.
TerminalGradient terminal_gradient(const ProblemSpec& problem, const PiecewiseTrajectory& trajectory);

/// p(t) = F_y(t) + int_t^T F_y(s) R(s,t) ds. One global co-state serves every
/// impulse index.
PointValues costate_p(const ProblemSpec& problem, const PiecewiseTrajectory& trajectory,
                      const LinearizedModel& model);

/// Residual of p in the adjoint equation with the original kernel and
/// impulse couplings.
double costate_p_residual(const ProblemSpec& problem, const PiecewiseTrajectory& trajectory,
                          const LinearizedModel& model, const PointValues& p);

/// h(t_q, y, a) = F(t_q, y, a) + int_{t_q}^T p(s) f(s, t_q, y, a) ds.
double hamiltonian_h(const ProblemSpec& problem, const PiecewiseTrajectory& trajectory,
                     const PointValues& p, int q, const Vector& y, const Vector& a);

/// Omega h at tau_j, evaluated from the Hamiltonian at the right-limit point.
double hamiltonian_jump(const ProblemSpec& problem, const PiecewiseTrajectory& trajectory,
                        const PointValues& p, int j);

/// rows[l-1] is the block row R(tau_l^-, s_q), q = 0..left_point(l), l = 1..N+1.
std::vector<Matrix> resolvent_rows_at_impulses(const LinearizedModel& model);

/// Max residual of the resolvent identity on the rows at tau_l^-.
double resolvent_rows_residual(const LinearizedModel& model, const std::vector<Matrix>& rows);

struct TauGradientTerms {
  double hamiltonian_jump = 0.0;    // Omega h_j
  double impulse_forcing = 0.0;     // int p (g_tau + g_y D_j)
  double explicit_tau = 0.0;        // G_tau_j
  double moving_left_limit = 0.0;   // G_y_j D_j
  double downstream_limits = 0.0;   // sum_{l>j} G_y_l d y(tau_l^-)
  double lift_correction = 0.0;     // int p (etatilde_j - eta_j)
  double total() const;
};

struct TauGradient {
  Vector value;
  std::vector<TauGradientTerms> terms;
};

TauGradient grad_tau(const ProblemSpec& problem, const PiecewiseTrajectory& trajectory,
                     const LinearizedModel& model, const PointValues& p);

/// Max-norm of the impulse-time gradient.
double stationarity_tau_residual(const Vector& grad);

/// Control co-state phi.
PointValues costate_phi(const ProblemSpec& problem, const PiecewiseTrajectory& trajectory,
                        const LinearizedModel& model);

double costate_phi_residual(const ProblemSpec& problem, const PiecewiseTrajectory& trajectory,
                            const LinearizedModel& model, const PointValues& phi);

struct ControlGradientTerms {
  Vector kernel;           // -int int phi f_a
  Vector impulse;          // -int phi g_a
  Vector terminal;         // G_a_i
  Vector running;          // int F_a
  Vector coupled_terminal; // G_y coupled through I + Gamma
  Vector lift_correction;  // impulse-coupling of phi through I + Gamma
  Vector total() const;
};

struct ControlGradient {
  ControlVector value;
  std::vector<ControlGradientTerms> terms;
};

ControlGradient grad_a(const ProblemSpec& problem, const PiecewiseTrajectory& trajectory,
                       const LinearizedModel& model, const PointValues& phi);

/// max |a - Pi_box(a - grad)|.
double variational_inequality_residual(const ProblemSpec& problem, const ControlVector& grad,
                                       const ControlVector& controls);

struct GradientReport {
  double cost = 0.0;
  Vector dJ_dtau;
  ControlVector dJ_da;
  double tau_stationarity = 0.0;
  double a_vi_residual = 0.0;
  std::vector<TauGradientTerms> tau_terms;
  std::vector<ControlGradientTerms> a_terms;
  bool has_fd = false;
  Vector fd_dtau;
  ControlVector fd_da;
};

GradientReport compute_gradients(const ProblemSpec& problem, const PiecewiseTrajectory& trajectory);

}  // namespace impvo
