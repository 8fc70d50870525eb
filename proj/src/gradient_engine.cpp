#include "impvo/gradient_engine.hpp"

#include <algorithm>
#include <cmath>

namespace impvo {

PointValues running_cost_gradient(const ProblemSpec& problem, const PiecewiseTrajectory& trajectory) {
  const Mesh& mesh = trajectory.mesh;
  PointValues out(trajectory.state_dim(), mesh.point_count());
  for (int p = 0; p < mesh.point_count(); ++p)
    out.col(p) = problem.F_y(mesh.time(p), trajectory.at(p), trajectory.level_at(p));
  return out;
}

TerminalGradient terminal_gradient(const ProblemSpec& problem, const PiecewiseTrajectory& trajectory) {
  const int N = trajectory.mesh.impulse_count();
  if (!problem.G) {
    TerminalGradient zero{Vector::Zero(N), {}, {}};
    zero.y.assign(N + 1, Vector::Zero(problem.state_dim));
    zero.a.assign(N + 1, Vector::Zero(problem.control_dim));
    return zero;
  }
  std::vector<Vector> storage;
  return problem.G_grad(terminal_args(trajectory, storage));
}

PointValues costate_p(const ProblemSpec& problem, const PiecewiseTrajectory& trajectory,
                      const LinearizedModel& model) {
  return solve_adjoint(model.resolvent, running_cost_gradient(problem, trajectory));
}

double costate_p_residual(const ProblemSpec& problem, const PiecewiseTrajectory& trajectory,
                          const LinearizedModel& model, const PointValues& p) {
  return adjoint_residual(model.system, model.gamma, running_cost_gradient(problem, trajectory), p);
}

double hamiltonian_h(const ProblemSpec& problem, const PiecewiseTrajectory& trajectory,
                     const PointValues& p, int q, const Vector& y, const Vector& a) {
  const Mesh& mesh = trajectory.mesh;
  const double t = mesh.time(q);
  double h = problem.F(t, y, a);
  for (int r = q; r < mesh.point_count(); ++r) {
    const double w = mesh.tail_weight(q, r);
    if (w != 0.0) h += w * p.col(r).dot(problem.f(mesh.time(r), t, y, a));
  }
  return h;
}

double hamiltonian_jump(const ProblemSpec& problem, const PiecewiseTrajectory& trajectory,
                        const PointValues& p, int j) {
  const int q = trajectory.mesh.right_point(j);
  return hamiltonian_h(problem, trajectory, p, q, trajectory.left_limit(j), trajectory.controls[j - 1]) -
         hamiltonian_h(problem, trajectory, p, q, trajectory.right_limit(j), trajectory.controls[j]);
}

std::vector<Matrix> resolvent_rows_at_impulses(const LinearizedModel& model) {
  const Mesh& mesh = model.mesh();
  const int n = model.system.n;
  std::vector<Matrix> rows;
  for (int l = 1; l <= mesh.impulse_count() + 1; ++l) {
    const int L = mesh.left_point(l);
    Matrix row(n, (L + 1) * n);
    for (int q = 0; q <= L; ++q) row.middleCols(q * n, n) = model.resolvent.R(L, q);
    rows.push_back(std::move(row));
  }
  return rows;
}

double resolvent_rows_residual(const LinearizedModel& model, const std::vector<Matrix>& rows) {
  const Mesh& mesh = model.mesh();
  const int n = model.system.n;
  const DiscreteResolvent& res = model.resolvent;
  auto Kt = [&](int p, int q) { return res.lifted_kernel.block(p * n, q * n, n, n); };
  double worst = 0.0;
  for (int l = 1; l <= static_cast<int>(rows.size()); ++l) {
    const int L = mesh.left_point(l);
    const Matrix& row = rows[l - 1];
    for (int q = 0; q <= L; ++q) {
      Matrix r = row.middleCols(q * n, n) - Kt(L, q);
      for (int s = q; s <= L; ++s) {
        const double c = mesh.composition_weight(L, s, q);
        if (c == 0.0) continue;
        const Matrix Rsq = s == L ? Matrix(row.middleCols(q * n, n)) : res.R(s, q);
        r.noalias() -= c * Kt(L, s) * Rsq;
      }
      worst = std::max(worst, r.cwiseAbs().maxCoeff());
    }
  }
  return worst;
}

double TauGradientTerms::total() const {
  return hamiltonian_jump + impulse_forcing + explicit_tau + moving_left_limit + downstream_limits +
         lift_correction;
}

TauGradient grad_tau(const ProblemSpec& problem, const PiecewiseTrajectory& trajectory,
                     const LinearizedModel& model, const PointValues& p) {
  const Mesh& mesh = trajectory.mesh;
  const int N = mesh.impulse_count();
  const TerminalGradient dG = terminal_gradient(problem, trajectory);
  const std::vector<Matrix> rows = resolvent_rows_at_impulses(model);
  const int n = trajectory.state_dim();

  TauGradient out{Vector::Zero(N), {}};
  for (int j = 1; j <= N; ++j) {
    TauGradientTerms t;
    const Vector D = total_derivative(problem, trajectory, j);
    const PointValues eta = eta_j(problem, trajectory, D, j);
    const PointValues eta_t = eta_tilde_j(model, eta);

    t.hamiltonian_jump = hamiltonian_jump(problem, trajectory, p, j);

    // eta_j minus its oscillation part is the impulse forcing g_tau + g_y D_j.
    const double tau = trajectory.schedule.times[j - 1];
    const Vector y_left = trajectory.left_limit(j);
    const Vector y_right = trajectory.right_limit(j);
    for (int q = mesh.right_point(j); q < mesh.point_count(); ++q) {
      const double tq = mesh.time(q);
      const Vector omega_f = problem.f(tq, tau, y_left, trajectory.controls[j - 1]) -
                             problem.f(tq, tau, y_right, trajectory.controls[j]);
      const double w = mesh.trapezoid_weight(q);
      t.impulse_forcing += w * p.col(q).dot(eta.col(q) - omega_f);
      t.lift_correction += w * p.col(q).dot(eta_t.col(q) - eta.col(q));
    }

    t.explicit_tau = dG.tau(j - 1);
    t.moving_left_limit = dG.y[j - 1].dot(D);
    for (int l = j + 1; l <= N + 1; ++l) {
      const int L = mesh.left_point(l);
      Vector dy = eta_t.col(L);
      for (int q = 0; q <= L; ++q) {
        const double w = mesh.forward_weight(L, q);
        if (w != 0.0) dy.noalias() += w * rows[l - 1].middleCols(q * n, n) * eta_t.col(q);
      }
      t.downstream_limits += dG.y[l - 1].dot(dy);
    }
    out.value(j - 1) = t.total();
    out.terms.push_back(t);
  }
  return out;
}

double stationarity_tau_residual(const Vector& grad) {
  return grad.size() == 0 ? 0.0 : grad.lpNorm<Eigen::Infinity>();
}

namespace {

/// rho_j = sum_{l >= j} (I+Gamma)_lj^T G_y_l for j = 1..N+1 (entry j-1).
std::vector<Vector> coupled_terminal_weights(const LinearizedModel& model, const TerminalGradient& dG) {
  const int size = model.gamma.size();
  const BlockArray prop = impulse_propagator(model.gamma);
  std::vector<Vector> rho(size, Vector::Zero(model.system.n));
  for (int j = 1; j <= size; ++j)
    for (int l = j; l <= size; ++l) rho[j - 1].noalias() += prop.at(l, j).transpose() * dG.y[l - 1];
  return rho;
}

/// Forcing of the control adjoint: F_y plus the G_y terms carried back from
/// each left limit through the kernel row K(tau_j^-, .).
PointValues control_adjoint_forcing(const ProblemSpec& problem, const PiecewiseTrajectory& trajectory,
                                    const LinearizedModel& model, const std::vector<Vector>& rho) {
  const Mesh& mesh = model.mesh();
  PointValues zeta = running_cost_gradient(problem, trajectory);
  for (int j = 1; j <= static_cast<int>(rho.size()); ++j) {
    const int L = mesh.left_point(j);
    for (int q = 0; q <= L; ++q) zeta.col(q).noalias() += model.system.K(L, q).transpose() * rho[j - 1];
  }
  return zeta;
}

}  // namespace

PointValues costate_phi(const ProblemSpec& problem, const PiecewiseTrajectory& trajectory,
                        const LinearizedModel& model) {
  const auto rho = coupled_terminal_weights(model, terminal_gradient(problem, trajectory));
  return -solve_adjoint(model.resolvent, control_adjoint_forcing(problem, trajectory, model, rho));
}

double costate_phi_residual(const ProblemSpec& problem, const PiecewiseTrajectory& trajectory,
                            const LinearizedModel& model, const PointValues& phi) {
  const auto rho = coupled_terminal_weights(model, terminal_gradient(problem, trajectory));
  const PointValues zeta = control_adjoint_forcing(problem, trajectory, model, rho);
  return adjoint_residual(model.system, model.gamma, -zeta, phi);
}

Vector ControlGradientTerms::total() const {
  return kernel + impulse + terminal + running + coupled_terminal + lift_correction;
}

ControlGradient grad_a(const ProblemSpec& problem, const PiecewiseTrajectory& trajectory,
                       const LinearizedModel& model, const PointValues& phi) {
  const Mesh& mesh = trajectory.mesh;
  const int N = mesh.impulse_count();
  const int n = trajectory.state_dim();
  const int m = problem.control_dim;
  const int P = mesh.point_count();
  const int M = mesh.points_per_interval();
  const TerminalGradient dG = terminal_gradient(problem, trajectory);
  const auto rho = coupled_terminal_weights(model, dG);
  HistoryTable hist(trajectory);

  // beta_j = sum_{k >= j} (I+Gamma)_kj^T int_{tau_k}^T lambda_k^T phi, j = 1..N.
  const BlockArray prop = impulse_propagator(model.gamma);
  const auto integrals = impulse_weighted_integrals(model.system, phi);
  std::vector<Vector> beta(N, Vector::Zero(n));
  for (int j = 1; j <= N; ++j)
    for (int k = j; k <= N; ++k) beta[j - 1].noalias() += prop.at(k, j).transpose() * integrals[k - 1];

  ControlGradient out;
  for (int i = 0; i <= N; ++i) {
    const Vector& a = trajectory.controls[i];
    const int first = mesh.point(i, 0);
    const int last = mesh.point(i, M);
    ControlGradientTerms t{Vector::Zero(m), Vector::Zero(m), dG.a[i], Vector::Zero(m), Vector::Zero(m),
                           Vector::Zero(m)};

    // Kernel forcing xi(t_p) = sum_{q in interval i} w f_a(t_p, s_q, ...).
    auto kernel_forcing = [&](int p) {
      Matrix xi = Matrix::Zero(n, m);
      const double tp = mesh.time(p);
      for (int q = first; q <= std::min(p, last); ++q) {
        const double w = mesh.forward_weight(p, q);
        if (w != 0.0) xi.noalias() += w * problem.f_a(tp, mesh.time(q), trajectory.at(q), a);
      }
      return xi;
    };

    for (int p = first; p < P; ++p) {
      const double w = mesh.trapezoid_weight(p);
      t.kernel.noalias() -= w * kernel_forcing(p).transpose() * phi.col(p);
      t.impulse.noalias() -= w * problem.g_a(mesh.time(p), hist.at_point(p), i).transpose() * phi.col(p);
    }
    for (int q = first; q <= last; ++q)
      t.running += mesh.trapezoid_weight(q) * problem.F_a(mesh.time(q), trajectory.at(q), a);

    for (int j = i + 1; j <= N + 1; ++j) {
      const int L = mesh.left_point(j);
      const Matrix xi = kernel_forcing(L) + problem.g_a(mesh.time(L), hist.at_interval(j - 1), i);
      t.coupled_terminal.noalias() += xi.transpose() * rho[j - 1];
      if (j <= N) t.lift_correction.noalias() -= xi.transpose() * beta[j - 1];
    }
    out.value.push_back(t.total());
    out.terms.push_back(std::move(t));
  }
  return out;
}

double variational_inequality_residual(const ProblemSpec& problem, const ControlVector& grad,
                                       const ControlVector& controls) {
  double worst = 0.0;
  for (std::size_t i = 0; i < controls.size(); ++i) {
    const Vector projected = problem.box(static_cast<int>(i)).clamp(controls[i] - grad[i]);
    worst = std::max(worst, (controls[i] - projected).lpNorm<Eigen::Infinity>());
  }
  return worst;
}

GradientReport compute_gradients(const ProblemSpec& problem, const PiecewiseTrajectory& trajectory) {
  const LinearizedModel model = linearize_model(problem, trajectory);
  GradientReport r;
  r.cost = evaluate_cost(problem, trajectory);
  const PointValues p = costate_p(problem, trajectory, model);
  TauGradient gt = grad_tau(problem, trajectory, model, p);
  r.dJ_dtau = gt.value;
  r.tau_terms = std::move(gt.terms);
  const PointValues phi = costate_phi(problem, trajectory, model);
  ControlGradient ga = grad_a(problem, trajectory, model, phi);
  r.dJ_da = ga.value;
  r.a_terms = std::move(ga.terms);
  r.tau_stationarity = stationarity_tau_residual(r.dJ_dtau);
  r.a_vi_residual = variational_inequality_residual(problem, r.dJ_da, trajectory.controls);
  return r;
}

}  // namespace impvo
