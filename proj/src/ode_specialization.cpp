#include "impvo/ode_specialization.hpp"

#include <algorithm>

namespace impvo {

Vector OdeProblemSpec::increment(double tau, const Vector& y, const Vector& a) const {
  Vector v = jump(tau, y, a);
  if (convention == JumpConvention::Replacement) v -= y;
  return v;
}

Vector OdeProblemSpec::increment_tau(double tau, const Vector& y, const Vector& a) const {
  return jump_tau(tau, y, a);
}

Matrix OdeProblemSpec::increment_y(double tau, const Vector& y, const Vector& a) const {
  Matrix J = jump_y(tau, y, a);
  if (convention == JumpConvention::Replacement) J -= Matrix::Identity(state_dim, state_dim);
  return J;
}

Matrix OdeProblemSpec::increment_a(double tau, const Vector& y, const Vector& a) const {
  return jump_a(tau, y, a);
}

ProblemSpec lift_ode_problem(const OdeProblemSpec& ode) {
  ProblemSpec p;
  p.state_dim = ode.state_dim;
  p.control_dim = ode.control_dim;
  p.horizon = ode.horizon;
  const int n = ode.state_dim;
  const int m = ode.control_dim;
  const Vector y0 = ode.y0;

  p.y0 = [y0](double) { return y0; };
  p.y0_dot = [n](double) { return Vector(Vector::Zero(n)); };
  p.f = [ode](double, double s, const Vector& y, const Vector& a) { return ode.f(s, y, a); };
  p.f_y = [ode](double, double s, const Vector& y, const Vector& a) { return ode.f_y(s, y, a); };
  p.f_a = [ode](double, double s, const Vector& y, const Vector& a) { return ode.f_a(s, y, a); };
  p.f_t1 = [n](double, double, const Vector&, const Vector&) { return Vector(Vector::Zero(n)); };

  p.g = [ode, n](double, const ImpulseHistory& h) {
    Vector v = Vector::Zero(n);
    for (std::size_t k = 0; k < h.times.size(); ++k)
      v += ode.increment(h.times[k], h.left_limits[k], h.levels[k]);
    return v;
  };
  p.g_t = [n](double, const ImpulseHistory&) { return Vector(Vector::Zero(n)); };
  p.g_tau = [ode](double, const ImpulseHistory& h, int j) {
    return ode.increment_tau(h.times[j], h.left_limits[j], h.levels[j]);
  };
  p.g_y = [ode](double, const ImpulseHistory& h, int j) {
    return ode.increment_y(h.times[j], h.left_limits[j], h.levels[j]);
  };
  p.g_a = [ode, n, m](double, const ImpulseHistory& h, int i) {
    if (i >= static_cast<int>(h.times.size())) return Matrix(Matrix::Zero(n, m));
    return ode.increment_a(h.times[i], h.left_limits[i], h.levels[i]);
  };

  p.F = ode.F;
  p.F_y = ode.F_y;
  p.F_a = ode.F_a;
  p.G = ode.G;
  p.G_grad = ode.G_grad;
  p.control_boxes = ode.control_boxes;
  return p;
}

PointValues psi_costate(const Mesh& mesh, const PointValues& p) {
  const int P = mesh.point_count();
  PointValues psi = PointValues::Zero(p.rows(), P);
  for (int q = 0; q < P; ++q)
    for (int r = q; r < P; ++r) {
      const double w = mesh.tail_weight(q, r);
      if (w != 0.0) psi.col(q) += w * p.col(r);
    }
  return psi;
}

LambdaArray ode_lambda(const OdeProblemSpec& ode, const PiecewiseTrajectory& trajectory) {
  const int N = trajectory.mesh.impulse_count();
  LambdaArray lambda(N + 1, ode.state_dim);
  for (int j = 1; j <= N; ++j) {
    const Matrix Iy = ode.increment_y(trajectory.schedule.times[j - 1], trajectory.left_limit(j),
                                      trajectory.controls[j - 1]);
    for (int i = j + 1; i <= N + 1; ++i) lambda.at(i, j) = Iy;
  }
  return lambda;
}

namespace {

bool interior(const Mesh& mesh, int q) { return !mesh.is_interval_start(q) && !mesh.is_interval_end(q); }

Matrix ode_kernel(const OdeProblemSpec& ode, const PiecewiseTrajectory& trajectory, int q) {
  return ode.f_y(trajectory.mesh.time(q), trajectory.at(q), trajectory.level_at(q));
}

}  // namespace

double psi_residual(const OdeProblemSpec& ode, const PiecewiseTrajectory& trajectory,
                    const PointValues& p, const PointValues& psi) {
  const Mesh& mesh = trajectory.mesh;
  const int N = mesh.impulse_count();
  const LambdaArray lambda = ode_lambda(ode, trajectory);
  const BlockArray prop = impulse_propagator(build_gamma(lambda));

  // c_j = sum_{k >= j} (I+Gamma)_kj^T I_y(tau_k)^T psi(tau_k^+)
  std::vector<Vector> c(N + 2, Vector::Zero(ode.state_dim));
  for (int j = 1; j <= N; ++j)
    for (int k = j; k <= N; ++k)
      c[j].noalias() += prop.at(k, j).transpose() * lambda.at(N + 1, k).transpose() *
                        psi.col(mesh.right_point(k));
  // Suffix sums so that tail[i] = sum_{j > i} c_j.
  std::vector<Vector> tail(N + 2, Vector::Zero(ode.state_dim));
  for (int i = N - 1; i >= 0; --i) tail[i] = tail[i + 1] + c[i + 1];

  double worst = 0.0;
  for (int q = 0; q < mesh.point_count(); ++q) {
    if (!interior(mesh, q)) continue;
    const Matrix fy = ode_kernel(ode, trajectory, q);
    const Vector rhs = ode.F_y(mesh.time(q), trajectory.at(q), trajectory.level_at(q)) +
                       fy.transpose() * (psi.col(q) + tail[mesh.interval_of(q)]);
    // psi' = -p, so the backward equation reads -p = -(rhs).
    worst = std::max(worst, (p.col(q) - rhs).lpNorm<Eigen::Infinity>());
  }
  return worst;
}

RhoMatrix rho_matrix(const DiscreteResolvent& resolvent) {
  const Mesh& mesh = resolvent.mesh;
  const int n = resolvent.n;
  RhoMatrix rho{mesh, n, {}};
  for (int l = 1; l <= mesh.impulse_count() + 1; ++l) {
    const int L = mesh.left_point(l);
    std::vector<Matrix> R(L + 1);
    for (int r = 0; r <= L; ++r) R[r] = resolvent.R(L, r);
    Matrix row = Matrix::Zero(n, (L + 1) * n);
    for (int q = 0; q <= L; ++q)
      for (int r = q; r <= L; ++r) {
        const double w = mesh.tail_weight(q, r);
        if (w != 0.0) row.middleCols(q * n, n) += w * R[r];
      }
    rho.rows.push_back(std::move(row));
  }
  return rho;
}

double rho_residual(const OdeProblemSpec& ode, const PiecewiseTrajectory& trajectory,
                    const DiscreteResolvent& resolvent, const RhoMatrix& rho) {
  const Mesh& mesh = trajectory.mesh;
  const int n = ode.state_dim;
  const LambdaArray lambda = ode_lambda(ode, trajectory);
  const BlockArray prop = impulse_propagator(build_gamma(lambda));
  const Matrix I = Matrix::Identity(n, n);
  const int N = mesh.impulse_count();

  double worst = 0.0;
  for (int l = 1; l <= N + 1; ++l) {
    const int L = mesh.left_point(l);
    // coupling[i] = sum_{k=i+1}^{l-1} sum_{m=k}^{l-1} (I + rho_l(tau_m^+)) lambda_m (I+Gamma)_mk
    std::vector<Matrix> coupling(l, Matrix::Zero(n, n));
    for (int i = l - 2; i >= 0; --i) {
      coupling[i] = coupling[i + 1];
      const int k = i + 1;
      for (int m = k; m <= l - 1; ++m)
        coupling[i] += (I + rho.at(l, mesh.right_point(m))) * lambda.at(N + 1, m) * prop.at(m, k);
    }
    for (int q = 0; q <= L; ++q) {
      if (!interior(mesh, q)) continue;
      const Matrix fy = ode_kernel(ode, trajectory, q);
      const Matrix r = -resolvent.R(L, q) + (I + rho.at(l, q)) * fy + coupling[mesh.interval_of(q)] * fy;
      worst = std::max(worst, r.cwiseAbs().maxCoeff());
    }
  }
  return worst;
}

Vector ode_total_derivative(const OdeProblemSpec& ode, const PiecewiseTrajectory& trajectory, int j) {
  return ode.f(trajectory.schedule.times[j - 1], trajectory.left_limit(j), trajectory.controls[j - 1]);
}

Vector ode_grad_tau(const OdeProblemSpec& ode, const PiecewiseTrajectory& trajectory,
                    const PointValues& psi, const RhoMatrix& rho) {
  const Mesh& mesh = trajectory.mesh;
  const int N = mesh.impulse_count();
  const int n = ode.state_dim;
  const LambdaArray lambda = ode_lambda(ode, trajectory);
  const BlockArray prop = impulse_propagator(build_gamma(lambda));

  TerminalGradient dG;
  if (ode.G) {
    std::vector<Vector> storage;
    dG = ode.G_grad(terminal_args(trajectory, storage));
  } else {
    dG.tau = Vector::Zero(N);
    dG.y.assign(N + 1, Vector::Zero(n));
  }
  // psi at the point before tau_{k+1}; zero past T.
  auto psi_left = [&](int k) { return Vector(psi.col(mesh.left_point(k + 1))); };

  Vector grad(N);
  for (int j = 1; j <= N; ++j) {
    const double tau = trajectory.schedule.times[j - 1];
    const Vector yl = trajectory.left_limit(j);
    const Vector yr = trajectory.right_limit(j);
    const Vector& al = trajectory.controls[j - 1];
    const Vector& ar = trajectory.controls[j];
    const Vector psi_j = psi.col(mesh.right_point(j));

    const Vector D = ode_total_derivative(ode, trajectory, j);
    const Vector omega_f = ode.f(tau, yl, al) - ode.f(tau, yr, ar);
    const double omega_F = ode.F(tau, yl, al) - ode.F(tau, yr, ar);
    const Vector forcing = ode.increment_tau(tau, yl, al) + ode.increment_y(tau, yl, al) * D;
    const Vector eta = omega_f + forcing;

    // etatilde is constant on each interval k >= j.
    std::vector<Vector> eta_t(N + 1, Vector::Zero(n));
    for (int k = j; k <= N; ++k) {
      eta_t[k] = eta;
      for (int kk = j + 1; kk <= k; ++kk)
        for (int m = kk; m <= k; ++m) eta_t[k] += lambda.at(N + 1, m) * prop.at(m, kk) * eta;
    }

    double g = omega_F + psi_j.dot(omega_f) + psi_j.dot(forcing) + dG.tau(j - 1) + dG.y[j - 1].dot(D);
    for (int k = j; k <= N; ++k)
      g += (psi.col(mesh.right_point(k)) - psi_left(k)).dot(eta_t[k] - eta);
    for (int l = j + 1; l <= N + 1; ++l) {
      Vector dy = eta_t[l - 1];
      for (int k = j; k <= l - 1; ++k)
        dy += (rho.at(l, mesh.right_point(k)) - rho.at(l, mesh.left_point(k + 1))) * eta_t[k];
      g += dG.y[l - 1].dot(dy);
    }
    grad(j - 1) = g;
  }
  return grad;
}

double ode_stationarity(const Vector& grad) {
  return grad.size() == 0 ? 0.0 : grad.lpNorm<Eigen::Infinity>();
}

}  // namespace impvo
