#include "impvo/time_variations.hpp"

#include <stdexcept>
#include <string>

namespace impvo {

LinearizedModel linearize_model(const ProblemSpec& problem, const PiecewiseTrajectory& trajectory) {
  LinearImpulsiveSystem system = linearize(problem, trajectory);
  LambdaArray lambda = build_lambda(system);
  GammaArray gamma = build_gamma(lambda);
  Matrix lifted = lift_kernel(system, gamma);
  DiscreteResolvent resolvent = discrete_resolvent(lifted, system.mesh, system.n);
  return LinearizedModel{std::move(system), std::move(lambda), std::move(gamma), std::move(resolvent)};
}

namespace {

void check_impulse_index(const PiecewiseTrajectory& trajectory, int j) {
  if (j < 1 || j > trajectory.mesh.impulse_count())
    throw std::invalid_argument("impulse index " + std::to_string(j) + " out of range");
}

}  // namespace

Vector total_derivative(const ProblemSpec& problem, const PiecewiseTrajectory& trajectory, int j) {
  check_impulse_index(trajectory, j);
  const Mesh& mesh = trajectory.mesh;
  const double tau = trajectory.schedule.times[j - 1];
  const int L = mesh.left_point(j);
  HistoryTable hist(trajectory);

  Vector D = problem.y0_dot(tau) + problem.f(tau, tau, trajectory.at(L), trajectory.controls[j - 1]);
  for (int q = 0; q <= L; ++q) {
    const double w = mesh.forward_weight(L, q);
    if (w != 0.0) D.noalias() += w * problem.f_t1(tau, mesh.time(q), trajectory.at(q), trajectory.level_at(q));
  }
  D += problem.g_t(tau, hist.at_interval(j - 1));
  return D;
}

PointValues eta_j(const ProblemSpec& problem, const PiecewiseTrajectory& trajectory, const Vector& Dj,
                  int j) {
  check_impulse_index(trajectory, j);
  const Mesh& mesh = trajectory.mesh;
  const double tau = trajectory.schedule.times[j - 1];
  const Vector y_left = trajectory.left_limit(j);
  const Vector y_right = trajectory.right_limit(j);
  const Vector& a_left = trajectory.controls[j - 1];
  const Vector& a_right = trajectory.controls[j];
  HistoryTable hist(trajectory);

  PointValues eta = PointValues::Zero(trajectory.state_dim(), mesh.point_count());
  for (int p = mesh.right_point(j); p < mesh.point_count(); ++p) {
    const double t = mesh.time(p);
    const ImpulseHistory h = hist.at_point(p);
    eta.col(p) = problem.f(t, tau, y_left, a_left) - problem.f(t, tau, y_right, a_right) +
                 problem.g_tau(t, h, j - 1) + problem.g_y(t, h, j - 1) * Dj;
  }
  return eta;
}

PointValues eta_tilde_j(const LinearizedModel& model, const PointValues& eta) {
  return lift_forcing(model.system, model.gamma, eta);
}

VariationBundle state_variation(const ProblemSpec& problem, const PiecewiseTrajectory& trajectory,
                                const LinearizedModel& model, int j) {
  VariationBundle b;
  b.j = j;
  b.Dj = total_derivative(problem, trajectory, j);
  b.eta = eta_j(problem, trajectory, b.Dj, j);
  b.eta_tilde = eta_tilde_j(model, b.eta);

  const Eigen::Index size = b.eta_tilde.size();
  Vector flat = Eigen::Map<const Vector>(b.eta_tilde.data(), size);
  Vector dy = flat + model.resolvent.weighted * flat;
  b.djy = Eigen::Map<const Matrix>(dy.data(), b.eta.rows(), b.eta.cols());

  const Mesh& mesh = model.mesh();
  const int N = mesh.impulse_count();
  for (int l = 1; l <= N + 1; ++l) {
    if (l <= j)
      b.left_limits.push_back(Vector::Zero(trajectory.state_dim()));
    else
      b.left_limits.push_back(b.djy.col(mesh.left_point(l)));
  }
  return b;
}

double variation_residual(const LinearizedModel& model, const VariationBundle& bundle) {
  return linear_forward_residual(model.system, bundle.eta, bundle.djy);
}

}  // namespace impvo
