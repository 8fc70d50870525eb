#include "helpers.hpp"
#include "impvo/gradient_engine.hpp"
#include "impvo/optimizer.hpp"
#include "impvo/problems.hpp"
#include "impvo/run.hpp"
#include "impvo/time_variations.hpp"

#include <doctest.h>

#include <cmath>

using namespace impvo;
using namespace testing_support;

namespace {

PiecewiseTrajectory solve_builtin(const BuiltinProblem& b, int M, std::vector<double> tau = {}) {
  ImpulseSchedule s = b.schedule;
  if (!tau.empty()) s.times = tau;
  return solve_state(b.spec, s, b.controls, Mesh(s, M));
}

bool interior(const Mesh& mesh, int p) { return !mesh.is_interval_start(p) && !mesh.is_interval_end(p); }

}  // namespace

TEST_CASE("oscillation operator") {
  const BuiltinProblem jump = make_problem("P-JUMP");
  const auto traj = solve_builtin(jump, 10);
  CHECK(oscillation([](double, const Vector&, const Vector&) { return s1(4.0); }, 1, traj)(0) == 0.0);

  ImpulseSchedule sched{{0.5}, 1.0, 1e-3};
  ProblemSpec s = zero_problem();
  const auto t2 = solve_state(s, sched, levels({1, 2}), Mesh(sched, 4));
  CHECK(oscillation([](double, const Vector&, const Vector& a) { return a; }, 1, t2)(0) == -1.0);

  CHECK(oscillation([](double, const Vector& y, const Vector&) { return y; }, 1, traj)(0) == -1.0);
}

TEST_CASE("left-limit velocity") {
  ProblemSpec s = zero_problem();
  s.y0 = [](double) { return s1(2.0); };
  CHECK(total_derivative(s, solve(s, {0.5}, levels({0, 0}), 8), 1)(0) == 0.0);

  const BuiltinProblem jump = make_problem("P-JUMP");
  CHECK(total_derivative(jump.spec, solve_builtin(jump, 10), 1)(0) == 0.0);

  const BuiltinProblem full = make_problem("P-FULL");
  const double tau = full.schedule.times[0], h = 1e-5;
  const Vector Dj = total_derivative(full.spec, solve_builtin(full, 400), 1);
  const Vector fd = (solve_builtin(full, 400, {tau + h}).left_limit(1) - solve_builtin(full, 400, {tau - h}).left_limit(1)) / (2 * h);
  for (Eigen::Index k = 0; k < fd.size(); ++k) CHECK(relative_error(Dj(k), fd(k)) < 1e-3);
}

TEST_CASE("eta assembled from its three parts") {
  const BuiltinProblem full = make_problem("P-FULL");
  const auto traj = solve_builtin(full, 60);
  const Mesh& mesh = traj.mesh;
  const int p = mesh.point(1, 35);
  REQUIRE(mesh.time(p) == doctest::Approx(0.75));
  const double t = mesh.time(p), tau = full.schedule.times[0], h = 1e-5;
  const Vector Dfd = (solve_builtin(full, 60, {tau + h}).left_limit(1) - solve_builtin(full, 60, {tau - h}).left_limit(1)) / (2 * h);

  const std::vector<double> times{tau};
  const std::vector<Vector> left{traj.left_limit(1)};
  const ImpulseHistory hist{times, left, traj.controls};
  const Vector hand = full.spec.f(t, tau, traj.left_limit(1), traj.controls[0]) -
                      full.spec.f(t, tau, traj.right_limit(1), traj.controls[1]) + full.spec.g_tau(t, hist, 0) +
                      full.spec.g_y(t, hist, 0) * Dfd;
  const PointValues eta = eta_j(full.spec, traj, total_derivative(full.spec, traj, 1), 1);
  for (Eigen::Index k = 0; k < hand.size(); ++k) CHECK(relative_error(eta(k, p), hand(k)) < 1e-3);
  CHECK(eta.col(mesh.left_point(1)).norm() == 0.0);

  ProblemSpec s = zero_problem();
  const auto t0 = solve(s, {0.5}, levels({1, 1}), 6);
  CHECK(eta_j(s, t0, total_derivative(s, t0, 1), 1).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("lifted eta") {
  ProblemSpec s = zero_problem();
  s.f = [](double, double, const Vector& y, const Vector& a) { return Vector(y + a); };
  s.f_y = [](double, double, const Vector&, const Vector&) { return m1(1.0); };
  const auto t0 = solve(s, {0.3, 0.6}, levels({0, 1, 2}), 10);
  const LinearizedModel m0 = linearize_model(s, t0);
  const PointValues e0 = eta_j(s, t0, total_derivative(s, t0, 1), 1);
  CHECK(eta_tilde_j(m0, e0) == e0);

  // Two impulses, j = 1, t = 0.9: only the coupling through tau_2 survives.
  const BuiltinProblem cf = make_problem("P-COUPLED-FULL");
  const auto traj = solve_builtin(cf, 30);
  const Mesh& mesh = traj.mesh;
  const int p = mesh.point(2, 20);
  REQUIRE(mesh.time(p) == doctest::Approx(0.9));
  const LinearizedModel m = linearize_model(cf.spec, traj);
  const PointValues eta = eta_j(cf.spec, traj, total_derivative(cf.spec, traj, 1), 1);
  const std::vector<Vector> left{traj.left_limit(1), traj.left_limit(2)};
  const ImpulseHistory hist{traj.schedule.times, left, traj.controls};
  const Vector hand = eta.col(p) + cf.spec.g_y(mesh.time(p), hist, 1) * eta.col(mesh.left_point(2));
  CHECK((eta_tilde_j(m, eta).col(p) - hand).norm() < 1e-12);

  // Last impulse: nothing downstream to couple through.
  const PointValues eta2 = eta_j(cf.spec, traj, total_derivative(cf.spec, traj, 2), 2);
  CHECK((eta_tilde_j(m, eta2) - eta2).cwiseAbs().maxCoeff() < 1e-15);
}

TEST_CASE("state sensitivity to an impulse time") {
  const BuiltinProblem full = make_problem("P-FULL");
  const int M = 400;
  const auto traj = solve_builtin(full, M);
  const LinearizedModel m = linearize_model(full.spec, traj);
  const VariationBundle b = state_variation(full.spec, traj, m, 1);
  CHECK(variation_residual(m, b) < 1e-8);

  // Compare at fixed times, interior to the last interval.
  const double tau = full.schedule.times[0], h = 1e-5;
  const auto up = solve_builtin(full, M, {tau + h});
  const auto dn = solve_builtin(full, M, {tau - h});
  double worst = 0.0;
  for (double t : {0.55, 0.7, 0.85, 0.95}) {
    const int k = static_cast<int>(std::lround((t - tau) / traj.mesh.step(1)));
    const int p = traj.mesh.point(1, k);
    // Linear interpolation of the perturbed runs onto t_p.
    auto at = [&](const PiecewiseTrajectory& tr) {
      const double s = (traj.mesh.time(p) - tr.mesh.boundary(1)) / tr.mesh.step(1);
      const int lo = static_cast<int>(std::floor(s));
      const double w = s - lo;
      return Vector((1 - w) * tr.at(tr.mesh.point(1, lo)) + w * tr.at(tr.mesh.point(1, lo + 1)));
    };
    const Vector fd = (at(up) - at(dn)) / (2 * h);
    for (Eigen::Index c = 0; c < fd.size(); ++c) worst = std::max(worst, relative_error(b.djy(c, p), fd(c), 1e-6));
  }
  CHECK(worst < 1e-3);

  const BuiltinProblem jump = make_problem("P-JUMP");
  const auto tj = solve_builtin(jump, 10);
  const LinearizedModel mj = linearize_model(jump.spec, tj);
  CHECK(state_variation(jump.spec, tj, mj, 1).djy.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("co-state p") {
  ProblemSpec s = zero_problem();
  s.f = [](double, double, const Vector& y, const Vector&) { return Vector(0.4 * y); };
  s.f_y = [](double, double, const Vector&, const Vector&) { return m1(0.4); };
  s.y0 = [](double) { return s1(1.0); };
  const auto t0 = solve(s, {0.5}, levels({0, 0}), 10);
  CHECK(costate_p(s, t0, linearize_model(s, t0)).cwiseAbs().maxCoeff() == 0.0);

  // y = e^{kt}, F = y^2: p(t) = e^{kt} + e^{k(2-t)}.
  const BuiltinProblem lin = make_problem("P-LIN");
  const auto traj = solve_builtin(lin, 200);
  const LinearizedModel m = linearize_model(lin.spec, traj);
  const PointValues p = costate_p(lin.spec, traj, m);
  double worst = 0.0;
  for (int q = 0; q < traj.mesh.point_count(); ++q) {
    if (!interior(traj.mesh, q)) continue;
    const double t = traj.mesh.time(q);
    worst = std::max(worst, std::abs(p(0, q) - (std::exp(0.5 * t) + std::exp(0.5 * (2 - t)))));
  }
  CHECK(worst < 1e-4);

  const BuiltinProblem full = make_problem("P-FULL");
  const auto tf = solve_builtin(full, 60);
  const LinearizedModel mf = linearize_model(full.spec, tf);
  CHECK(costate_p_residual(full.spec, tf, mf, costate_p(full.spec, tf, mf)) < 1e-8);
}

TEST_CASE("hamiltonian") {
  const BuiltinProblem full = make_problem("P-FULL");
  const auto traj = solve_builtin(full, 60);
  const PointValues zero = PointValues::Zero(traj.state_dim(), traj.mesh.point_count());
  const int q = traj.mesh.point(1, 7);
  CHECK(hamiltonian_h(full.spec, traj, zero, q, traj.at(q), traj.controls[1]) ==
        full.spec.F(traj.mesh.time(q), traj.at(q), traj.controls[1]));

  // F = 0, f = c: h(t) = c int_t^T p.
  ProblemSpec s = zero_problem();
  s.f = [](double, double, const Vector&, const Vector&) { return s1(1.5); };
  const auto t0 = solve(s, {0.4}, levels({0, 0}), 20);
  PointValues p(1, t0.mesh.point_count());
  double tail = 0.0;
  const int start = t0.mesh.point(0, 10);
  for (int r = 0; r < p.cols(); ++r) {
    p(0, r) = 1.0 + t0.mesh.time(r);
    tail += t0.mesh.tail_weight(start, r) * p(0, r);
  }
  const double t = t0.mesh.time(start);
  CHECK(tail == doctest::Approx((1.0 - t) + 0.5 * (1.0 - t * t)).epsilon(1e-12));
  CHECK(hamiltonian_h(s, t0, p, start, t0.at(start), t0.controls[0]) == doctest::Approx(1.5 * tail).epsilon(1e-14));

  ResolvedRun run{full, full.schedule, full.controls, 60};
  for (const auto& c : run_checks(run, {}))
    if (c.name == "hamiltonian_oscillation_identity") CHECK(c.pass());
}

TEST_CASE("resolvent rows at impulse instants") {
  ProblemSpec s = zero_problem();
  const auto t0 = solve(s, {0.5}, levels({0, 0}), 6);
  const LinearizedModel m0 = linearize_model(s, t0);
  for (const auto& row : resolvent_rows_at_impulses(m0)) CHECK(row.cwiseAbs().maxCoeff() == 0.0);

  const BuiltinProblem lin = make_problem("P-LIN");
  const auto traj = solve_builtin(lin, 200);
  const LinearizedModel m = linearize_model(lin.spec, traj);
  const auto rows = resolvent_rows_at_impulses(m);
  REQUIRE(rows.size() == 1);
  double worst = 0.0;
  for (int q = 0; q < traj.mesh.point_count(); ++q) {
    if (!interior(traj.mesh, q)) continue;
    worst = std::max(worst, std::abs(rows[0](0, q) - 0.5 * std::exp(0.5 * (1.0 - traj.mesh.time(q)))));
  }
  CHECK(worst < 1e-4);

  const BuiltinProblem cf = make_problem("P-COUPLED-FULL");
  const auto tc = solve_builtin(cf, 200);
  const LinearizedModel mc = linearize_model(cf.spec, tc);
  CHECK(resolvent_rows_residual(mc, resolvent_rows_at_impulses(mc)) < 1e-8);
}

TEST_CASE("impulse-time gradient") {
  ProblemSpec s = zero_problem();
  s.y0 = [](double t) { return s1(t); };
  s.f = [](double, double, const Vector& y, const Vector&) { return Vector(0.3 * y); };
  s.f_y = [](double, double, const Vector&, const Vector&) { return m1(0.3); };
  const auto t0 = solve(s, {0.3, 0.6}, levels({0, 1, 2}), 20);
  CHECK(compute_gradients(s, t0).dJ_dtau.cwiseAbs().maxCoeff() == 0.0);

  // J = int y^2 with y = number of impulses before t: J = (0.7 - 0.3) + 4 (1 - 0.7).
  const BuiltinProblem jump = make_problem("P-JUMP");
  const GradientReport rep = compute_gradients(jump.spec, solve_builtin(jump, 100));
  CHECK(rep.dJ_dtau(0) == doctest::Approx(-1.0).epsilon(1e-12));
  CHECK(rep.dJ_dtau(1) == doctest::Approx(-3.0).epsilon(1e-12));
  CHECK(rep.tau_stationarity == 3.0);
  CHECK(stationarity_tau_residual(Vector::Zero(2)) == 0.0);
  for (std::size_t j = 0; j < rep.tau_terms.size(); ++j)
    CHECK(rep.tau_terms[j].total() == doctest::Approx(rep.dJ_dtau(j)).epsilon(1e-14));
}

TEST_CASE("gradients match finite differences") {
  const BuiltinProblem full = make_problem("P-FULL");
  const int M = 100;
  const GradientReport rep = compute_gradients(full.spec, solve_builtin(full, M));
  const FdGradient fd = fd_gradient(full.spec, full.schedule, full.controls, M, 1e-4, 1e-5);
  CHECK(relative_error(rep.dJ_dtau(0), fd.tau(0)) < 1e-3);
  for (std::size_t i = 0; i < fd.a.size(); ++i)
    for (Eigen::Index k = 0; k < fd.a[i].size(); ++k) CHECK(relative_error(rep.dJ_da[i](k), fd.a[i](k)) < 1e-3);
}

TEST_CASE("control co-state") {
  ProblemSpec s = zero_problem();
  s.f = [](double, double, const Vector& y, const Vector&) { return Vector(0.4 * y); };
  s.f_y = [](double, double, const Vector&, const Vector&) { return m1(0.4); };
  s.F = [](double, const Vector&, const Vector& a) { return a.squaredNorm(); };
  const auto t0 = solve(s, {0.5}, levels({1, 1}), 10);
  CHECK(costate_phi(s, t0, linearize_model(s, t0)).cwiseAbs().maxCoeff() == 0.0);

  const BuiltinProblem lin = make_problem("P-LIN");
  const auto traj = solve_builtin(lin, 200);
  const LinearizedModel m = linearize_model(lin.spec, traj);
  CHECK((costate_phi(lin.spec, traj, m) + costate_p(lin.spec, traj, m)).cwiseAbs().maxCoeff() < 1e-4);

  const BuiltinProblem full = make_problem("P-FULL");
  const auto tf = solve_builtin(full, 60);
  const LinearizedModel mf = linearize_model(full.spec, tf);
  CHECK(costate_phi_residual(full.spec, tf, mf, costate_phi(full.spec, tf, mf)) < 1e-8);
}

TEST_CASE("control gradient") {
  ProblemSpec s = zero_problem();
  s.f = [](double, double, const Vector& y, const Vector&) { return Vector(0.4 * y); };
  s.f_y = [](double, double, const Vector&, const Vector&) { return m1(0.4); };
  s.y0 = [](double) { return s1(1.0); };
  const auto t0 = solve(s, {0.5}, levels({1, 2}), 10);
  for (const auto& g : compute_gradients(s, t0).dJ_da) CHECK(g.cwiseAbs().maxCoeff() == 0.0);

  // F = u^2 on [0, 0.5] with a_0 = 3.
  ProblemSpec q = zero_problem();
  q.F = [](double, const Vector&, const Vector& a) { return a.squaredNorm(); };
  q.F_a = [](double, const Vector&, const Vector& a) { return Vector(2.0 * a); };
  const GradientReport rep = compute_gradients(q, solve(q, {0.5}, levels({3, 0}), 10));
  CHECK(rep.dJ_da[0](0) == doctest::Approx(3.0).epsilon(1e-14));
  CHECK(rep.dJ_da[1](0) == 0.0);
}

TEST_CASE("variational inequality residual") {
  ProblemSpec s = zero_problem();
  s.control_boxes = {ControlBox{s1(0.0), s1(2.0)}};
  CHECK(variational_inequality_residual(s, levels({0}), levels({1})) == 0.0);
  // At the upper bound a negative gradient asks for a larger a, which the box
  // blocks: first-order optimal.
  CHECK(variational_inequality_residual(s, levels({-1}), levels({2})) == 0.0);
  // A positive gradient points into the box: residual min(g, distance) = 1.
  CHECK(variational_inequality_residual(s, levels({1}), levels({2})) == 1.0);
  CHECK(variational_inequality_residual(s, levels({5}), levels({2})) == 2.0);
}
