#include "impvo/run.hpp"

#include "impvo/gradient_engine.hpp"
#include "impvo/ode_specialization.hpp"
#include "impvo/time_variations.hpp"

#include <json.hpp>

#include <chrono>
#include <cmath>
#include <ctime>
#include <filesystem>
#include <fstream>

namespace impvo {

namespace fs = std::filesystem;

std::vector<CheckResult> run_checks(const ResolvedRun& run, const SolveOptions& options) {
  const ProblemSpec& spec = run.problem.spec;
  const Mesh mesh(run.schedule, run.points_per_interval);
  const PiecewiseTrajectory traj = solve_state(spec, run.schedule, run.controls, mesh, options);
  const LinearizedModel model = linearize_model(spec, traj);
  const int N = mesh.impulse_count();
  std::vector<CheckResult> out;

  double jump = 0.0;
  for (double r : jump_residual(spec, traj)) jump = std::max(jump, r);
  out.push_back({"jump_identity", jump, 1e-10});

  const GammaArray paths = gamma_by_paths(model.lambda);
  double gamma_diff = 0.0;
  for (int i = 1; i <= model.gamma.size(); ++i)
    for (int j = 1; j <= model.gamma.size(); ++j)
      gamma_diff = std::max(gamma_diff, (model.gamma.at(i, j) - paths.at(i, j)).cwiseAbs().maxCoeff());
  out.push_back({"gamma_path_sums", gamma_diff, 1e-12 * std::max(1.0, model.gamma.max_abs())});

  out.push_back({"resolvent_identity", resolvent_identity_residual(model.resolvent), 1e-8});

  // Linear forward and adjoint solves with the state and F_y as forcings.
  const PointValues eta = traj.states;
  const PointValues zeta = running_cost_gradient(spec, traj);
  const PointValues y = solve_linear_forward(model.system, model.gamma, model.resolvent, eta);
  const PointValues z = solve_adjoint(model.resolvent, zeta);
  out.push_back({"linear_forward_residual", linear_forward_residual(model.system, eta, y), 1e-8});
  out.push_back({"adjoint_residual", adjoint_residual(model.system, model.gamma, zeta, z), 1e-8});
  const double lhs = inner_product(mesh, zeta, y);
  const double rhs = inner_product(mesh, z, lift_forcing(model.system, model.gamma, eta));
  out.push_back({"forward_adjoint_duality", std::abs(lhs - rhs) / std::max(std::abs(lhs), 1e-300), 1e-8});

  const PointValues p = costate_p(spec, traj, model);
  out.push_back({"costate_p_residual", costate_p_residual(spec, traj, model, p), 1e-8});
  out.push_back({"resolvent_rows_residual", resolvent_rows_residual(model, resolvent_rows_at_impulses(model)), 1e-8});

  double variation = 0.0, omega = 0.0;
  for (int j = 1; j <= N; ++j) {
    variation = std::max(variation, variation_residual(model, state_variation(spec, traj, model, j)));
    const double tau = traj.schedule.times[j - 1];
    double assembled = oscillation([&](double t, const Vector& yy, const Vector& a) -> Vector {
      return Vector::Constant(1, spec.F(t, yy, a));
    }, j, traj)(0);
    for (int q = mesh.right_point(j); q < mesh.point_count(); ++q) {
      const Vector of = spec.f(mesh.time(q), tau, traj.left_limit(j), traj.controls[j - 1]) -
                        spec.f(mesh.time(q), tau, traj.right_limit(j), traj.controls[j]);
      assembled += mesh.trapezoid_weight(q) * p.col(q).dot(of);
    }
    omega = std::max(omega, std::abs(hamiltonian_jump(spec, traj, p, j) - assembled));
  }
  out.push_back({"variation_residual", variation, 1e-8});
  out.push_back({"hamiltonian_oscillation_identity", omega, 1e-10});

  const TauGradient gt = grad_tau(spec, traj, model, p);
  double breakdown = 0.0;
  for (int j = 0; j < N; ++j) breakdown = std::max(breakdown, std::abs(gt.terms[j].total() - gt.value(j)));
  out.push_back({"gradient_breakdown_sum", breakdown, 1e-10});

  const PointValues phi = costate_phi(spec, traj, model);
  out.push_back({"costate_phi_residual", costate_phi_residual(spec, traj, model, phi), 1e-8});

  if (run.problem.ode) {
    const OdeProblemSpec& ode = *run.problem.ode;
    const PointValues psi = psi_costate(mesh, p);
    const RhoMatrix rho = rho_matrix(model.resolvent);
    out.push_back({"psi_residual", psi_residual(ode, traj, p, psi), 1e-6});
    out.push_back({"rho_residual", rho_residual(ode, traj, model.resolvent, rho), 1e-6});
    const Vector og = ode_grad_tau(ode, traj, psi, rho);
    out.push_back({"ode_lift_equivalence", N ? (og - gt.value).lpNorm<Eigen::Infinity>() : 0.0, 1e-6});
  }
  return out;
}

GradientReport gradient_report(const ResolvedRun& run, const SolveOptions& options,
                               const GradientOptions& gradient) {
  const Mesh mesh(run.schedule, run.points_per_interval);
  const PiecewiseTrajectory traj = solve_state(run.problem.spec, run.schedule, run.controls, mesh, options);
  GradientReport rep = compute_gradients(run.problem.spec, traj);
  if (gradient.fd) {
    FdGradient fd = fd_gradient(run.problem.spec, run.schedule, run.controls, run.points_per_interval,
                                gradient.h_tau, gradient.h_a, options);
    rep.has_fd = true;
    rep.fd_dtau = fd.tau;
    rep.fd_da = fd.a;
  }
  return rep;
}

namespace {

using json = nlohmann::json;

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << text;
  if (!out) throw IoError("failed writing " + path.string());
}

void write_metadata(const fs::path& dir, const RunConfig& config) {
  const auto now = std::chrono::system_clock::now();
  const std::time_t tt = std::chrono::system_clock::to_time_t(now);
  char buf[64];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&tt));
  json meta{{"timestamp", buf}, {"command", config.command}, {"problem", config.problem}};
  write_text(dir / "metadata.json", meta.dump(2) + "\n");
}

void write_error(const fs::path& dir, const std::string& kind, const std::string& message, const json& where) {
  json e{{"error", {{"kind", kind}, {"message", message}, {"where", where}}}};
  std::error_code ec;
  fs::create_directories(dir, ec);
  std::ofstream out(dir / "error.json", std::ios::binary);
  if (out) out << e.dump(2) << "\n";
}

Table summary_table(double cost, const Mesh& mesh) {
  return Table{{"name", "value"},
               {{"J", format_number(cost)},
                {"points_per_interval", std::to_string(mesh.points_per_interval())},
                {"impulses", std::to_string(mesh.impulse_count())}}};
}

int execute(const RunConfig& config, std::ostream& log) {
  const fs::path dir = config.output_dir;
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create output directory " + dir.string() + ": " + ec.message());

  const ResolvedRun run = resolve(config);
  write_metadata(dir, config);

  if (config.command == "solve") {
    const Mesh mesh(run.schedule, run.points_per_interval);
    const PiecewiseTrajectory traj = solve_state(run.problem.spec, run.schedule, run.controls, mesh, config.solver);
    const double J = evaluate_cost(run.problem.spec, traj);
    write_table(dir / "trajectory.csv", trajectory_table(traj));
    write_table(dir / "summary.csv", summary_table(J, mesh));
    log << "J = " << format_number(J) << "\n";
    return kExitOk;
  }
  if (config.command == "grad") {
    const GradientReport rep = gradient_report(run, config.solver, config.gradient);
    write_table(dir / "gradient_tau.csv", gradient_tau_table(rep));
    write_table(dir / "gradient_a.csv", gradient_a_table(rep));
    write_table(dir / "gradient_terms.csv", gradient_terms_table(rep));
    log << "J = " << format_number(rep.cost) << ", |dJ/dtau| = " << format_number(rep.tau_stationarity)
        << ", VI residual = " << format_number(rep.a_vi_residual) << "\n";
    return kExitOk;
  }
  if (config.command == "check") {
    const auto checks = run_checks(run, config.solver);
    write_table(dir / "checks.csv", check_table(checks));
    bool ok = true;
    for (const auto& c : checks) {
      log << (c.pass() ? "PASS " : "FAIL ") << c.name << " " << format_number(c.value) << " <= "
          << format_number(c.threshold) << "\n";
      ok = ok && c.pass();
    }
    return ok ? kExitOk : kExitNumerical;
  }

  // optimize
  OptimizeOptions opts = config.optimizer;
  opts.points_per_interval = run.points_per_interval;
  opts.solve = config.solver;
  try {
    const OptimizationTrace trace = optimize(run.problem.spec, run.schedule, run.controls, opts);
    write_table(dir / "trace.csv", trace_table(trace));
    write_table(dir / "gradient_tau.csv", gradient_tau_table(trace.final_report));
    write_table(dir / "gradient_a.csv", gradient_a_table(trace.final_report));
    write_table(dir / "gradient_terms.csv", gradient_terms_table(trace.final_report));
    const auto& last = trace.records.back();
    log << "iterations " << last.iteration << ", J = " << format_number(last.cost)
        << (trace.converged          ? ", converged\n"
            : trace.constrained_stop ? ", stopped on a schedule constraint (impulse-time gradient nonzero)\n"
                                     : ", not converged\n");
    return trace.converged ? kExitOk : kExitNumerical;
  } catch (const LineSearchStall& stall) {
    write_table(dir / "gradient_tau.csv", gradient_tau_table(stall.report()));
    write_table(dir / "gradient_a.csv", gradient_a_table(stall.report()));
    throw;
  }
}

}  // namespace

int run(const RunConfig& config, std::ostream& log, std::ostream& err) {
  const fs::path dir = config.output_dir;
  try {
    return execute(config, log);
  } catch (const ConfigError& e) {
    err << "validation error: " << e.what() << "\n";
    write_error(dir, "validation", e.what(), e.path());
    return kExitValidation;
  } catch (const SolverError& e) {
    err << "numerical error: " << e.what() << "\n";
    write_error(dir, "numerical", e.what(), e.where());
    return kExitNumerical;
  } catch (const IoError& e) {
    err << "I/O error: " << e.what() << "\n";
    write_error(dir, "io", e.what(), nullptr);
    return kExitIo;
  } catch (const std::invalid_argument& e) {
    err << "validation error: " << e.what() << "\n";
    write_error(dir, "validation", e.what(), nullptr);
    return kExitValidation;
  }
}

int run_file(const std::filesystem::path& path, const std::string& output_dir, std::ostream& log,
             std::ostream& err) {
  RunConfig config;
  auto fail = [&](const char* kind, const std::string& message, const json& where, int code) {
    err << (std::string(kind) == "io" ? "I/O" : kind) << " error: " << message << "\n";
    if (!output_dir.empty()) write_error(output_dir, kind, message, where);
    return code;
  };
  try {
    config = load_config(path);
  } catch (const IoError& e) {
    return fail("io", e.what(), path.string(), kExitIo);
  } catch (const ConfigError& e) {
    return fail("validation", e.what(), e.path(), kExitValidation);
  } catch (const SolverError& e) {
    return fail("numerical", e.what(), e.where(), kExitNumerical);
  } catch (const std::invalid_argument& e) {
    return fail("validation", e.what(), nullptr, kExitValidation);
  }
  if (!output_dir.empty()) config.output_dir = output_dir;
  return run(config, log, err);
}

}  // namespace impvo
