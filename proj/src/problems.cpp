#include "impvo/problems.hpp"

#include <cmath>
#include <functional>
#include <stdexcept>

namespace impvo {

namespace {

Vector vec(std::initializer_list<double> v) {
  Vector out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index k = 0;
  for (double x : v) out(k++) = x;
  return out;
}

Matrix mat1(double x) { return Matrix::Constant(1, 1, x); }

ControlBox box1(double lo, double hi) { return ControlBox{vec({lo}), vec({hi})}; }

double param(const ParameterMap& p, const char* key) { return p.at(key); }

// ---------------------------------------------------------------- P-LIN
// y = 1 + int_0^t k y ds, so y(t) = e^{kt}; J = int y^2.
BuiltinProblem lin(const ParameterMap& p) {
  const double k = param(p, "k");
  ProblemSpec s;
  s.horizon = param(p, "T");
  s.y0 = [](double) { return vec({1.0}); };
  s.y0_dot = [](double) { return vec({0.0}); };
  s.f = [k](double, double, const Vector& y, const Vector&) { return Vector(k * y); };
  s.f_y = [k](double, double, const Vector&, const Vector&) { return mat1(k); };
  s.f_a = [](double, double, const Vector&, const Vector&) { return mat1(0.0); };
  s.f_t1 = [](double, double, const Vector&, const Vector&) { return vec({0.0}); };
  s.g = [](double, const ImpulseHistory&) { return vec({0.0}); };
  s.g_t = s.g;
  s.g_tau = [](double, const ImpulseHistory&, int) { return vec({0.0}); };
  s.g_y = [](double, const ImpulseHistory&, int) { return mat1(0.0); };
  s.g_a = s.g_y;
  s.F = [](double, const Vector& y, const Vector&) { return y.squaredNorm(); };
  s.F_y = [](double, const Vector& y, const Vector&) { return Vector(2.0 * y); };
  s.F_a = [](double, const Vector&, const Vector&) { return vec({0.0}); };
  s.control_boxes = {box1(-1.0, 1.0)};
  return BuiltinProblem{"P-LIN", s, std::nullopt, ImpulseSchedule{{}, s.horizon, 1e-3 * s.horizon},
                        {vec({0.0})}, 200, p};
}

// --------------------------------------------------------------- P-JUMP
// f = 0, y0 = 0, g = c * (number of impulses before t).
BuiltinProblem jump(const ParameterMap& p) {
  const double c = param(p, "jump");
  ProblemSpec s;
  s.horizon = 1.0;
  s.y0 = [](double) { return vec({0.0}); };
  s.y0_dot = s.y0;
  s.f = [](double, double, const Vector&, const Vector&) { return vec({0.0}); };
  s.f_y = [](double, double, const Vector&, const Vector&) { return mat1(0.0); };
  s.f_a = s.f_y;
  s.f_t1 = s.f;
  s.g = [c](double, const ImpulseHistory& h) { return vec({c * static_cast<double>(h.times.size())}); };
  s.g_t = [](double, const ImpulseHistory&) { return vec({0.0}); };
  s.g_tau = [](double, const ImpulseHistory&, int) { return vec({0.0}); };
  s.g_y = [](double, const ImpulseHistory&, int) { return mat1(0.0); };
  s.g_a = s.g_y;
  s.F = [](double, const Vector& y, const Vector&) { return y.squaredNorm(); };
  s.F_y = [](double, const Vector& y, const Vector&) { return Vector(2.0 * y); };
  s.F_a = [](double, const Vector&, const Vector&) { return vec({0.0}); };
  s.control_boxes = {box1(-1.0, 1.0)};
  return BuiltinProblem{"P-JUMP", s, std::nullopt, ImpulseSchedule{{0.3, 0.7}, 1.0, 1e-3},
                        {vec({0.0}), vec({0.0}), vec({0.0})}, 100, p};
}

// ------------------------------------------------------------ P-COUPLED
// y = 1 + int_0^t k y ds + sum_i gain * y(tau_i^-).
BuiltinProblem coupled(const ParameterMap& p) {
  const double k = param(p, "k");
  const double gain = param(p, "gain");
  ProblemSpec s;
  s.horizon = 1.0;
  s.y0 = [](double) { return vec({1.0}); };
  s.y0_dot = [](double) { return vec({0.0}); };
  s.f = [k](double, double, const Vector& y, const Vector&) { return Vector(k * y); };
  s.f_y = [k](double, double, const Vector&, const Vector&) { return mat1(k); };
  s.f_a = [](double, double, const Vector&, const Vector&) { return mat1(0.0); };
  s.f_t1 = [](double, double, const Vector&, const Vector&) { return vec({0.0}); };
  s.g = [gain](double, const ImpulseHistory& h) {
    Vector v = vec({0.0});
    for (const auto& y : h.left_limits) v += gain * y;
    return v;
  };
  s.g_t = [](double, const ImpulseHistory&) { return vec({0.0}); };
  s.g_tau = [](double, const ImpulseHistory&, int) { return vec({0.0}); };
  s.g_y = [gain](double, const ImpulseHistory&, int) { return mat1(gain); };
  s.g_a = [](double, const ImpulseHistory&, int) { return mat1(0.0); };
  s.F = [](double, const Vector& y, const Vector&) { return y.squaredNorm(); };
  s.F_y = [](double, const Vector& y, const Vector&) { return Vector(2.0 * y); };
  s.F_a = [](double, const Vector&, const Vector&) { return vec({0.0}); };
  s.control_boxes = {box1(-1.0, 1.0)};
  return BuiltinProblem{"P-COUPLED", s, std::nullopt, ImpulseSchedule{{1.0 / 3.0, 2.0 / 3.0}, 1.0, 1e-3},
                        {vec({0.0}), vec({0.0}), vec({0.0})}, 100, p};
}

}  // namespace

namespace {

// ------------------------------------------------------- P-COUPLED-FULL
// Two states, two impulses, time-dependent kernel with a mild
// nonlinearity, and an impulse aggregate depending on t, tau, y and a:
//   f = c(t,s) (A y + eps [sin y2, cos y1] + b a),  c = e^{-d(t-s)} (1 + 0.3 t)
//   g = sum_i w_i(t) (C y_i + 0.1 [y_i1^2, 0] + e tau_i + q a_{i-1}),
//       w_i = e^{-r(t - tau_i)}
BuiltinProblem coupled_full(const ParameterMap& p) {
  const double d = param(p, "decay");
  const double r = param(p, "jump_decay");
  const double eps = param(p, "eps");
  const double wG = param(p, "terminal_weight");
  Matrix A(2, 2), C(2, 2);
  A << -0.5, 0.4, -0.3, 0.2;
  C << 0.3, -0.2, 0.1, 0.4;
  const Vector b = vec({0.5, -0.2});
  const Vector e = vec({0.5, -0.3});
  const Vector q = vec({0.2, 0.1});

  auto c = [d](double t, double s) { return std::exp(-d * (t - s)) * (1.0 + 0.3 * t); };
  auto c_t = [d](double t, double s) { return std::exp(-d * (t - s)) * (0.3 - d * (1.0 + 0.3 * t)); };
  auto inner = [A, b, eps](const Vector& y, const Vector& a) {
    Vector v = A * y + b * a(0);
    v(0) += eps * std::sin(y(1));
    v(1) += eps * std::cos(y(0));
    return v;
  };
  auto jump_term = [C, e, q](const ImpulseHistory& h, int i) {
    const Vector& y = h.left_limits[i];
    Vector v = C * y + e * h.times[i] + q * h.levels[i](0);
    v(0) += 0.1 * y(0) * y(0);
    return v;
  };
  auto w = [r](double t, const ImpulseHistory& h, int i) { return std::exp(-r * (t - h.times[i])); };

  ProblemSpec s;
  s.state_dim = 2;
  s.horizon = 1.0;
  s.y0 = [](double t) { return vec({1.0 + 0.2 * t, 0.5 * std::cos(t)}); };
  s.y0_dot = [](double t) { return vec({0.2, -0.5 * std::sin(t)}); };
  s.f = [c, inner](double t, double sv, const Vector& y, const Vector& a) { return Vector(c(t, sv) * inner(y, a)); };
  s.f_y = [c, A, eps](double t, double sv, const Vector& y, const Vector&) {
    Matrix J = A;
    J(0, 1) += eps * std::cos(y(1));
    J(1, 0) -= eps * std::sin(y(0));
    return Matrix(c(t, sv) * J);
  };
  s.f_a = [c, b](double t, double sv, const Vector&, const Vector&) { return Matrix(c(t, sv) * b); };
  s.f_t1 = [c_t, inner](double t, double sv, const Vector& y, const Vector& a) {
    return Vector(c_t(t, sv) * inner(y, a));
  };
  s.g = [w, jump_term](double t, const ImpulseHistory& h) {
    Vector v = Vector::Zero(2);
    for (int i = 0; i < static_cast<int>(h.times.size()); ++i) v += w(t, h, i) * jump_term(h, i);
    return v;
  };
  s.g_t = [w, jump_term, r](double t, const ImpulseHistory& h) {
    Vector v = Vector::Zero(2);
    for (int i = 0; i < static_cast<int>(h.times.size()); ++i) v -= r * w(t, h, i) * jump_term(h, i);
    return v;
  };
  s.g_tau = [w, jump_term, r, e](double t, const ImpulseHistory& h, int j) {
    return Vector(w(t, h, j) * (r * jump_term(h, j) + e));
  };
  s.g_y = [w, C](double t, const ImpulseHistory& h, int j) {
    Matrix J = C;
    J(0, 0) += 0.2 * h.left_limits[j](0);
    return Matrix(w(t, h, j) * J);
  };
  s.g_a = [w, q](double t, const ImpulseHistory& h, int i) {
    if (i >= static_cast<int>(h.times.size())) return Matrix(Matrix::Zero(2, 1));
    return Matrix(w(t, h, i) * q);
  };
  auto target = [](double t) { return vec({1.0, 0.3 * t}); };
  s.F = [target](double t, const Vector& y, const Vector& a) {
    return 0.5 * (y - target(t)).squaredNorm() + 0.1 * a(0) * a(0);
  };
  s.F_y = [target](double t, const Vector& y, const Vector&) { return Vector(y - target(t)); };
  s.F_a = [](double, const Vector&, const Vector& a) { return vec({0.2 * a(0)}); };
  // G = wG/2 sum_l |y_l|^2 + 0.1 sum_j tau_j^2 + 0.05 sum_i a_i^2
  s.G = [wG](const TerminalArgs& g) {
    double v = 0.0;
    for (const auto& y : g.left_limits) v += 0.5 * wG * y.squaredNorm();
    for (double t : g.times) v += 0.1 * t * t;
    for (const auto& a : g.levels) v += 0.05 * a.squaredNorm();
    return v;
  };
  s.G_grad = [wG](const TerminalArgs& g) {
    TerminalGradient out;
    out.tau = Vector(static_cast<Eigen::Index>(g.times.size()));
    for (std::size_t j = 0; j < g.times.size(); ++j) out.tau(j) = 0.2 * g.times[j];
    for (const auto& y : g.left_limits) out.y.push_back(wG * y);
    for (const auto& a : g.levels) out.a.push_back(0.1 * a);
    return out;
  };
  s.control_boxes = {box1(-1.0, 1.0)};
  return BuiltinProblem{"P-COUPLED-FULL", s, std::nullopt, ImpulseSchedule{{0.35, 0.7}, 1.0, 1e-3},
                        {vec({0.3}), vec({-0.2}), vec({0.5})}, 200, p};
}

}  // namespace

namespace {

// --------------------------------------------------------------- P-FULL
// One impulse, scalar state and control:
//   f = e^{-d(t-s)} (a - y),  y0 = 1 + 0.2 t,
//   g = sum_i e^{-r(t-tau_i)} (kappa (1 - y_i) + beta a_{i-1}),
//   F = (y - target(t))^2 + eps a^2,  G = gamma (y(T^-) - yT)^2.
BuiltinProblem full(const ParameterMap& p) {
  const double d = param(p, "decay");
  const double r = param(p, "jump_decay");
  const double kappa = param(p, "kappa");
  const double beta = param(p, "beta");
  const double eps = param(p, "eps");
  const double gamma = param(p, "gamma");
  const double yT = param(p, "yT");
  const double r0 = param(p, "target0"), r1 = param(p, "target1"), r2 = param(p, "target2");

  auto c = [d](double t, double s) { return std::exp(-d * (t - s)); };
  auto target = [r0, r1, r2](double t) { return r0 + r1 * t + r2 * t * t; };
  auto w = [r](double t, double tau) { return std::exp(-r * (t - tau)); };
  auto term = [kappa, beta](const ImpulseHistory& h, int i) {
    return kappa * (1.0 - h.left_limits[i](0)) + beta * h.levels[i](0);
  };

  ProblemSpec s;
  s.horizon = 1.0;
  s.y0 = [](double t) { return vec({1.0 + 0.2 * t}); };
  s.y0_dot = [](double) { return vec({0.2}); };
  s.f = [c](double t, double sv, const Vector& y, const Vector& a) { return vec({c(t, sv) * (a(0) - y(0))}); };
  s.f_y = [c](double t, double sv, const Vector&, const Vector&) { return mat1(-c(t, sv)); };
  s.f_a = [c](double t, double sv, const Vector&, const Vector&) { return mat1(c(t, sv)); };
  s.f_t1 = [c, d](double t, double sv, const Vector& y, const Vector& a) {
    return vec({-d * c(t, sv) * (a(0) - y(0))});
  };
  s.g = [w, term](double t, const ImpulseHistory& h) {
    double v = 0.0;
    for (int i = 0; i < static_cast<int>(h.times.size()); ++i) v += w(t, h.times[i]) * term(h, i);
    return vec({v});
  };
  s.g_t = [w, term, r](double t, const ImpulseHistory& h) {
    double v = 0.0;
    for (int i = 0; i < static_cast<int>(h.times.size()); ++i) v -= r * w(t, h.times[i]) * term(h, i);
    return vec({v});
  };
  s.g_tau = [w, term, r](double t, const ImpulseHistory& h, int j) {
    return vec({r * w(t, h.times[j]) * term(h, j)});
  };
  s.g_y = [w, kappa](double t, const ImpulseHistory& h, int j) { return mat1(-kappa * w(t, h.times[j])); };
  s.g_a = [w, beta](double t, const ImpulseHistory& h, int i) {
    if (i >= static_cast<int>(h.times.size())) return mat1(0.0);
    return mat1(beta * w(t, h.times[i]));
  };
  s.F = [target, eps](double t, const Vector& y, const Vector& a) {
    const double e = y(0) - target(t);
    return e * e + eps * a(0) * a(0);
  };
  s.F_y = [target](double t, const Vector& y, const Vector&) { return vec({2.0 * (y(0) - target(t))}); };
  s.F_a = [eps](double, const Vector&, const Vector& a) { return vec({2.0 * eps * a(0)}); };
  s.G = [gamma, yT](const TerminalArgs& g) {
    const double e = g.left_limits.back()(0) - yT;
    return gamma * e * e;
  };
  s.G_grad = [gamma, yT](const TerminalArgs& g) {
    TerminalGradient out;
    out.tau = Vector::Zero(static_cast<Eigen::Index>(g.times.size()));
    for (std::size_t l = 0; l < g.left_limits.size(); ++l) out.y.push_back(vec({0.0}));
    out.y.back()(0) = 2.0 * gamma * (g.left_limits.back()(0) - yT);
    for (std::size_t i = 0; i < g.levels.size(); ++i) out.a.push_back(vec({0.0}));
    return out;
  };
  s.control_boxes = {box1(0.0, 1.0)};
  return BuiltinProblem{"P-FULL", s, std::nullopt, ImpulseSchedule{{0.4}, 1.0, 0.02},
                        {vec({0.5}), vec({0.5})}, 60, p};
}

// ---------------------------------------------------------------- P-ODE
//   y' = 1 - gain a - decay y + forcing sin(2t),  y(0) = y_init,
//   y(tau^+) = jump_y y(tau^-) + jump_a a + jump_tau tau   (a partial reset),
//   F = y^2 + weight (a - a_ref)^2,  G = (y(T^-) - yT)^2.
// Resets pay off most when y has grown, so the best instants are interior.
BuiltinProblem ode(const ParameterMap& p) {
  const double forcing = param(p, "forcing"), gain = param(p, "gain"), decay = param(p, "decay");
  const double ky = param(p, "jump_y"), ka = param(p, "jump_a"), kt = param(p, "jump_tau");
  const double weight = param(p, "weight"), a_ref = param(p, "a_ref"), yT = param(p, "yT");

  OdeProblemSpec o;
  o.horizon = 1.0;
  o.y0 = vec({param(p, "y_init")});
  o.f = [forcing, gain, decay](double t, const Vector& y, const Vector& a) {
    return vec({1.0 - gain * a(0) - decay * y(0) + forcing * std::sin(2.0 * t)});
  };
  o.f_y = [decay](double, const Vector&, const Vector&) { return mat1(-decay); };
  o.f_a = [gain](double, const Vector&, const Vector&) { return mat1(-gain); };
  o.jump = [ky, ka, kt](double tau, const Vector& y, const Vector& a) {
    return vec({ky * y(0) + ka * a(0) + kt * tau});
  };
  o.jump_tau = [kt](double, const Vector&, const Vector&) { return vec({kt}); };
  o.jump_y = [ky](double, const Vector&, const Vector&) { return mat1(ky); };
  o.jump_a = [ka](double, const Vector&, const Vector&) { return mat1(ka); };
  o.convention = OdeProblemSpec::JumpConvention::Replacement;
  o.F = [weight, a_ref](double, const Vector& y, const Vector& a) {
    return y(0) * y(0) + weight * (a(0) - a_ref) * (a(0) - a_ref);
  };
  o.F_y = [](double, const Vector& y, const Vector&) { return vec({2.0 * y(0)}); };
  o.F_a = [weight, a_ref](double, const Vector&, const Vector& a) { return vec({2.0 * weight * (a(0) - a_ref)}); };
  o.G = [yT](const TerminalArgs& g) {
    const double e = g.left_limits.back()(0) - yT;
    return e * e;
  };
  o.G_grad = [yT](const TerminalArgs& g) {
    TerminalGradient out;
    out.tau = Vector::Zero(static_cast<Eigen::Index>(g.times.size()));
    for (std::size_t l = 0; l < g.left_limits.size(); ++l) out.y.push_back(vec({0.0}));
    out.y.back()(0) = 2.0 * (g.left_limits.back()(0) - yT);
    for (std::size_t i = 0; i < g.levels.size(); ++i) out.a.push_back(vec({0.0}));
    return out;
  };
  o.control_boxes = {box1(0.0, 2.0)};
  return BuiltinProblem{"P-ODE", lift_ode_problem(o), o, ImpulseSchedule{{0.3, 0.65}, 1.0, 1e-3},
                        {vec({0.8}), vec({0.4}), vec({0.6})}, 400, p};
}

struct Entry {
  const char* name;
  ParameterMap defaults;
  std::function<BuiltinProblem(const ParameterMap&)> build;
};

const std::vector<Entry>& registry() {
  static const std::vector<Entry> entries = {
      {"P-LIN", {{"k", 0.5}, {"T", 1.0}}, lin},
      {"P-JUMP", {{"jump", 1.0}}, jump},
      {"P-COUPLED", {{"k", 1.0}, {"gain", 0.5}}, coupled},
      {"P-COUPLED-FULL", {{"decay", 0.8}, {"jump_decay", 0.5}, {"eps", 0.3}, {"terminal_weight", 0.5}}, coupled_full},
      {"P-FULL",
       {{"decay", 0.5}, {"jump_decay", 1.0}, {"kappa", 0.8}, {"beta", 0.3}, {"eps", 0.1}, {"gamma", 1.0},
        {"yT", 0.8}, {"target0", 0.9}, {"target1", 0.0}, {"target2", 0.0}},
       full},
      {"P-ODE",
       {{"forcing", 0.3}, {"gain", 0.5}, {"decay", 0.5}, {"jump_y", 0.2}, {"jump_a", 0.1}, {"jump_tau", 0.05}, {"weight", 0.2},
        {"a_ref", 0.5}, {"yT", 0.8}, {"y_init", 0.0}},
       ode},
  };
  return entries;
}

const Entry& find(const std::string& name) {
  for (const auto& e : registry())
    if (name == e.name) return e;
  std::string known;
  for (const auto& e : registry()) known += std::string(known.empty() ? "" : ", ") + e.name;
  throw std::invalid_argument("unknown problem '" + name + "' (known: " + known + ")");
}

}  // namespace

std::vector<std::string> problem_names() {
  std::vector<std::string> out;
  for (const auto& e : registry()) out.emplace_back(e.name);
  return out;
}

ParameterMap problem_defaults(const std::string& name) { return find(name).defaults; }

BuiltinProblem make_problem(const std::string& name, const ParameterMap& overrides) {
  const Entry& e = find(name);
  ParameterMap params = e.defaults;
  for (const auto& [key, value] : overrides) {
    if (!params.count(key)) throw std::invalid_argument("problem " + name + " has no parameter '" + key + "'");
    if (!std::isfinite(value)) throw std::invalid_argument("parameter '" + key + "' must be finite");
    params[key] = value;
  }
  return e.build(params);
}

}  // namespace impvo
