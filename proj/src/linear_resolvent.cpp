#include "impvo/linear_resolvent.hpp"

#include <stdexcept>

namespace impvo {

BlockArray::BlockArray(int size, int block_dim)
    : size_(size), n_(block_dim), blocks_(size * size, Matrix::Zero(block_dim, block_dim)) {}

BlockArray BlockArray::identity(int size, int block_dim) {
  BlockArray out(size, block_dim);
  for (int i = 1; i <= size; ++i) out.at(i, i) = Matrix::Identity(block_dim, block_dim);
  return out;
}

BlockArray BlockArray::operator*(const BlockArray& other) const {
  BlockArray out(size_, n_);
  for (int i = 1; i <= size_; ++i)
    for (int j = 1; j <= size_; ++j)
      for (int k = 1; k <= size_; ++k) out.at(i, j).noalias() += at(i, k) * other.at(k, j);
  return out;
}

BlockArray BlockArray::operator+(const BlockArray& other) const {
  BlockArray out(size_, n_);
  for (std::size_t b = 0; b < blocks_.size(); ++b) out.blocks_[b] = blocks_[b] + other.blocks_[b];
  return out;
}

bool BlockArray::is_zero() const {
  for (const auto& b : blocks_)
    if (!b.isZero(0.0)) return false;
  return true;
}

bool BlockArray::is_strictly_lower() const {
  for (int i = 1; i <= size_; ++i)
    for (int j = i; j <= size_; ++j)
      if (!at(i, j).isZero(0.0)) return false;
  return true;
}

double BlockArray::max_abs() const {
  double m = 0.0;
  for (const auto& b : blocks_) m = std::max(m, b.cwiseAbs().maxCoeff());
  return m;
}

LinearImpulsiveSystem linearize(const ProblemSpec& problem, const PiecewiseTrajectory& trajectory) {
  const Mesh& mesh = trajectory.mesh;
  const int n = trajectory.state_dim();
  const int P = mesh.point_count();
  LinearImpulsiveSystem sys{mesh, n, Matrix::Zero(P * n, P * n), {}};
  sys.gains.resize(P);

  std::vector<Vector> y(P);
  for (int p = 0; p < P; ++p) y[p] = trajectory.states.col(p);

  HistoryTable hist(trajectory);
  for (int p = 0; p < P; ++p) {
    const double t = mesh.time(p);
    for (int q = 0; q <= p; ++q) {
      sys.kernel.block(p * n, q * n, n, n) = problem.f_y(t, mesh.time(q), y[q], trajectory.level_at(q));
    }
    const int i = mesh.interval_of(p);
    const ImpulseHistory h = hist.at_interval(i);
    for (int k = 1; k <= i; ++k) sys.gains[p].push_back(problem.g_y(t, h, k - 1));
  }
  return sys;
}

LambdaArray build_lambda(const LinearImpulsiveSystem& system) {
  const int N = system.mesh.impulse_count();
  LambdaArray lambda(N + 1, system.n);
  for (int i = 2; i <= N + 1; ++i) {
    const int p = system.mesh.left_point(i);
    for (int j = 1; j < i; ++j) lambda.at(i, j) = system.lambda(p, j);
  }
  return lambda;
}

LambdaArray build_lambda(const ProblemSpec& problem, const PiecewiseTrajectory& trajectory) {
  const Mesh& mesh = trajectory.mesh;
  const int N = mesh.impulse_count();
  const int n = trajectory.state_dim();
  HistoryTable hist(trajectory);
  LambdaArray lambda(N + 1, n);
  for (int i = 2; i <= N + 1; ++i) {
    const double t = mesh.boundary(i);
    const ImpulseHistory h = hist.at_interval(i - 1);
    for (int j = 1; j < i; ++j) lambda.at(i, j) = problem.g_y(t, h, j - 1);
  }
  return lambda;
}

GammaArray build_gamma(const LambdaArray& lambda) {
  if (!lambda.is_strictly_lower())
    throw std::invalid_argument("Lambda must be strictly lower-block-triangular");
  GammaArray sum = lambda;
  BlockArray power = lambda;
  for (int k = 2; k <= lambda.size(); ++k) {
    power = power * lambda;
    sum = sum + power;
  }
  return sum;
}

GammaArray gamma_by_paths(const LambdaArray& lambda) {
  const int size = lambda.size();
  if (size > 13) throw std::invalid_argument("path enumeration limited to N <= 12");
  if (!lambda.is_strictly_lower())
    throw std::invalid_argument("Lambda must be strictly lower-block-triangular");
  const int n = lambda.block_dim();
  GammaArray gamma(size, n);
  for (int i = 1; i <= size; ++i) {
    for (int j = 1; j < i; ++j) {
      const int inner = i - j - 1;  // candidate intermediate indices j+1..i-1
      Matrix total = Matrix::Zero(n, n);
      for (unsigned mask = 0; mask < (1u << inner); ++mask) {
        // chain j < k_1 < ... < k_alpha < i, product Lambda_{i k_alpha} ... Lambda_{k_1 j}
        Matrix prod = Matrix::Identity(n, n);
        int prev = j;
        for (int b = 0; b < inner; ++b) {
          if (mask & (1u << b)) {
            const int k = j + 1 + b;
            prod = lambda.at(k, prev) * prod;
            prev = k;
          }
        }
        prod = lambda.at(i, prev) * prod;
        total += prod;
      }
      gamma.at(i, j) = total;
    }
  }
  return gamma;
}

BlockArray impulse_propagator(const GammaArray& gamma) {
  return gamma + BlockArray::identity(gamma.size(), gamma.block_dim());
}

namespace {

/// B_j(p) = sum_{k=j}^{i(p)} lambda_k(t_p) (I+Gamma)_kj for j = 1..i(p).
std::vector<Matrix> lift_coefficients(const LinearImpulsiveSystem& sys, const BlockArray& prop,
                                      int p) {
  const int i = sys.mesh.interval_of(p);
  std::vector<Matrix> B(i, Matrix::Zero(sys.n, sys.n));
  for (int j = 1; j <= i; ++j)
    for (int k = j; k <= i; ++k) B[j - 1].noalias() += sys.lambda(p, k) * prop.at(k, j);
  return B;
}

}  // namespace

Matrix lift_kernel(const LinearImpulsiveSystem& system, const GammaArray& gamma) {
  const Mesh& mesh = system.mesh;
  const int n = system.n;
  const BlockArray prop = impulse_propagator(gamma);
  Matrix lifted = system.kernel;
  for (int p = 0; p < mesh.point_count(); ++p) {
    const auto B = lift_coefficients(system, prop, p);
    for (int j = 1; j <= static_cast<int>(B.size()); ++j) {
      const int L = mesh.left_point(j);
      lifted.block(p * n, 0, n, (L + 1) * n).noalias() += B[j - 1] * system.kernel.block(L * n, 0, n, (L + 1) * n);
    }
  }
  return lifted;
}

PointValues lift_forcing(const LinearImpulsiveSystem& system, const GammaArray& gamma,
                         const PointValues& eta) {
  const Mesh& mesh = system.mesh;
  const BlockArray prop = impulse_propagator(gamma);
  PointValues out = eta;
  for (int p = 0; p < mesh.point_count(); ++p) {
    const auto B = lift_coefficients(system, prop, p);
    for (int j = 1; j <= static_cast<int>(B.size()); ++j)
      out.col(p).noalias() += B[j - 1] * eta.col(mesh.left_point(j));
  }
  return out;
}

Matrix DiscreteResolvent::R(int p, int q) const {
  const double w = mesh.forward_weight(p, q);
  if (w > 0.0) return weighted_block(p, q) / w;
  if (p == q) return lifted_kernel.block(p * n, q * n, n, n);
  return Matrix::Zero(n, n);
}

DiscreteResolvent discrete_resolvent(const Matrix& lifted_kernel, const Mesh& mesh, int n) {
  const int P = mesh.point_count();
  if (lifted_kernel.rows() != P * n || lifted_kernel.cols() != P * n)
    throw std::invalid_argument("lifted kernel does not match the mesh");

  Matrix A = Matrix::Zero(P * n, P * n);
  for (int p = 0; p < P; ++p)
    for (int q = 0; q <= p; ++q) {
      const double w = mesh.forward_weight(p, q);
      if (w != 0.0) A.block(p * n, q * n, n, n) = w * lifted_kernel.block(p * n, q * n, n, n);
    }

  // Forward substitution of (I - A) X = A, one block row at a time:
  // (I - A_pp) X_p = A_p + A_{p,<p} X_{<p}.
  Matrix X = Matrix::Zero(P * n, P * n);
  const Matrix I = Matrix::Identity(n, n);
  for (int p = 0; p < P; ++p) {
    const int cols = (p + 1) * n;
    Matrix rhs = A.block(p * n, 0, n, cols);
    if (p > 0) rhs.noalias() += A.block(p * n, 0, n, p * n) * X.block(0, 0, p * n, cols);
    const Matrix diag = I - A.block(p * n, p * n, n, n);
    X.block(p * n, 0, n, cols) = diag.partialPivLu().solve(rhs);
  }
  return DiscreteResolvent{mesh, n, lifted_kernel, std::move(X)};
}

Matrix compose_kernels(const Matrix& X, const Matrix& Y, const Mesh& mesh, int n) {
  const int P = mesh.point_count();
  Matrix out = Matrix::Zero(P * n, P * n);
  for (int p = 0; p < P; ++p)
    for (int q = 0; q <= p; ++q)
      for (int r = q; r <= p; ++r) {
        const double c = mesh.composition_weight(p, r, q);
        if (c == 0.0) continue;
        out.block(p * n, q * n, n, n).noalias() +=
            c * X.block(p * n, r * n, n, n) * Y.block(r * n, q * n, n, n);
      }
  return out;
}

namespace {

Matrix resolvent_kernel_matrix(const DiscreteResolvent& res) {
  const int P = res.mesh.point_count();
  const int n = res.n;
  Matrix R = Matrix::Zero(P * n, P * n);
  for (int p = 0; p < P; ++p)
    for (int q = 0; q <= p; ++q) R.block(p * n, q * n, n, n) = res.R(p, q);
  return R;
}

}  // namespace

double resolvent_identity_residual(const DiscreteResolvent& resolvent) {
  const Matrix R = resolvent_kernel_matrix(resolvent);
  const Matrix comp = compose_kernels(resolvent.lifted_kernel, R, resolvent.mesh, resolvent.n);
  return (R - resolvent.lifted_kernel - comp).cwiseAbs().maxCoeff();
}

PointValues solve_linear_forward(const LinearImpulsiveSystem& system, const GammaArray& gamma,
                                 const DiscreteResolvent& resolvent, const PointValues& eta) {
  PointValues lifted = lift_forcing(system, gamma, eta);
  const Eigen::Index size = lifted.size();
  Vector flat = Eigen::Map<const Vector>(lifted.data(), size);
  Vector y = flat + resolvent.weighted * flat;
  return Eigen::Map<const Matrix>(y.data(), lifted.rows(), lifted.cols());
}

double linear_forward_residual(const LinearImpulsiveSystem& system, const PointValues& eta,
                               const PointValues& y) {
  const Mesh& mesh = system.mesh;
  double worst = 0.0;
  for (int p = 0; p < mesh.point_count(); ++p) {
    Vector r = y.col(p) - eta.col(p);
    for (int q = 0; q <= p; ++q) {
      const double w = mesh.forward_weight(p, q);
      if (w != 0.0) r.noalias() -= w * system.K(p, q) * y.col(q);
    }
    for (int k = 1; k <= mesh.interval_of(p); ++k)
      r.noalias() -= system.lambda(p, k) * y.col(mesh.left_point(k));
    worst = std::max(worst, r.lpNorm<Eigen::Infinity>());
  }
  return worst;
}

PointValues solve_adjoint(const DiscreteResolvent& resolvent, const PointValues& zeta) {
  const Mesh& mesh = resolvent.mesh;
  const int P = mesh.point_count();
  PointValues scaled = zeta;
  for (int p = 0; p < P; ++p) scaled.col(p) *= mesh.trapezoid_weight(p);
  Vector flat = Eigen::Map<const Vector>(scaled.data(), scaled.size());
  Vector back = resolvent.weighted.transpose() * flat;
  PointValues z = zeta;
  for (int q = 0; q < P; ++q)
    z.col(q) += back.segment(q * resolvent.n, resolvent.n) / mesh.trapezoid_weight(q);
  return z;
}

std::vector<Vector> impulse_weighted_integrals(const LinearImpulsiveSystem& system,
                                               const PointValues& z) {
  const Mesh& mesh = system.mesh;
  const int N = mesh.impulse_count();
  std::vector<Vector> out(N, Vector::Zero(system.n));
  for (int p = 0; p < mesh.point_count(); ++p) {
    const double w = mesh.trapezoid_weight(p);
    for (int k = 1; k <= mesh.interval_of(p); ++k)
      out[k - 1].noalias() += w * system.lambda(p, k).transpose() * z.col(p);
  }
  return out;
}

double adjoint_residual(const LinearImpulsiveSystem& system, const GammaArray& gamma,
                        const PointValues& zeta, const PointValues& z) {
  const Mesh& mesh = system.mesh;
  const int N = mesh.impulse_count();
  const int P = mesh.point_count();
  const BlockArray prop = impulse_propagator(gamma);
  const auto integrals = impulse_weighted_integrals(system, z);

  // c_j = sum_{k >= j} (I+Gamma)_kj^T (int_{tau_k}^T lambda_k^T z)
  std::vector<Vector> coupling(N + 1, Vector::Zero(system.n));
  for (int j = 1; j <= N; ++j)
    for (int k = j; k <= N; ++k) coupling[j].noalias() += prop.at(k, j).transpose() * integrals[k - 1];

  double worst = 0.0;
  for (int q = 0; q < P; ++q) {
    Vector rhs = zeta.col(q);
    for (int p = q; p < P; ++p) {
      const double w = mesh.adjoint_weight(q, p);
      if (w != 0.0) rhs.noalias() += w * system.K(p, q).transpose() * z.col(p);
    }
    for (int j = 1; j <= N; ++j) {
      const int L = mesh.left_point(j);
      if (q <= L) rhs.noalias() += system.K(L, q).transpose() * coupling[j];
    }
    worst = std::max(worst, (z.col(q) - rhs).lpNorm<Eigen::Infinity>());
  }
  return worst;
}

double inner_product(const Mesh& mesh, const PointValues& a, const PointValues& b) {
  double s = 0.0;
  for (int p = 0; p < mesh.point_count(); ++p) s += mesh.trapezoid_weight(p) * a.col(p).dot(b.col(p));
  return s;
}

}  // namespace impvo
