#pragma once

// Linear impulsive Volterra machinery on a mesh:
//
//   y(t) = eta(t) + int_0^t K(t,s) y(s) ds + sum_{i: tau_i < t} lambda_i(t) y(tau_i^-)
//
// The impulse couplings are eliminated with the block arrays Lambda and
// Gamma, giving a plain Volterra equation with lifted kernel and forcing,
// which is solved through its discrete resolvent.

#include "impvo/core_types.hpp"
#include "impvo/mesh.hpp"
#include "impvo/state_solver.hpp"

#include <vector>

namespace impvo {

/// Values of a function at every mesh point: column p is the value at
/// point p. Row-vector valued functions (co-states) are stored transposed.
using PointValues = Matrix;

/// Square array of n x n blocks indexed 1..size in both directions.
class BlockArray {
 public:
  BlockArray() = default;
  BlockArray(int size, int block_dim);

  int size() const { return size_; }
  int block_dim() const { return n_; }
  Matrix& at(int i, int j) { return blocks_[index(i, j)]; }
  const Matrix& at(int i, int j) const { return blocks_[index(i, j)]; }

  BlockArray operator*(const BlockArray& other) const;
  BlockArray operator+(const BlockArray& other) const;
  bool is_zero() const;
  bool is_strictly_lower() const;
  double max_abs() const;
  static BlockArray identity(int size, int block_dim);

 private:
  int index(int i, int j) const { return (i - 1) * size_ + (j - 1); }
  int size_ = 0;
  int n_ = 0;
  std::vector<Matrix> blocks_;
};

/// Lambda_ij = lambda_j(tau_i^-) for 2 <= i <= N+1, j < i; row N+1 is taken
/// at T^-.
using LambdaArray = BlockArray;
/// Gamma = Lambda + Lambda^2 + ... (finite by nilpotency).
using GammaArray = BlockArray;

/// Linearized impulsive system around a trajectory.
struct LinearImpulsiveSystem {
  Mesh mesh;
  int n = 1;
  /// Block (p, q) = K(t_p, s_q) for q <= p, zero above the block diagonal.
  Matrix kernel;
  /// gains[p][k-1] = lambda_k(t_p) for impulses k = 1..interval_of(p).
  std::vector<std::vector<Matrix>> gains;

  auto K(int p, int q) const { return kernel.block(p * n, q * n, n, n); }
  const Matrix& lambda(int p, int k) const { return gains[p][k - 1]; }
};

/// K(t,s) = f_y(t, s, y(s), u(s)), lambda_k(t) = dg(t, ...)/dy_k.
LinearImpulsiveSystem linearize(const ProblemSpec& problem, const PiecewiseTrajectory& trajectory);

LambdaArray build_lambda(const LinearImpulsiveSystem& system);
LambdaArray build_lambda(const ProblemSpec& problem, const PiecewiseTrajectory& trajectory);

GammaArray build_gamma(const LambdaArray& lambda);

/// Reference Gamma built by enumerating increasing index chains. Rejects
/// arrays with more than 13 rows (N > 12).
GammaArray gamma_by_paths(const LambdaArray& lambda);

/// I + Gamma: maps pre-coupling values v_j to the left limits y(tau_i^-).
BlockArray impulse_propagator(const GammaArray& gamma);

/// Lifted kernel Ktilde (block (p, q) for q <= p).
Matrix lift_kernel(const LinearImpulsiveSystem& system, const GammaArray& gamma);

/// Lifted forcing etatilde.
PointValues lift_forcing(const LinearImpulsiveSystem& system, const GammaArray& gamma,
                         const PointValues& eta);

/// Discrete resolvent of the lifted kernel.
///
/// `weighted` stores W o R, the block matrix with (p, q) block
/// forward_weight(p, q) * R(t_p, s_q). It satisfies W o R = A + A (W o R)
/// with A = W o Ktilde, i.e. it is the forward substitution of the lifted
/// Nystrom system, and y = etatilde + (W o R) etatilde exactly.
struct DiscreteResolvent {
  Mesh mesh;
  int n = 1;
  Matrix lifted_kernel;
  Matrix weighted;

  /// Kernel value R(t_p, s_q).
  Matrix R(int p, int q) const;
  auto weighted_block(int p, int q) const { return weighted.block(p * n, q * n, n, n); }
};

DiscreteResolvent discrete_resolvent(const Matrix& lifted_kernel, const Mesh& mesh, int n);

/// Composition (X o Y)(p, q) = sum_r composition_weight(p, r, q) X(p, r) Y(r, q)
/// over block-lower-triangular kernels.
Matrix compose_kernels(const Matrix& X, const Matrix& Y, const Mesh& mesh, int n);

/// max |R - Ktilde - Ktilde o R| over blocks.
double resolvent_identity_residual(const DiscreteResolvent& resolvent);

/// Solution of the linear impulsive equation with forcing eta, via the lift
/// and the resolvent representation y = etatilde + int_0^t R(t,s) etatilde(s) ds.
PointValues solve_linear_forward(const LinearImpulsiveSystem& system, const GammaArray& gamma,
                                 const DiscreteResolvent& resolvent, const PointValues& eta);

/// Max-norm residual of the un-lifted discrete equation.
double linear_forward_residual(const LinearImpulsiveSystem& system, const PointValues& eta,
                               const PointValues& y);

/// Adjoint z(t) = zeta(t) + int_t^T zeta(s) R(s,t) ds for a row-valued forcing
/// zeta (stored transposed).
PointValues solve_adjoint(const DiscreteResolvent& resolvent, const PointValues& zeta);

/// Max-norm residual of the adjoint equation written with the original
/// kernel and the impulse terms
///   z(t) = zeta(t) + int_t^T z(s) K(s,t) ds
///        + sum_{j: t <= tau_j^-} sum_{k >= j} (int_{tau_k}^T z(s) lambda_k(s) ds) (I+Gamma)_kj K(tau_j^-, t).
double adjoint_residual(const LinearImpulsiveSystem& system, const GammaArray& gamma,
                        const PointValues& zeta, const PointValues& z);

/// Trapezoid inner product over [0, T].
double inner_product(const Mesh& mesh, const PointValues& a, const PointValues& b);

/// int_{tau_k}^T z(s)^T lambda_k(s) ds for every impulse k = 1..N; entry k-1
/// is the resulting row stored as a column.
std::vector<Vector> impulse_weighted_integrals(const LinearImpulsiveSystem& system,
                                               const PointValues& z);

}  // namespace impvo
