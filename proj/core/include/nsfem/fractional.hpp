#pragma once

#include <vector>

#include "nsfem/sparse.hpp"

namespace nsfem {

/// Sinc quadrature for the negative fractional power of an elliptic operator,
///
///   A^{-gamma} ~ (k sin(pi gamma) / pi) sum_{j=-M}^{N} e^{(1-gamma) y_j} (e^{y_j} + A)^{-1},
///
/// with nodes y_j = j k, N = ceil(pi^2 / (2 gamma k^2)) and
/// M = ceil(pi^2 / (2 (1 - gamma) k^2)). gamma = 1 is the plain inverse and
/// carries no nodes.
class SincQuadrature {
 public:
  SincQuadrature(double gamma, double k);

  double gamma() const { return gamma_; }
  double resolution() const { return k_; }
  /// True for gamma = 1: no nodes, the operator is A^{-1}.
  bool is_inverse() const { return gamma_ == 1.0; }

  int num_positive() const { return n_; }   // N
  int num_negative() const { return m_; }   // M
  int num_nodes() const { return static_cast<int>(nodes_.size()); }

  /// y_j for j = -M..N, in increasing order.
  const std::vector<double>& nodes() const { return nodes_; }
  /// Full weights (k sin(pi gamma) / pi) e^{(1-gamma) y_j}, aligned with nodes().
  const std::vector<double>& weights() const { return weights_; }
  /// Shifts e^{y_j}, aligned with nodes().
  const std::vector<double>& shifts() const { return shifts_; }

 private:
  double gamma_;
  double k_;
  int n_ = 0;
  int m_ = 0;
  std::vector<double> nodes_;
  std::vector<double> weights_;
  std::vector<double> shifts_;
};

/// Validates gamma in (0, 1] and k > 0; throws DomainError otherwise.
SincQuadrature quadrature_nodes(double gamma, double k);

/// Resolution rule k = 1 / max(1, ceil((2 gamma + 1) ln(1/h) / c0)).
double default_resolution(double gamma, double h, double c0 = 1.0);

/// Applies the quadrature approximation of A_h^{-gamma} to a load vector b
/// (entries (f, phi_i)) and returns nodal coefficients:
///   gamma < 1:  sum_j w_j (e^{y_j} M + K)^{-1} b
///   gamma = 1:  K^{-1} b
/// Every shifted system is factored independently; non-symmetric K is
/// handled by LU.
Vector apply_fractional_inverse(const SparseMatrix& M, const SparseMatrix& K,
                                const SincQuadrature& quad, const Vector& b,
                                double tol = kDefaultTolerance);

/// Column-wise version of apply_fractional_inverse. Each shifted matrix is
/// factored once and discarded after all columns are processed, which keeps
/// memory flat for fine resolutions with many nodes.
DenseMatrix apply_fractional_inverse(const SparseMatrix& M, const SparseMatrix& K,
                                     const SincQuadrature& quad, const DenseMatrix& B,
                                     double tol = kDefaultTolerance);

/// Precomputed factors of all shifted systems, for repeated application.
class FractionalOperator {
 public:
  FractionalOperator(const SparseMatrix& M, const SparseMatrix& K, const SincQuadrature& quad,
                     double tol = kDefaultTolerance);

  Vector apply(const Vector& b) const;

  const SincQuadrature& quadrature() const { return quad_; }
  /// Number of factored systems: 1 for gamma = 1, N + M + 1 otherwise.
  int num_factors() const { return static_cast<int>(solvers_.size()); }

 private:
  SincQuadrature quad_;
  std::vector<LinearSolver> solvers_;
};

/// Largest dimension accepted by the dense oracle.
inline constexpr Eigen::Index kDenseOracleLimit = 2000;

/// Exact discrete A_h^{-gamma} applied to a load vector via the generalized
/// eigendecomposition K V = M V Lambda, V^T M V = I: returns V Lambda^{-gamma} V^T b.
/// gamma may be any value in [0, 1]. Requires symmetric K and dimension
/// <= kDenseOracleLimit (UnsupportedError otherwise).
Vector fractional_dense_oracle(const SparseMatrix& M, const SparseMatrix& K, double gamma,
                               const Vector& b);

/// The same oracle with the eigendecomposition computed once.
class DenseSpectralOracle {
 public:
  DenseSpectralOracle(const SparseMatrix& M, const SparseMatrix& K);

  Vector apply(double gamma, const Vector& b) const;
  /// Generalized eigenvalues in increasing order.
  const Vector& eigenvalues() const { return eigenvalues_; }
  /// M-orthonormal eigenvectors (columns).
  const DenseMatrix& eigenvectors() const { return eigenvectors_; }

 private:
  Vector eigenvalues_;
  DenseMatrix eigenvectors_;
};

}  // namespace nsfem
