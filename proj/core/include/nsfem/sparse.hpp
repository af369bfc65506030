#pragma once

#include <memory>
#include <variant>

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include "nsfem/errors.hpp"

namespace nsfem {

/// Compressed row storage, 0-based, sorted column indices.
using SparseMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor, int>;
using Vector = Eigen::VectorXd;
using DenseMatrix = Eigen::MatrixXd;

/// Relative residual targeted by all solves unless stated otherwise.
inline constexpr double kDefaultTolerance = 1e-10;
/// Systems with at least this many unknowns go to Krylov solvers.
inline constexpr Eigen::Index kDirectSolverLimit = 200000;

/// |A_ij - A_ji| <= rel_tol * max|A| over all stored entries.
bool is_symmetric(const SparseMatrix& A, double rel_tol = 1e-12);

/// ||A x - b|| / ||b||, or ||A x|| when b = 0.
double relative_residual(const SparseMatrix& A, const Vector& x, const Vector& b);

double max_abs(const SparseMatrix& A);

/// Sparse Cholesky factorization P A P^T = L L^T with a fixed AMD ordering.
///
/// The ordering depends only on the sparsity pattern, so factors (and hence
/// noise samples drawn through them) are reproducible across runs.
/// Cheap to copy; copies share the immutable factor.
class CholeskyFactor {
 public:
  /// Throws FactorizationError if A is not (numerically) SPD.
  explicit CholeskyFactor(const SparseMatrix& A);

  Eigen::Index size() const;

  Vector solve(const Vector& b) const;
  DenseMatrix solve(const DenseMatrix& B) const;

  /// P^T L z. For z ~ N(0, I) the result has covariance A.
  Vector apply_factor(const Vector& z) const;

  /// Index vector of P, in the convention (P x)[perm[i]] = x[i].
  Eigen::VectorXi permutation_indices() const;
  /// Lower-triangular factor L.
  SparseMatrix lower() const;
  /// P^T L L^T P, which equals A up to rounding.
  DenseMatrix reconstruct() const;

 private:
  struct Impl;
  std::shared_ptr<const Impl> impl_;
};

enum class SolverKind { kCholesky, kLU, kConjugateGradient, kBiCGSTAB };

/// A factorization (or Krylov setup) of a fixed square matrix, reusable for
/// many right-hand sides. Immutable and shareable across threads.
class LinearSolver {
 public:
  /// Chooses Cholesky/CG for symmetric A and LU/BiCGSTAB otherwise; systems
  /// with at least `direct_limit` unknowns use the Krylov method.
  static LinearSolver automatic(const SparseMatrix& A, double tol = kDefaultTolerance,
                                Eigen::Index direct_limit = kDirectSolverLimit);
  static LinearSolver spd(const SparseMatrix& A, double tol = kDefaultTolerance,
                          Eigen::Index direct_limit = kDirectSolverLimit);
  static LinearSolver general(const SparseMatrix& A, double tol = kDefaultTolerance,
                              Eigen::Index direct_limit = kDirectSolverLimit);

  Vector solve(const Vector& b) const;
  DenseMatrix solve(const DenseMatrix& B) const;

  SolverKind kind() const { return kind_; }
  Eigen::Index size() const { return size_; }
  double tolerance() const { return tol_; }

 private:
  struct LuImpl;
  struct IterativeImpl;

  LinearSolver() = default;

  SolverKind kind_ = SolverKind::kCholesky;
  Eigen::Index size_ = 0;
  double tol_ = kDefaultTolerance;
  std::shared_ptr<const CholeskyFactor> cholesky_;
  std::shared_ptr<const LuImpl> lu_;
  std::shared_ptr<const IterativeImpl> iterative_;
};

/// Solves A x = b for symmetric positive definite A; the result is verified
/// to satisfy relative_residual <= tol.
Vector solve_spd(const SparseMatrix& A, const Vector& b, double tol = kDefaultTolerance);

/// Solves A x = b for square nonsingular A (sparse LU or BiCGSTAB).
Vector solve_general(const SparseMatrix& A, const Vector& b, double tol = kDefaultTolerance);

/// Solves (shift * M + K) x = b, shift >= 0.
Vector solve_shifted(const SparseMatrix& M, const SparseMatrix& K, double shift, const Vector& b,
                     double tol = kDefaultTolerance);

/// Cholesky factor of the mass matrix; one choice of square root.
CholeskyFactor mass_sqrt(const SparseMatrix& M);

/// Row-major sparse to dense; test and oracle helper.
DenseMatrix to_dense(const SparseMatrix& A);

}  // namespace nsfem
