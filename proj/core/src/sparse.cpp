#include "nsfem/sparse.hpp"

#include <cmath>

#include <Eigen/IterativeLinearSolvers>
#include <Eigen/OrderingMethods>
#include <Eigen/SparseCholesky>
#include <Eigen/SparseLU>
#include <fmt/format.h>

namespace nsfem {

namespace {

using ColMatrix = Eigen::SparseMatrix<double, Eigen::ColMajor, int>;

constexpr int kMaxKrylovIterations = 20000;

void require_square(const SparseMatrix& A) {
  if (A.rows() != A.cols()) {
    throw ShapeError(fmt::format("matrix must be square, got {}x{}", A.rows(), A.cols()));
  }
}

void require_rhs(Eigen::Index n, Eigen::Index b) {
  if (n != b) throw ShapeError(fmt::format("right-hand side has length {}, expected {}", b, n));
}

}  // namespace

double max_abs(const SparseMatrix& A) {
  double m = 0.0;
  for (int k = 0; k < A.outerSize(); ++k) {
    for (SparseMatrix::InnerIterator it(A, k); it; ++it) m = std::max(m, std::abs(it.value()));
  }
  return m;
}

bool is_symmetric(const SparseMatrix& A, double rel_tol) {
  if (A.rows() != A.cols()) return false;
  const SparseMatrix At = A.transpose();
  const SparseMatrix diff = A - At;
  return max_abs(diff) <= rel_tol * max_abs(A);
}

double relative_residual(const SparseMatrix& A, const Vector& x, const Vector& b) {
  const Vector r = A * x - b;
  const double nb = b.norm();
  return nb > 0.0 ? r.norm() / nb : r.norm();
}

DenseMatrix to_dense(const SparseMatrix& A) { return DenseMatrix(A); }

// ---------------------------------------------------------------------------
// CholeskyFactor

struct CholeskyFactor::Impl {
  Eigen::SimplicialLLT<ColMatrix, Eigen::Lower, Eigen::AMDOrdering<int>> llt;
};

CholeskyFactor::CholeskyFactor(const SparseMatrix& A) {
  require_square(A);
  auto impl = std::make_shared<Impl>();
  const ColMatrix Ac = A;
  impl->llt.compute(Ac);
  if (impl->llt.info() != Eigen::Success) {
    throw FactorizationError(
        fmt::format("Cholesky factorization failed for {}x{} matrix (not positive definite?)",
                    A.rows(), A.cols()));
  }
  impl_ = std::move(impl);
}

Eigen::Index CholeskyFactor::size() const { return impl_->llt.rows(); }

Vector CholeskyFactor::solve(const Vector& b) const {
  require_rhs(size(), b.size());
  return impl_->llt.solve(b);
}

DenseMatrix CholeskyFactor::solve(const DenseMatrix& B) const {
  require_rhs(size(), B.rows());
  return impl_->llt.solve(B);
}

Vector CholeskyFactor::apply_factor(const Vector& z) const {
  require_rhs(size(), z.size());
  const Vector lz = impl_->llt.matrixL() * z;
  return impl_->llt.permutationPinv() * lz;
}

Eigen::VectorXi CholeskyFactor::permutation_indices() const {
  return impl_->llt.permutationP().indices();
}

SparseMatrix CholeskyFactor::lower() const {
  const ColMatrix L = impl_->llt.matrixL();
  return SparseMatrix(L);
}

DenseMatrix CholeskyFactor::reconstruct() const {
  const DenseMatrix L = DenseMatrix(lower());
  const DenseMatrix LLt = L * L.transpose();
  // A = P^{-1} L L^T P^{-T}
  const auto& Pinv = impl_->llt.permutationPinv();
  return Pinv * LLt * Pinv.transpose();
}

CholeskyFactor mass_sqrt(const SparseMatrix& M) { return CholeskyFactor(M); }

// ---------------------------------------------------------------------------
// LinearSolver

struct LinearSolver::LuImpl {
  Eigen::SparseLU<ColMatrix, Eigen::COLAMDOrdering<int>> lu;
};

struct LinearSolver::IterativeImpl {
  SparseMatrix matrix;
};

LinearSolver LinearSolver::spd(const SparseMatrix& A, double tol, Eigen::Index direct_limit) {
  require_square(A);
  if (!(tol > 0.0)) throw DomainError("solver tolerance must be positive");
  LinearSolver s;
  s.size_ = A.rows();
  s.tol_ = tol;
  if (A.rows() < direct_limit) {
    s.kind_ = SolverKind::kCholesky;
    s.cholesky_ = std::make_shared<const CholeskyFactor>(A);
  } else {
    s.kind_ = SolverKind::kConjugateGradient;
    s.iterative_ = std::make_shared<const IterativeImpl>(IterativeImpl{A});
  }
  return s;
}

LinearSolver LinearSolver::general(const SparseMatrix& A, double tol,
                                   Eigen::Index direct_limit) {
  require_square(A);
  if (!(tol > 0.0)) throw DomainError("solver tolerance must be positive");
  LinearSolver s;
  s.size_ = A.rows();
  s.tol_ = tol;
  if (A.rows() < direct_limit) {
    s.kind_ = SolverKind::kLU;
    auto impl = std::make_shared<LuImpl>();
    const ColMatrix Ac = A;
    impl->lu.analyzePattern(Ac);
    impl->lu.factorize(Ac);
    if (impl->lu.info() != Eigen::Success) {
      throw FactorizationError(fmt::format("sparse LU failed: {}", impl->lu.lastErrorMessage()));
    }
    s.lu_ = std::move(impl);
  } else {
    s.kind_ = SolverKind::kBiCGSTAB;
    s.iterative_ = std::make_shared<const IterativeImpl>(IterativeImpl{A});
  }
  return s;
}

LinearSolver LinearSolver::automatic(const SparseMatrix& A, double tol,
                                     Eigen::Index direct_limit) {
  return is_symmetric(A) ? spd(A, tol, direct_limit) : general(A, tol, direct_limit);
}

Vector LinearSolver::solve(const Vector& b) const {
  require_rhs(size_, b.size());
  switch (kind_) {
    case SolverKind::kCholesky:
      return cholesky_->solve(b);
    case SolverKind::kLU: {
      Vector x = lu_->lu.solve(b);
      if (!x.allFinite()) throw FactorizationError("sparse LU produced non-finite solution");
      return x;
    }
    case SolverKind::kConjugateGradient: {
      // Krylov solvers keep mutable iteration statistics, so each call owns one.
      Eigen::ConjugateGradient<SparseMatrix, Eigen::Lower | Eigen::Upper> cg;
      cg.setTolerance(tol_);
      cg.setMaxIterations(kMaxKrylovIterations);
      cg.compute(iterative_->matrix);
      Vector x = cg.solve(b);
      if (cg.info() != Eigen::Success) {
        throw ConvergenceError(fmt::format("CG did not converge in {} iterations (error {:.3e})",
                                           cg.iterations(), cg.error()));
      }
      return x;
    }
    case SolverKind::kBiCGSTAB: {
      Eigen::BiCGSTAB<SparseMatrix> bicg;
      bicg.setTolerance(tol_);
      bicg.setMaxIterations(kMaxKrylovIterations);
      bicg.compute(iterative_->matrix);
      Vector x = bicg.solve(b);
      if (bicg.info() != Eigen::Success) {
        throw ConvergenceError(fmt::format("BiCGSTAB failed after {} iterations (error {:.3e})",
                                           bicg.iterations(), bicg.error()));
      }
      return x;
    }
  }
  return {};
}

DenseMatrix LinearSolver::solve(const DenseMatrix& B) const {
  require_rhs(size_, B.rows());
  if (kind_ == SolverKind::kCholesky) return cholesky_->solve(B);
  if (kind_ == SolverKind::kLU) return lu_->lu.solve(B);
  DenseMatrix X(B.rows(), B.cols());
  for (Eigen::Index c = 0; c < B.cols(); ++c) X.col(c) = solve(Vector(B.col(c)));
  return X;
}

namespace {

// One step of iterative refinement is allowed before giving up.
Vector verified_solve(const LinearSolver& solver, const SparseMatrix& A, const Vector& b,
                      double tol) {
  Vector x = solver.solve(b);
  double res = relative_residual(A, x, b);
  if (res > tol) {
    const Vector r = b - A * x;
    x += solver.solve(r);
    res = relative_residual(A, x, b);
  }
  if (!(res <= tol)) {
    throw ConvergenceError(
        fmt::format("linear solve reached relative residual {:.3e} > tolerance {:.3e}", res, tol));
  }
  return x;
}

}  // namespace

Vector solve_spd(const SparseMatrix& A, const Vector& b, double tol) {
  const LinearSolver solver = LinearSolver::spd(A, tol);
  return verified_solve(solver, A, b, tol);
}

Vector solve_general(const SparseMatrix& A, const Vector& b, double tol) {
  const LinearSolver solver = LinearSolver::general(A, tol);
  return verified_solve(solver, A, b, tol);
}

Vector solve_shifted(const SparseMatrix& M, const SparseMatrix& K, double shift, const Vector& b,
                     double tol) {
  if (!(shift >= 0.0)) throw DomainError(fmt::format("shift must be nonnegative, got {}", shift));
  if (M.rows() != K.rows() || M.cols() != K.cols()) {
    throw ShapeError("mass and form matrices differ in shape");
  }
  const SparseMatrix A = shift * M + K;
  const LinearSolver solver = LinearSolver::automatic(A, tol);
  return verified_solve(solver, A, b, tol);
}

}  // namespace nsfem
