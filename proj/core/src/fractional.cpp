#include "nsfem/fractional.hpp"

#include <cmath>
#include <numbers>

#include <Eigen/Eigenvalues>
#include <fmt/format.h>

namespace nsfem {

namespace {

int ceil_count(double value) {
  if (!std::isfinite(value) || value > 1e8) {
    throw DomainError(fmt::format("quadrature node count {} is too large", value));
  }
  return static_cast<int>(std::ceil(value));
}

}  // namespace

SincQuadrature::SincQuadrature(double gamma, double k) : gamma_(gamma), k_(k) {
  if (!(gamma > 0.0 && gamma <= 1.0)) {
    throw DomainError(fmt::format("gamma must lie in (0, 1], got {}", gamma));
  }
  if (!(k > 0.0)) throw DomainError(fmt::format("quadrature resolution must be positive, got {}", k));
  if (is_inverse()) return;

  constexpr double pi = std::numbers::pi;
  n_ = ceil_count(pi * pi / (2.0 * gamma * k * k));
  m_ = ceil_count(pi * pi / (2.0 * (1.0 - gamma) * k * k));
  const double scale = k * std::sin(pi * gamma) / pi;
  nodes_.reserve(static_cast<std::size_t>(n_ + m_ + 1));
  for (int j = -m_; j <= n_; ++j) {
    const double y = j * k;
    nodes_.push_back(y);
    weights_.push_back(scale * std::exp((1.0 - gamma) * y));
    shifts_.push_back(std::exp(y));
  }
}

SincQuadrature quadrature_nodes(double gamma, double k) { return SincQuadrature(gamma, k); }

double default_resolution(double gamma, double h, double c0) {
  if (!(h > 0.0)) throw DomainError("mesh size must be positive");
  if (!(c0 > 0.0)) throw DomainError("resolution constant c0 must be positive");
  const double count = std::ceil((2.0 * gamma + 1.0) * std::log(1.0 / h) / c0);
  return 1.0 / std::max(1.0, count);
}

namespace {

void check_pair(const SparseMatrix& M, const SparseMatrix& K, Eigen::Index rhs) {
  if (M.rows() != M.cols() || K.rows() != K.cols() || M.rows() != K.rows()) {
    throw ShapeError("mass and form matrices must be square and of equal size");
  }
  if (rhs != M.rows()) {
    throw ShapeError(fmt::format("load vector has length {}, expected {}", rhs, M.rows()));
  }
}

}  // namespace

Vector apply_fractional_inverse(const SparseMatrix& M, const SparseMatrix& K,
                                const SincQuadrature& quad, const Vector& b, double tol) {
  check_pair(M, K, b.size());
  return apply_fractional_inverse(M, K, quad, DenseMatrix(b), tol).col(0);
}

DenseMatrix apply_fractional_inverse(const SparseMatrix& M, const SparseMatrix& K,
                                     const SincQuadrature& quad, const DenseMatrix& B,
                                     double tol) {
  check_pair(M, K, B.rows());
  const bool symmetric = is_symmetric(K);
  if (quad.is_inverse()) {
    const LinearSolver solver =
        symmetric ? LinearSolver::spd(K, tol) : LinearSolver::general(K, tol);
    return solver.solve(B);
  }
  DenseMatrix out = DenseMatrix::Zero(B.rows(), B.cols());
  for (int j = 0; j < quad.num_nodes(); ++j) {
    const std::size_t idx = static_cast<std::size_t>(j);
    const SparseMatrix A = quad.shifts()[idx] * M + K;
    const LinearSolver solver =
        symmetric ? LinearSolver::spd(A, tol) : LinearSolver::general(A, tol);
    out.noalias() += quad.weights()[idx] * solver.solve(B);
  }
  return out;
}

FractionalOperator::FractionalOperator(const SparseMatrix& M, const SparseMatrix& K,
                                       const SincQuadrature& quad, double tol)
    : quad_(quad) {
  check_pair(M, K, M.rows());
  const bool symmetric = is_symmetric(K);
  auto factor = [&](const SparseMatrix& A) {
    return symmetric ? LinearSolver::spd(A, tol) : LinearSolver::general(A, tol);
  };
  if (quad.is_inverse()) {
    solvers_.push_back(factor(K));
    return;
  }
  solvers_.reserve(static_cast<std::size_t>(quad.num_nodes()));
  for (int j = 0; j < quad.num_nodes(); ++j) {
    solvers_.push_back(factor(quad.shifts()[static_cast<std::size_t>(j)] * M + K));
  }
}

Vector FractionalOperator::apply(const Vector& b) const {
  if (b.size() != solvers_.front().size()) {
    throw ShapeError(fmt::format("load vector has length {}, expected {}", b.size(),
                                 solvers_.front().size()));
  }
  if (quad_.is_inverse()) return solvers_.front().solve(b);
  // Summed in node order so results do not depend on scheduling.
  Vector out = Vector::Zero(b.size());
  for (std::size_t j = 0; j < solvers_.size(); ++j) {
    out.noalias() += quad_.weights()[j] * solvers_[j].solve(b);
  }
  return out;
}

DenseSpectralOracle::DenseSpectralOracle(const SparseMatrix& M, const SparseMatrix& K) {
  check_pair(M, K, M.rows());
  if (M.rows() > kDenseOracleLimit) {
    throw UnsupportedError(fmt::format("dense oracle limited to {} unknowns, got {}",
                                       kDenseOracleLimit, M.rows()));
  }
  if (!is_symmetric(K)) {
    throw UnsupportedError("dense oracle requires a symmetric form (no advection)");
  }
  const DenseMatrix Kd = to_dense(K);
  const DenseMatrix Md = to_dense(M);
  Eigen::GeneralizedSelfAdjointEigenSolver<DenseMatrix> es(0.5 * (Kd + Kd.transpose()),
                                                           0.5 * (Md + Md.transpose()));
  if (es.info() != Eigen::Success) throw NumericalError("generalized eigensolver failed");
  eigenvalues_ = es.eigenvalues();
  eigenvectors_ = es.eigenvectors();
  if (eigenvalues_.minCoeff() <= 0.0) {
    throw UnsupportedError("dense oracle requires a positive definite form");
  }
}

Vector DenseSpectralOracle::apply(double gamma, const Vector& b) const {
  if (!(gamma >= 0.0 && gamma <= 1.0)) {
    throw DomainError(fmt::format("oracle gamma must lie in [0, 1], got {}", gamma));
  }
  if (b.size() != eigenvalues_.size()) throw ShapeError("load vector length mismatch");
  const Vector coeffs = eigenvectors_.transpose() * b;
  const Vector scaled = coeffs.cwiseProduct(eigenvalues_.array().pow(-gamma).matrix());
  return eigenvectors_ * scaled;
}

Vector fractional_dense_oracle(const SparseMatrix& M, const SparseMatrix& K, double gamma,
                               const Vector& b) {
  return DenseSpectralOracle(M, K).apply(gamma, b);
}

}  // namespace nsfem
