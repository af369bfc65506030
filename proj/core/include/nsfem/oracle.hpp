#pragma once

#include <vector>

#include "nsfem/mesh.hpp"

namespace nsfem {

/// Laplacian eigenpairs on the unit square.
///
/// Dirichlet: e = 2 sin(pi n1 x) sin(pi n2 y), lambda = pi^2 (n1^2 + n2^2), n_i >= 1.
/// Neumann:   e ~ cos(pi (n1-1) x) cos(pi (n2-1) y), lambda = pi^2 ((n1-1)^2 + (n2-1)^2).
/// mu = 1 + lambda is the matching eigenvalue of I - Laplace.
struct SpectralMode {
  int n1 = 1;
  int n2 = 1;
  double lambda = 0.0;
  double mu = 1.0;
};

struct SpectralBasis {
  BoundaryCondition bc = BoundaryCondition::kNeumann;
  int cutoff = 1;
  /// Sorted by lambda, ties broken by (n1, n2).
  std::vector<SpectralMode> modes;
};

/// All modes with 1 <= n_i <= cutoff.
SpectralBasis eigenpairs_unit_square(BoundaryCondition bc, int cutoff);

/// Value of the L^2-normalized eigenfunction of `mode` at p.
double eigenfunction(BoundaryCondition bc, const SpectralMode& mode, const Point& p);

/// Variance contributed by one mode to E||u(T)||^2 for
/// du = Laplace u dt + (I - Laplace)^{-gamma} dW, u(0) = 0:
///   mu^{-2 gamma} (1 - e^{-2 lambda T}) / (2 lambda), or mu^{-2 gamma} T for lambda = 0.
double mode_variance(double lambda, double mu, double T, double gamma);

/// E||u(T)||_H^2 truncated to the modes of `basis`.
double expected_squared_norm(double T, double gamma, const SpectralBasis& basis);

struct SquaredNormEstimate {
  double value = 0.0;       // sum at the requested cutoff
  double doubled = 0.0;     // sum at twice the cutoff
  double tail_bound = 0.0;  // bound on the modes beyond the cutoff
  int cutoff = 0;
};

/// Truncated sum together with a cutoff-doubling comparison and an integral
/// bound on the neglected tail.
SquaredNormEstimate expected_squared_norm_with_tail(double T, double gamma, BoundaryCondition bc,
                                                    int cutoff);

}  // namespace nsfem
