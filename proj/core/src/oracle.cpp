#include "nsfem/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <tuple>

#include <fmt/format.h>

namespace nsfem {

namespace {

constexpr double kPi = std::numbers::pi;

// Index entering the eigenvalue for axis index n >= 1.
int frequency(BoundaryCondition bc, int n) { return bc == BoundaryCondition::kNeumann ? n - 1 : n; }

}  // namespace

SpectralBasis eigenpairs_unit_square(BoundaryCondition bc, int cutoff) {
  if (cutoff < 1) throw DomainError(fmt::format("cutoff must be at least 1, got {}", cutoff));
  SpectralBasis basis;
  basis.bc = bc;
  basis.cutoff = cutoff;
  basis.modes.reserve(static_cast<std::size_t>(cutoff) * static_cast<std::size_t>(cutoff));
  for (int n1 = 1; n1 <= cutoff; ++n1) {
    for (int n2 = 1; n2 <= cutoff; ++n2) {
      const double f1 = frequency(bc, n1);
      const double f2 = frequency(bc, n2);
      const double lambda = kPi * kPi * (f1 * f1 + f2 * f2);
      basis.modes.push_back({n1, n2, lambda, 1.0 + lambda});
    }
  }
  std::sort(basis.modes.begin(), basis.modes.end(), [](const SpectralMode& a, const SpectralMode& b) {
    return std::tie(a.lambda, a.n1, a.n2) < std::tie(b.lambda, b.n1, b.n2);
  });
  return basis;
}

double eigenfunction(BoundaryCondition bc, const SpectralMode& mode, const Point& p) {
  if (bc == BoundaryCondition::kDirichlet) {
    return 2.0 * std::sin(kPi * mode.n1 * p.x) * std::sin(kPi * mode.n2 * p.y);
  }
  const int f1 = mode.n1 - 1;
  const int f2 = mode.n2 - 1;
  const double c1 = f1 == 0 ? 1.0 : std::sqrt(2.0) * std::cos(kPi * f1 * p.x);
  const double c2 = f2 == 0 ? 1.0 : std::sqrt(2.0) * std::cos(kPi * f2 * p.y);
  return c1 * c2;
}

double mode_variance(double lambda, double mu, double T, double gamma) {
  const double noise = std::pow(mu, -2.0 * gamma);
  if (lambda == 0.0) return noise * T;
  // -expm1 keeps precision when 2 lambda T is small.
  return noise * (-std::expm1(-2.0 * lambda * T)) / (2.0 * lambda);
}

double expected_squared_norm(double T, double gamma, const SpectralBasis& basis) {
  if (!(T > 0.0)) throw DomainError(fmt::format("final time must be positive, got {}", T));
  // Smallest terms first.
  double sum = 0.0;
  for (auto it = basis.modes.rbegin(); it != basis.modes.rend(); ++it) {
    sum += mode_variance(it->lambda, it->mu, T, gamma);
  }
  return sum;
}

namespace {

// sum_{m >= a} m^{-q} <= a^{-q} + a^{1-q} / (q - 1), q > 1, a >= 1.
double power_tail(double a, double q) { return std::pow(a, -q) + std::pow(a, 1.0 - q) / (q - 1.0); }

}  // namespace

SquaredNormEstimate expected_squared_norm_with_tail(double T, double gamma, BoundaryCondition bc,
                                                    int cutoff) {
  if (!(gamma > 0.0)) throw DomainError("tail bound requires gamma > 0");
  SquaredNormEstimate est;
  est.cutoff = cutoff;
  est.value = expected_squared_norm(T, gamma, eigenpairs_unit_square(bc, cutoff));
  est.doubled = expected_squared_norm(T, gamma, eigenpairs_unit_square(bc, 2 * cutoff));

  // Neglected modes have max index > cutoff. Each contributes at most
  // mu^{-2g} / (2 lambda) <= (pi^2 |m|^2)^{-p} / 2 with p = 1 + 2 gamma.
  // Summing over the other index by integral comparison and doubling for
  // the two axes gives the bound below.
  const double p = 1.0 + 2.0 * gamma;
  const double a = bc == BoundaryCondition::kNeumann ? cutoff : cutoff + 1;
  const double beta = 0.5 * std::sqrt(kPi) * std::tgamma(p - 0.5) / std::tgamma(p);
  est.tail_bound = std::pow(kPi, -2.0 * p) * (power_tail(a, 2.0 * p) + beta * power_tail(a, 2.0 * p - 1.0));
  return est;
}

}  // namespace nsfem
