#include <cmath>
#include <numbers>

#include <gtest/gtest.h>

#include "nsfem/assembly.hpp"
#include "nsfem/mesh.hpp"
#include "nsfem/oracle.hpp"

using namespace nsfem;

namespace {
constexpr auto kNeumann = BoundaryCondition::kNeumann;
constexpr auto kDirichlet = BoundaryCondition::kDirichlet;
constexpr double kPi2 = std::numbers::pi * std::numbers::pi;
}  // namespace

TEST(Oracle, LowestModes) {
  const auto neumann = eigenpairs_unit_square(kNeumann, 4);
  ASSERT_EQ(neumann.modes.size(), 16u);
  EXPECT_EQ(neumann.modes[0].n1, 1);
  EXPECT_EQ(neumann.modes[0].n2, 1);
  EXPECT_DOUBLE_EQ(neumann.modes[0].lambda, 0.0);
  EXPECT_DOUBLE_EQ(neumann.modes[0].mu, 1.0);
  EXPECT_DOUBLE_EQ(eigenfunction(kNeumann, neumann.modes[0], {0.3, 0.8}), 1.0);
  EXPECT_NEAR(neumann.modes[1].lambda, kPi2, 1e-12);

  const auto dirichlet = eigenpairs_unit_square(kDirichlet, 4);
  EXPECT_NEAR(dirichlet.modes[0].lambda, 2.0 * kPi2, 1e-12);
  EXPECT_NEAR(eigenfunction(kDirichlet, dirichlet.modes[0], {0.5, 0.5}), 2.0, 1e-14);
  EXPECT_THROW(eigenpairs_unit_square(kNeumann, 0), DomainError);
}

TEST(Oracle, ModesSorted) {
  const auto basis = eigenpairs_unit_square(kDirichlet, 30);
  for (std::size_t i = 1; i < basis.modes.size(); ++i) {
    EXPECT_LE(basis.modes[i - 1].lambda, basis.modes[i].lambda);
  }
}

TEST(Oracle, EigenvalueGrowthIsLinear) {
  // Weyl: lambda_j ~ 4 pi j on the unit square.
  for (auto bc : {kNeumann, kDirichlet}) {
    const auto basis = eigenpairs_unit_square(bc, 80);
    for (int j = 2; j <= 500; ++j) {
      const double lambda = basis.modes[static_cast<std::size_t>(j - 1)].lambda;
      EXPECT_GE(lambda, 4.0 * (j - 1)) << j;
      EXPECT_LE(lambda, 40.0 * j) << j;
    }
  }
}

TEST(Oracle, DiscreteRayleighQuotientMatches) {
  // Interpolation error is O(h^2); at h = 1/64 both checks hold to well under 1%.
  const Mesh mesh = build_unit_square(6);
  const auto basis = eigenpairs_unit_square(kNeumann, 3);
  const SparseMatrix M = assemble_mass(mesh, kNeumann);
  const SparseMatrix S = assemble_form(mesh, CoefficientField::constant(1.0, 0.0), kNeumann);
  for (const auto& mode : basis.modes) {
    Vector v(mesh.num_vertices());
    for (int i = 0; i < mesh.num_vertices(); ++i) {
      v(i) = eigenfunction(kNeumann, mode, mesh.vertices()[i]);
    }
    EXPECT_NEAR(v.dot(M * v), 1.0, 0.005);
    EXPECT_NEAR(v.dot(S * v) / v.dot(M * v), mode.lambda, 0.01 * mode.lambda + 1e-12);
  }
}

TEST(Oracle, ModeVariance) {
  EXPECT_DOUBLE_EQ(mode_variance(0.0, 1.0, 0.7, 1.0), 0.7);
  EXPECT_NEAR(mode_variance(10.0, 11.0, 1e3, 0.5), 1.0 / (11.0 * 20.0), 1e-15);
  EXPECT_NEAR(mode_variance(1e-9, 1.0, 2.0, 1.0), 2.0, 1e-8);
  EXPECT_DOUBLE_EQ(mode_variance(5.0, 6.0, 0.0, 1.0), 0.0);
}

TEST(Oracle, FrozenReferenceValue) {
  const auto est = expected_squared_norm_with_tail(0.25, 1.0, kNeumann, 200);
  EXPECT_NEAR(est.value, 0.25093876330155, 1e-12);
  EXPECT_LE(std::abs(est.doubled - est.value), 1e-6 * est.value);
  EXPECT_GE(est.tail_bound, est.doubled - est.value);
  EXPECT_LE(est.tail_bound, 1e-6);
}

TEST(Oracle, TailBoundHoldsForRougherNoise) {
  for (double gamma : {0.25, 0.5}) {
    for (auto bc : {kNeumann, kDirichlet}) {
      const auto est = expected_squared_norm_with_tail(1.0, gamma, bc, 50);
      EXPECT_GE(est.tail_bound, est.doubled - est.value) << gamma;
      EXPECT_GT(est.doubled, est.value);
    }
  }
}

TEST(Oracle, Monotonicity) {
  const auto basis = eigenpairs_unit_square(kDirichlet, 100);
  EXPECT_LT(expected_squared_norm(0.1, 1.0, basis), expected_squared_norm(0.2, 1.0, basis));
  EXPECT_GT(expected_squared_norm(0.2, 0.5, basis), expected_squared_norm(0.2, 1.0, basis));
  EXPECT_THROW(expected_squared_norm(0.0, 1.0, basis), DomainError);
}
