#include <cmath>
#include <limits>
#include <numbers>
#include <random>

#include <gtest/gtest.h>

#include "nsfem/assembly.hpp"
#include "nsfem/fractional.hpp"
#include "nsfem/mesh.hpp"

using namespace nsfem;

namespace {

constexpr auto kNeumann = BoundaryCondition::kNeumann;
constexpr auto kDirichlet = BoundaryCondition::kDirichlet;

// Edge-midpoint rule, exact for quadratics: int l_i l_j = area/3 sum_m l_i(m) l_j(m).
Eigen::Matrix3d midpoint_mass(double area) {
  const double mid[3][3] = {{0.5, 0.5, 0.0}, {0.0, 0.5, 0.5}, {0.5, 0.0, 0.5}};
  Eigen::Matrix3d out = Eigen::Matrix3d::Zero();
  for (const auto& m : mid)
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) out(i, j) += area / 3.0 * m[i] * m[j];
  return out;
}

double max_rel_diff(const SparseMatrix& A, const SparseMatrix& B) {
  const DenseMatrix a = to_dense(A);
  const DenseMatrix b = to_dense(B);
  return (a - b).cwiseAbs().maxCoeff() / b.cwiseAbs().maxCoeff();
}

}  // namespace

TEST(Assembly, ElementMassIsExact) {
  for (double area : {1.0, 0.125, 3.7e-4}) {
    Eigen::Matrix3d expected;
    expected << 2, 1, 1, 1, 2, 1, 1, 1, 2;
    expected *= area / 12.0;
    EXPECT_LE((element_mass(area) - expected).cwiseAbs().maxCoeff(), 1e-14);
    EXPECT_LE((element_mass(area) - midpoint_mass(area)).cwiseAbs().maxCoeff(), 1e-14);
  }
}

TEST(Assembly, SignedArea) {
  EXPECT_DOUBLE_EQ(signed_area({0, 0}, {1, 0}, {0, 1}), 0.5);
  EXPECT_DOUBLE_EQ(signed_area({0, 0}, {0, 1}, {1, 0}), -0.5);
}

TEST(Assembly, MassTotalAndSymmetry) {
  for (int level : {0, 2, 5}) {
    const Mesh mesh = build_unit_square(level);
    const SparseMatrix M = assemble_mass(mesh, kNeumann);
    EXPECT_NEAR(M.sum(), 1.0, 1e-12);
    EXPECT_TRUE(is_symmetric(M, 0.0));
    // One entry per vertex and two per edge.
    const Eigen::Index n = mesh.cells_per_side();
    EXPECT_EQ(M.nonZeros(), (n + 1) * (n + 1) + 2 * (2 * n * (n + 1) + n * n));
  }
}

TEST(Assembly, MassIntegratesProducts) {
  // u = 1 + x, v = y: int u v over the unit square = 3/4; P1 reproduces both.
  const Mesh mesh = build_unit_square(3);
  const SparseMatrix M = assemble_mass(mesh, kNeumann);
  Vector u(mesh.num_vertices()), v(mesh.num_vertices());
  for (int i = 0; i < mesh.num_vertices(); ++i) {
    u(i) = 1.0 + mesh.vertices()[i].x;
    v(i) = mesh.vertices()[i].y;
  }
  EXPECT_NEAR(u.dot(M * v), 0.75, 1e-13);
}

TEST(Assembly, NeumannStiffnessRowSumsVanish) {
  const Mesh mesh = build_unit_square(4);
  const SparseMatrix S = assemble_form(mesh, CoefficientField::constant(1.0, 0.0), kNeumann);
  const Vector rows = S * Vector::Ones(S.cols());
  EXPECT_LE(rows.cwiseAbs().maxCoeff(), 1e-12);
  // Gradient energy of u = x is 1.
  Vector u(mesh.num_vertices());
  for (int i = 0; i < mesh.num_vertices(); ++i) u(i) = mesh.vertices()[i].x;
  EXPECT_NEAR(u.dot(S * u), 1.0, 1e-12);
}

TEST(Assembly, FormIsLinearInCoefficients) {
  const Mesh mesh = build_unit_square(3);
  for (auto bc : {kNeumann, kDirichlet}) {
    const SparseMatrix K = assemble_form(mesh, CoefficientField::constant(1.0, 1.0), bc);
    const SparseMatrix S = assemble_form(mesh, CoefficientField::constant(1.0, 0.0), bc);
    const SparseMatrix M = assemble_mass(mesh, bc);
    EXPECT_LE(max_rel_diff(SparseMatrix(S + M), K), 1e-12);
  }
}

TEST(Assembly, DirichletEigenvalueConverges) {
  double previous = std::numeric_limits<double>::infinity();
  const double exact = 2.0 * std::numbers::pi * std::numbers::pi;
  for (int level = 2; level <= 5; ++level) {
    const Mesh mesh = build_unit_square(level);
    const DenseSpectralOracle oracle(assemble_mass(mesh, kDirichlet),
                                     assemble_form(mesh, CoefficientField::constant(1.0, 0.0),
                                                   kDirichlet));
    const double err = oracle.eigenvalues()(0) - exact;
    EXPECT_GT(err, 0.0);  // conforming Galerkin: upper bound
    if (level > 2) {
      EXPECT_LT(err, previous / 3.0) << "level " << level;
    }
    previous = err;
  }
  EXPECT_LT(previous / exact, 0.01);
}

TEST(Assembly, SymmetricIffNoAdvection) {
  const Mesh mesh = build_unit_square(3);
  EXPECT_TRUE(is_symmetric(assemble_form(mesh, CoefficientField::constant(2.0, 0.5), kNeumann)));
  const auto adv = CoefficientField::constant(1.0, 1.0, Eigen::Vector2d(0.5, 0.0));
  EXPECT_FALSE(is_symmetric(assemble_form(mesh, adv, kNeumann)));
  EXPECT_FALSE(adv.coercive);
}

TEST(Assembly, AdvectionTermIntegratesExactly) {
  // int (w . grad u) v with u = x, v = 1, w = (2, 0): 2.
  const Mesh mesh = build_unit_square(2);
  CoefficientField c;
  c.advection = [](const Point&) { return Eigen::Vector2d(2.0, 0.0); };
  const SparseMatrix B = assemble_form(mesh, c, kNeumann);
  Vector u(mesh.num_vertices());
  for (int i = 0; i < mesh.num_vertices(); ++i) u(i) = mesh.vertices()[i].x;
  EXPECT_NEAR(Vector::Ones(u.size()).dot(B * u), 2.0, 1e-13);
}

TEST(Assembly, VariableDiffusion) {
  // a(x) = 1 + x: int a |grad x|^2 = 3/2, exact at the barycenter.
  const Mesh mesh = build_unit_square(3);
  CoefficientField c;
  c.diffusion = [](const Point& p) { return Eigen::Matrix2d::Identity() * (1.0 + p.x); };
  const SparseMatrix S = assemble_form(mesh, c, kNeumann);
  Vector u(mesh.num_vertices());
  for (int i = 0; i < mesh.num_vertices(); ++i) u(i) = mesh.vertices()[i].x;
  EXPECT_NEAR(u.dot(S * u), 1.5, 1e-12);
}

TEST(Assembly, CoerciveFormDominatesMass) {
  const Mesh mesh = build_unit_square(3);
  const SparseMatrix K = assemble_form(mesh, CoefficientField::constant(1.0, 1.0), kNeumann);
  const SparseMatrix M = assemble_mass(mesh, kNeumann);
  std::mt19937_64 gen(11);
  std::normal_distribution<double> normal;
  for (int s = 0; s < 20; ++s) {
    Vector u(K.rows());
    for (auto& x : u) x = normal(gen);
    EXPECT_GE(u.dot(K * u), u.dot(M * u) * (1.0 - 1e-12));
  }
  EXPECT_NO_THROW(CholeskyFactor{K});
  EXPECT_NO_THROW(CholeskyFactor{
      assemble_form(mesh, CoefficientField::constant(1.0, 0.0), kDirichlet)});
}

TEST(Assembly, NestingIdentities) {
  const std::vector<CoefficientField> forms = {
      CoefficientField::constant(1.0, 0.0), CoefficientField::constant(1.0, 1.0),
      CoefficientField::constant(0.3, 2.0, Eigen::Vector2d(1.0, -0.5))};
  for (auto [lc, lf] : {std::pair{2, 3}, std::pair{3, 5}}) {
    const Mesh coarse = build_unit_square(lc);
    const Mesh fine = build_unit_square(lf);
    for (auto bc : {kNeumann, kDirichlet}) {
      const DofMap cd(coarse, bc), fd(fine, bc);
      const SparseMatrix A = prolongation(coarse, cd, fine, fd);
      const SparseMatrix Mf = assemble_mass(fine, fd);
      EXPECT_LE(max_rel_diff(SparseMatrix(A * Mf * A.transpose()), assemble_mass(coarse, cd)),
                1e-10);
      for (const auto& form : forms) {
        const SparseMatrix Kf = assemble_form(fine, form, fd);
        EXPECT_LE(max_rel_diff(SparseMatrix(A * Kf * A.transpose()),
                               assemble_form(coarse, form, cd)),
                  1e-10);
      }
    }
  }
}

TEST(Assembly, DirichletEliminatesBoundary) {
  const Mesh mesh = build_unit_square(3);
  EXPECT_EQ(assemble_mass(mesh, kDirichlet).rows(), 49);
  EXPECT_EQ(assemble_mass(mesh, kNeumann).rows(), 81);
}

TEST(Assembly, RejectsNonFiniteCoefficients) {
  const Mesh mesh = build_unit_square(1);
  CoefficientField c = CoefficientField::constant(1.0, 0.0);
  c.reaction = [](const Point&) { return std::numeric_limits<double>::quiet_NaN(); };
  EXPECT_THROW(assemble_form(mesh, c, kNeumann), AssemblyError);
  CoefficientField d;
  d.diffusion = [](const Point&) {
    return Eigen::Matrix2d::Identity() * std::numeric_limits<double>::infinity();
  };
  EXPECT_THROW(assemble_form(mesh, d, kNeumann), AssemblyError);
}
