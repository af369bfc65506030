#include <cmath>
#include <set>
#include <sstream>

#include <gtest/gtest.h>

#include "nsfem/mesh.hpp"

namespace nsfem {
namespace {

TEST(Mesh, SmallestLevels) {
  const Mesh m0 = build_unit_square(0);
  EXPECT_EQ(m0.num_vertices(), 4);
  EXPECT_EQ(m0.num_triangles(), 2);
  EXPECT_DOUBLE_EQ(m0.h(), std::sqrt(2.0));

  const Mesh m1 = build_unit_square(1);
  EXPECT_EQ(m1.num_vertices(), 9);
  EXPECT_EQ(m1.num_triangles(), 8);
  EXPECT_DOUBLE_EQ(m1.h(), std::sqrt(2.0) / 2.0);
}

TEST(Mesh, ReferenceResolutionAtLevelSeven) {
  const Mesh m = build_unit_square(7);
  EXPECT_DOUBLE_EQ(m.h(), std::pow(2.0, -7.0 + 0.5));
  EXPECT_EQ(m.num_vertices(), 129 * 129);
}

TEST(Mesh, StructuredFamilyCounts) {
  for (int base : {1, 3}) {
    for (int level = 0; level <= 4; ++level) {
      const Mesh m = Mesh::build(Rectangle{0.0, 0.0, 2.0, 2.0}, base, level);
      const int n = base << level;
      EXPECT_EQ(m.num_vertices(), (n + 1) * (n + 1));
      EXPECT_NEAR(m.h(), std::sqrt(2.0) * 2.0 / n, 1e-15);
      EXPECT_DOUBLE_EQ(m.h() / m.h_min(), 1.0);
    }
  }
}

TEST(Mesh, TrianglesArePositiveAndConforming) {
  const Mesh m = build_unit_square(3);
  std::map<std::pair<int, int>, int> edge_count;
  for (const Triangle& t : m.triangles()) {
    const auto& v = m.vertices();
    const Point a = v[t[0]], b = v[t[1]], c = v[t[2]];
    const double area = 0.5 * ((b.x - a.x) * (c.y - a.y) - (c.x - a.x) * (b.y - a.y));
    EXPECT_GT(area, 0.0);
    for (int e = 0; e < 3; ++e) {
      int i = t[e], j = t[(e + 1) % 3];
      if (i > j) std::swap(i, j);
      ++edge_count[{i, j}];
    }
  }
  for (const auto& [edge, count] : edge_count) EXPECT_LE(count, 2);
}

TEST(Mesh, VertexOrderingIsLexicographicInYThenX) {
  const Mesh m = build_unit_square(2);
  for (int i = 1; i < m.num_vertices(); ++i) {
    const Point& p = m.vertices()[i - 1];
    const Point& q = m.vertices()[i];
    EXPECT_TRUE(p.y < q.y || (p.y == q.y && p.x < q.x));
  }
}

TEST(Mesh, RefineMatchesDirectConstruction) {
  EXPECT_EQ(refine(build_unit_square(0)), build_unit_square(1));
  Mesh m = build_unit_square(1);
  for (int i = 0; i < 3; ++i) m = refine(m);
  EXPECT_EQ(m, build_unit_square(4));
}

TEST(Mesh, RefineNestsVerticesAndHalvesH) {
  const Mesh coarse = build_unit_square(2);
  const Mesh fine = refine(coarse);
  EXPECT_DOUBLE_EQ(fine.h(), coarse.h() / 2.0);
  std::set<std::pair<double, double>> fine_points;
  for (const Point& p : fine.vertices()) fine_points.insert({p.x, p.y});
  for (const Point& p : coarse.vertices()) EXPECT_TRUE(fine_points.count({p.x, p.y}));
}

TEST(Mesh, RefinedTrianglesCoverCoarseTriangle) {
  // Every fine triangle lies in exactly one coarse triangle, four per coarse one.
  const Mesh coarse = build_unit_square(1);
  const Mesh fine = refine(coarse);
  std::vector<int> hits(coarse.num_triangles(), 0);
  for (const Triangle& ft : fine.triangles()) {
    const auto& fv = fine.vertices();
    const Point c{(fv[ft[0]].x + fv[ft[1]].x + fv[ft[2]].x) / 3.0,
                  (fv[ft[0]].y + fv[ft[1]].y + fv[ft[2]].y) / 3.0};
    int owner = -1;
    for (int k = 0; k < coarse.num_triangles(); ++k) {
      const Triangle& t = coarse.triangles()[k];
      const auto& v = coarse.vertices();
      auto side = [&](const Point& a, const Point& b) {
        return (b.x - a.x) * (c.y - a.y) - (c.x - a.x) * (b.y - a.y);
      };
      if (side(v[t[0]], v[t[1]]) > 0 && side(v[t[1]], v[t[2]]) > 0 && side(v[t[2]], v[t[0]]) > 0) {
        owner = k;
      }
    }
    ASSERT_GE(owner, 0);
    ++hits[owner];
  }
  for (int h : hits) EXPECT_EQ(h, 4);
}

TEST(BoundaryDofs, Counts) {
  EXPECT_EQ(boundary_dofs(build_unit_square(1), BoundaryCondition::kDirichlet).size(), 8u);
  EXPECT_TRUE(boundary_dofs(build_unit_square(3), BoundaryCondition::kNeumann).empty());
  EXPECT_EQ(boundary_dofs(build_unit_square(0), BoundaryCondition::kDirichlet),
            (std::vector<int>{0, 1, 2, 3}));
}

TEST(DofMap, DirichletKeepsInteriorOnly) {
  const Mesh m = build_unit_square(2);
  const DofMap dofs(m, BoundaryCondition::kDirichlet);
  EXPECT_EQ(dofs.num_dofs(), 9);
  Vector values = Vector::LinSpaced(m.num_vertices(), 0.0, 24.0);
  const Vector extended = dofs.extend_vector(dofs.restrict_vector(values));
  for (int v = 0; v < m.num_vertices(); ++v) {
    EXPECT_EQ(extended[v], m.boundary_flags()[v] ? 0.0 : values[v]);
  }
  EXPECT_THROW(dofs.restrict_vector(Vector::Zero(3)), ShapeError);
}

TEST(Prolongation, NodalValuesAndEdgeMidpoints) {
  const Mesh coarse = build_unit_square(1);
  const Mesh fine = refine(coarse);
  const SparseMatrix A = prolongation(coarse, fine);
  ASSERT_EQ(A.rows(), 9);
  ASSERT_EQ(A.cols(), 25);
  // Coarse vertex (1,1) (the centre) coincides with fine vertex (2,2).
  EXPECT_DOUBLE_EQ(A.coeff(coarse.vertex_index(1, 1), fine.vertex_index(2, 2)), 1.0);
  EXPECT_DOUBLE_EQ(A.coeff(coarse.vertex_index(0, 1), fine.vertex_index(2, 2)), 0.0);
  // Midpoint of the coarse edge (0,0)-(1,0).
  EXPECT_DOUBLE_EQ(A.coeff(coarse.vertex_index(0, 0), fine.vertex_index(1, 0)), 0.5);
  EXPECT_DOUBLE_EQ(A.coeff(coarse.vertex_index(1, 0), fine.vertex_index(1, 0)), 0.5);
  // Midpoint of a diagonal edge (0,0)-(1,1).
  EXPECT_DOUBLE_EQ(A.coeff(coarse.vertex_index(0, 0), fine.vertex_index(1, 1)), 0.5);
  EXPECT_DOUBLE_EQ(A.coeff(coarse.vertex_index(1, 1), fine.vertex_index(1, 1)), 0.5);
}

TEST(Prolongation, PartitionOfUnityAcrossSeveralLevels) {
  for (auto [lc, lf] : {std::pair{0, 1}, std::pair{1, 3}, std::pair{2, 5}}) {
    const SparseMatrix A = prolongation(build_unit_square(lc), build_unit_square(lf));
    const Vector col_sums = Vector::Ones(A.rows()).transpose() * A;
    EXPECT_LT((col_sums.array() - 1.0).abs().maxCoeff(), 1e-15);
  }
}

TEST(Prolongation, InterpolatesAffineFunctionsExactly) {
  const Mesh coarse = build_unit_square(2);
  const Mesh fine = build_unit_square(4);
  const SparseMatrix A = prolongation(coarse, fine);
  auto f = [](const Point& p) { return 0.3 + 2.0 * p.x - 1.5 * p.y; };
  Vector c(coarse.num_vertices());
  for (int i = 0; i < coarse.num_vertices(); ++i) c[i] = f(coarse.vertices()[i]);
  const Vector on_fine = A.transpose() * c;
  for (int j = 0; j < fine.num_vertices(); ++j) EXPECT_NEAR(on_fine[j], f(fine.vertices()[j]), 1e-14);
}

TEST(Prolongation, RejectsNonNestedMeshes) {
  EXPECT_THROW(prolongation(build_unit_square(3), build_unit_square(2)), ConfigError);
  EXPECT_THROW(prolongation(build_unit_square(1), Mesh::build(Rectangle{0, 0, 2, 1}, 1, 2)),
               ConfigError);
}

TEST(Prolongation, CompositionOfOneLevelSteps) {
  const Mesh m3 = build_unit_square(3), m4 = build_unit_square(4), m5 = build_unit_square(5);
  const SparseMatrix direct = prolongation(m3, m5);
  const SparseMatrix chained = prolongation(m3, m4) * prolongation(m4, m5);
  EXPECT_LT((DenseMatrix(direct) - DenseMatrix(chained)).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(MeshDump, HeaderAndLineCount) {
  std::ostringstream out;
  write_mesh(out, build_unit_square(1));
  std::istringstream in(out.str());
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "vertices 9 triangles 8");
  int lines = 0;
  while (std::getline(in, line)) ++lines;
  EXPECT_EQ(lines, 17);
  EXPECT_NE(out.str().find("0.5 0.5 0\n"), std::string::npos);
}

}  // namespace
}  // namespace nsfem
