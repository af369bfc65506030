#include "nsfem/assembly.hpp"

#include <cmath>
#include <vector>

#include <fmt/format.h>

namespace nsfem {

CoefficientField CoefficientField::constant(double diffusion, double reaction,
                                            Eigen::Vector2d advection) {
  CoefficientField c;
  if (diffusion != 0.0) {
    const Eigen::Matrix2d D = diffusion * Eigen::Matrix2d::Identity();
    c.diffusion = [D](const Point&) { return D; };
  }
  if (!advection.isZero(0.0)) {
    c.advection = [advection](const Point&) { return advection; };
  }
  if (reaction != 0.0) {
    c.reaction = [reaction](const Point&) { return reaction; };
  }
  c.coercive = diffusion > 0.0 && reaction > 0.0 && advection.isZero(0.0);
  return c;
}

Eigen::Matrix3d element_mass(double area) {
  Eigen::Matrix3d m;
  m << 2.0, 1.0, 1.0, 1.0, 2.0, 1.0, 1.0, 1.0, 2.0;
  return (area / 12.0) * m;
}

double signed_area(const Point& a, const Point& b, const Point& c) {
  return 0.5 * ((b.x - a.x) * (c.y - a.y) - (c.x - a.x) * (b.y - a.y));
}

namespace {

using Triplets = std::vector<Eigen::Triplet<double>>;

void scatter(const Triangle& tri, const Eigen::Matrix3d& local, const DofMap& dofs,
             Triplets& out) {
  for (int a = 0; a < 3; ++a) {
    const int row = dofs.dof(tri[static_cast<std::size_t>(a)]);
    if (row < 0) continue;
    for (int b = 0; b < 3; ++b) {
      const int col = dofs.dof(tri[static_cast<std::size_t>(b)]);
      if (col < 0) continue;
      out.emplace_back(row, col, local(a, b));
    }
  }
}

SparseMatrix from_triplets(int n, const Triplets& entries) {
  SparseMatrix A(n, n);
  A.setFromTriplets(entries.begin(), entries.end());
  A.makeCompressed();
  return A;
}

void check_dofs(const Mesh& mesh, const DofMap& dofs) {
  if (dofs.num_vertices() != mesh.num_vertices()) throw ShapeError("dof map does not match mesh");
}

}  // namespace

SparseMatrix assemble_mass(const Mesh& mesh, const DofMap& dofs) {
  check_dofs(mesh, dofs);
  Triplets entries;
  entries.reserve(9 * static_cast<std::size_t>(mesh.num_triangles()));
  const auto& v = mesh.vertices();
  for (const Triangle& t : mesh.triangles()) {
    const double area = std::abs(signed_area(v[static_cast<std::size_t>(t[0])],
                                             v[static_cast<std::size_t>(t[1])],
                                             v[static_cast<std::size_t>(t[2])]));
    scatter(t, element_mass(area), dofs, entries);
  }
  return from_triplets(dofs.num_dofs(), entries);
}

SparseMatrix assemble_mass(const Mesh& mesh, BoundaryCondition bc) {
  return assemble_mass(mesh, DofMap(mesh, bc));
}

SparseMatrix assemble_form(const Mesh& mesh, const CoefficientField& coeffs,
                           const DofMap& dofs) {
  check_dofs(mesh, dofs);
  Triplets entries;
  entries.reserve(9 * static_cast<std::size_t>(mesh.num_triangles()));
  const auto& v = mesh.vertices();
  for (const Triangle& t : mesh.triangles()) {
    const Point& p0 = v[static_cast<std::size_t>(t[0])];
    const Point& p1 = v[static_cast<std::size_t>(t[1])];
    const Point& p2 = v[static_cast<std::size_t>(t[2])];
    const double sa = signed_area(p0, p1, p2);
    const double area = std::abs(sa);
    if (!(area > 0.0)) {
      throw AssemblyError(fmt::format("degenerate triangle ({}, {}, {})", t[0], t[1], t[2]));
    }
    // Constant gradients of the barycentric coordinates; column a is grad lambda_a.
    Eigen::Matrix<double, 2, 3> grad;
    grad << p1.y - p2.y, p2.y - p0.y, p0.y - p1.y,  //
        p2.x - p1.x, p0.x - p2.x, p1.x - p0.x;
    grad /= 2.0 * sa;
    const Point centroid{(p0.x + p1.x + p2.x) / 3.0, (p0.y + p1.y + p2.y) / 3.0};

    Eigen::Matrix3d local = Eigen::Matrix3d::Zero();
    if (coeffs.diffusion) {
      const Eigen::Matrix2d D = coeffs.diffusion(centroid);
      if (!D.allFinite()) throw AssemblyError("non-finite diffusion coefficient");
      local += area * grad.transpose() * D * grad;
    }
    if (coeffs.advection) {
      const Eigen::Vector2d w = coeffs.advection(centroid);
      if (!w.allFinite()) throw AssemblyError("non-finite advection coefficient");
      // local(i, j) = int (w . grad phi_j) phi_i = (w . grad phi_j) * area / 3
      const Eigen::RowVector3d wg = w.transpose() * grad;
      for (int i = 0; i < 3; ++i) local.row(i) += (area / 3.0) * wg;
    }
    if (coeffs.reaction) {
      const double r = coeffs.reaction(centroid);
      if (!std::isfinite(r)) throw AssemblyError("non-finite reaction coefficient");
      local += r * element_mass(area);
    }
    scatter(t, local, dofs, entries);
  }
  return from_triplets(dofs.num_dofs(), entries);
}

SparseMatrix assemble_form(const Mesh& mesh, const CoefficientField& coeffs,
                           BoundaryCondition bc) {
  return assemble_form(mesh, coeffs, DofMap(mesh, bc));
}

}  // namespace nsfem
