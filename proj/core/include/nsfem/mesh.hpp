#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <vector>

#include "nsfem/errors.hpp"
#include "nsfem/sparse.hpp"

namespace nsfem {

struct Point {
  double x = 0.0;
  double y = 0.0;

  friend bool operator==(const Point&, const Point&) = default;
};

/// Axis-aligned rectangle [x0, x1] x [y0, y1].
struct Rectangle {
  double x0 = 0.0;
  double y0 = 0.0;
  double x1 = 1.0;
  double y1 = 1.0;

  double width() const { return x1 - x0; }
  double height() const { return y1 - y0; }
  double area() const { return width() * height(); }

  friend bool operator==(const Rectangle&, const Rectangle&) = default;
};

enum class BoundaryCondition { kDirichlet, kNeumann };

using Triangle = std::array<int, 3>;

/// Structured criss-cross triangulation of a rectangle.
///
/// The rectangle is divided into n x n congruent cells with
/// n = base_cells * 2^level. Every cell is split into two triangles along the
/// diagonal from its lower-left to its upper-right corner. Vertices are
/// numbered lexicographically in (y, x): vertex (ix, iy) has index
/// iy * (n + 1) + ix. Uniform refinement of level l reproduces level l + 1
/// exactly, so the family is nested.
///
/// Meshes are immutable after construction.
class Mesh {
 public:
  static Mesh build(const Rectangle& domain, int base_cells, int level);

  const std::vector<Point>& vertices() const { return vertices_; }
  const std::vector<Triangle>& triangles() const { return triangles_; }
  const std::vector<std::uint8_t>& boundary_flags() const { return boundary_; }
  std::vector<int> boundary_vertices() const;

  const Rectangle& domain() const { return domain_; }
  int base_cells() const { return base_cells_; }
  int level() const { return level_; }
  /// Cells per side.
  int cells_per_side() const { return cells_; }
  int num_vertices() const { return static_cast<int>(vertices_.size()); }
  int num_triangles() const { return static_cast<int>(triangles_.size()); }

  /// Maximum triangle diameter.
  double h() const;
  /// Minimum triangle diameter (equal to h() for this family).
  double h_min() const;

  int vertex_index(int ix, int iy) const { return iy * (cells_ + 1) + ix; }

  friend bool operator==(const Mesh&, const Mesh&) = default;

 private:
  Mesh() = default;

  Rectangle domain_;
  int base_cells_ = 1;
  int level_ = 0;
  int cells_ = 1;
  std::vector<Point> vertices_;
  std::vector<Triangle> triangles_;
  std::vector<std::uint8_t> boundary_;
};

/// Uniform criss-cross mesh of the unit square with 2^level cells per side.
Mesh build_unit_square(int level);

/// The level + 1 member of the same family.
Mesh refine(const Mesh& mesh);

/// Vertices that are eliminated from the finite element space.
/// Dirichlet: all boundary vertices. Neumann: none.
std::vector<int> boundary_dofs(const Mesh& mesh, BoundaryCondition bc);

/// Map between mesh vertices and free degrees of freedom.
class DofMap {
 public:
  DofMap(const Mesh& mesh, BoundaryCondition bc);

  int num_dofs() const { return static_cast<int>(dof_to_vertex_.size()); }
  int num_vertices() const { return static_cast<int>(vertex_to_dof_.size()); }
  /// -1 for eliminated vertices.
  int dof(int vertex) const { return vertex_to_dof_[static_cast<std::size_t>(vertex)]; }
  int vertex(int dof) const { return dof_to_vertex_[static_cast<std::size_t>(dof)]; }
  BoundaryCondition bc() const { return bc_; }

  /// Drops eliminated vertex entries.
  Vector restrict_vector(const Vector& vertex_values) const;
  /// Inserts zeros at eliminated vertices.
  Vector extend_vector(const Vector& dof_values) const;

 private:
  BoundaryCondition bc_;
  std::vector<int> vertex_to_dof_;
  std::vector<int> dof_to_vertex_;
};

/// Prolongation matrix A with A(i, j) = phi_i(x_j): coarse nodal basis
/// functions evaluated at fine vertices. Rows index coarse vertices,
/// columns fine vertices. Throws ConfigError unless `fine` is a refinement
/// of `coarse`.
SparseMatrix prolongation(const Mesh& coarse, const Mesh& fine);

/// Prolongation restricted to free dofs on both sides.
SparseMatrix prolongation(const Mesh& coarse, const DofMap& coarse_dofs, const Mesh& fine,
                          const DofMap& fine_dofs);

/// Plain-text dump: header `vertices N triangles M`, then N lines
/// `x y boundary_flag`, then M lines `i j k` with 0-based indices.
void write_mesh(std::ostream& out, const Mesh& mesh);

}  // namespace nsfem
