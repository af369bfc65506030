#include "nsfem/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include <fmt/format.h>

namespace nsfem {

Mesh Mesh::build(const Rectangle& domain, int base_cells, int level) {
  if (level < 0) throw DomainError(fmt::format("mesh level must be nonnegative, got {}", level));
  if (base_cells < 1) throw DomainError("base_cells must be positive");
  if (!(domain.width() > 0.0) || !(domain.height() > 0.0)) {
    throw DomainError("rectangle must have positive width and height");
  }
  if (level > 24) throw DomainError("mesh level too large");

  Mesh mesh;
  mesh.domain_ = domain;
  mesh.base_cells_ = base_cells;
  mesh.level_ = level;
  mesh.cells_ = base_cells << level;

  const int n = mesh.cells_;
  const auto nv = static_cast<std::size_t>(n + 1) * static_cast<std::size_t>(n + 1);
  mesh.vertices_.reserve(nv);
  mesh.boundary_.reserve(nv);
  for (int iy = 0; iy <= n; ++iy) {
    // Vertices are placed by exact fractions of the side so that coarse and
    // fine coordinates agree bit for bit.
    const double y = iy == n ? domain.y1 : domain.y0 + domain.height() * iy / n;
    for (int ix = 0; ix <= n; ++ix) {
      const double x = ix == n ? domain.x1 : domain.x0 + domain.width() * ix / n;
      mesh.vertices_.push_back({x, y});
      mesh.boundary_.push_back(ix == 0 || iy == 0 || ix == n || iy == n ? 1 : 0);
    }
  }

  mesh.triangles_.reserve(2 * static_cast<std::size_t>(n) * static_cast<std::size_t>(n));
  for (int iy = 0; iy < n; ++iy) {
    for (int ix = 0; ix < n; ++ix) {
      const int v00 = mesh.vertex_index(ix, iy);
      const int v10 = mesh.vertex_index(ix + 1, iy);
      const int v01 = mesh.vertex_index(ix, iy + 1);
      const int v11 = mesh.vertex_index(ix + 1, iy + 1);
      mesh.triangles_.push_back({v00, v10, v11});
      mesh.triangles_.push_back({v00, v11, v01});
    }
  }
  return mesh;
}

std::vector<int> Mesh::boundary_vertices() const {
  std::vector<int> out;
  for (int v = 0; v < num_vertices(); ++v) {
    if (boundary_[static_cast<std::size_t>(v)] != 0) out.push_back(v);
  }
  return out;
}

double Mesh::h() const {
  const double dx = domain_.width() / cells_;
  const double dy = domain_.height() / cells_;
  return std::hypot(dx, dy);
}

double Mesh::h_min() const {
  // All triangles are congruent; the diameter is the cell diagonal.
  return h();
}

Mesh build_unit_square(int level) { return Mesh::build(Rectangle{}, 1, level); }

Mesh refine(const Mesh& mesh) {
  return Mesh::build(mesh.domain(), mesh.base_cells(), mesh.level() + 1);
}

std::vector<int> boundary_dofs(const Mesh& mesh, BoundaryCondition bc) {
  if (bc == BoundaryCondition::kNeumann) return {};
  return mesh.boundary_vertices();
}

DofMap::DofMap(const Mesh& mesh, BoundaryCondition bc)
    : bc_(bc), vertex_to_dof_(static_cast<std::size_t>(mesh.num_vertices()), -1) {
  const auto& flags = mesh.boundary_flags();
  for (int v = 0; v < mesh.num_vertices(); ++v) {
    if (bc == BoundaryCondition::kDirichlet && flags[static_cast<std::size_t>(v)] != 0) continue;
    vertex_to_dof_[static_cast<std::size_t>(v)] = static_cast<int>(dof_to_vertex_.size());
    dof_to_vertex_.push_back(v);
  }
}

Vector DofMap::restrict_vector(const Vector& vertex_values) const {
  if (vertex_values.size() != num_vertices()) {
    throw ShapeError(fmt::format("expected {} vertex values, got {}", num_vertices(),
                                 vertex_values.size()));
  }
  Vector out(num_dofs());
  for (int d = 0; d < num_dofs(); ++d) out[d] = vertex_values[vertex(d)];
  return out;
}

Vector DofMap::extend_vector(const Vector& dof_values) const {
  if (dof_values.size() != num_dofs()) {
    throw ShapeError(fmt::format("expected {} dof values, got {}", num_dofs(), dof_values.size()));
  }
  Vector out = Vector::Zero(num_vertices());
  for (int d = 0; d < num_dofs(); ++d) out[vertex(d)] = dof_values[d];
  return out;
}

namespace {

void check_nested(const Mesh& coarse, const Mesh& fine) {
  if (!(coarse.domain() == fine.domain()) || coarse.base_cells() != fine.base_cells() ||
      fine.level() < coarse.level()) {
    throw ConfigError(fmt::format(
        "meshes are not nested (coarse level {}, fine level {}, or different domains)",
        coarse.level(), fine.level()));
  }
}

}  // namespace

SparseMatrix prolongation(const Mesh& coarse, const Mesh& fine) {
  check_nested(coarse, fine);
  const int nc = coarse.cells_per_side();
  const int ratio = fine.cells_per_side() / nc;
  const double inv_ratio = 1.0 / ratio;

  std::vector<Eigen::Triplet<double>> entries;
  entries.reserve(static_cast<std::size_t>(fine.num_vertices()) * 3);
  const int nf = fine.cells_per_side();
  for (int iy = 0; iy <= nf; ++iy) {
    const int cy = std::min(iy / ratio, nc - 1);
    const double t = (iy - cy * ratio) * inv_ratio;
    for (int ix = 0; ix <= nf; ++ix) {
      const int cx = std::min(ix / ratio, nc - 1);
      const double s = (ix - cx * ratio) * inv_ratio;
      const int j = fine.vertex_index(ix, iy);
      const int v00 = coarse.vertex_index(cx, cy);
      const int v10 = coarse.vertex_index(cx + 1, cy);
      const int v01 = coarse.vertex_index(cx, cy + 1);
      const int v11 = coarse.vertex_index(cx + 1, cy + 1);
      // Barycentric coordinates in the triangle of the cell containing (s, t);
      // both are dyadic, so the values are exact.
      double w[4];  // v00, v10, v01, v11
      if (s >= t) {
        w[0] = 1.0 - s;
        w[1] = s - t;
        w[2] = 0.0;
        w[3] = t;
      } else {
        w[0] = 1.0 - t;
        w[1] = 0.0;
        w[2] = t - s;
        w[3] = s;
      }
      const int ids[4] = {v00, v10, v01, v11};
      for (int a = 0; a < 4; ++a) {
        if (w[a] != 0.0) entries.emplace_back(ids[a], j, w[a]);
      }
    }
  }
  SparseMatrix A(coarse.num_vertices(), fine.num_vertices());
  A.setFromTriplets(entries.begin(), entries.end());
  A.makeCompressed();
  return A;
}

SparseMatrix prolongation(const Mesh& coarse, const DofMap& coarse_dofs, const Mesh& fine,
                          const DofMap& fine_dofs) {
  const SparseMatrix full = prolongation(coarse, fine);
  if (coarse_dofs.num_vertices() != coarse.num_vertices() ||
      fine_dofs.num_vertices() != fine.num_vertices()) {
    throw ShapeError("dof maps do not match meshes");
  }
  std::vector<Eigen::Triplet<double>> entries;
  entries.reserve(static_cast<std::size_t>(full.nonZeros()));
  for (int r = 0; r < full.outerSize(); ++r) {
    const int rd = coarse_dofs.dof(r);
    if (rd < 0) continue;
    for (SparseMatrix::InnerIterator it(full, r); it; ++it) {
      const int cd = fine_dofs.dof(static_cast<int>(it.col()));
      if (cd >= 0) entries.emplace_back(rd, cd, it.value());
    }
  }
  SparseMatrix A(coarse_dofs.num_dofs(), fine_dofs.num_dofs());
  A.setFromTriplets(entries.begin(), entries.end());
  A.makeCompressed();
  return A;
}

void write_mesh(std::ostream& out, const Mesh& mesh) {
  out << fmt::format("vertices {} triangles {}\n", mesh.num_vertices(), mesh.num_triangles());
  const auto& flags = mesh.boundary_flags();
  for (int v = 0; v < mesh.num_vertices(); ++v) {
    const Point& p = mesh.vertices()[static_cast<std::size_t>(v)];
    out << fmt::format("{:.17g} {:.17g} {}\n", p.x, p.y,
                       static_cast<int>(flags[static_cast<std::size_t>(v)]));
  }
  for (const Triangle& t : mesh.triangles()) {
    out << fmt::format("{} {} {}\n", t[0], t[1], t[2]);
  }
}

}  // namespace nsfem
