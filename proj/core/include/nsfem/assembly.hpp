#pragma once

#include <functional>

#include <Eigen/Core>

#include "nsfem/mesh.hpp"
#include "nsfem/sparse.hpp"

namespace nsfem {

/// Coefficients of a second order form
///   a(u, v) = int diffusion grad u . grad v + (advection . grad u) v + reaction u v.
/// Empty callables stand for zero coefficients.
struct CoefficientField {
  std::function<Eigen::Matrix2d(const Point&)> diffusion;
  std::function<Eigen::Vector2d(const Point&)> advection;
  std::function<double(const Point&)> reaction;
  /// User assertion that the form is coercive on V; spot-checked by the harness.
  bool coercive = false;

  static CoefficientField constant(double diffusion, double reaction,
                                   Eigen::Vector2d advection = Eigen::Vector2d::Zero());

  bool has_advection() const { return static_cast<bool>(advection); }
};

/// Exact P1 element mass matrix of a triangle with the given area.
Eigen::Matrix3d element_mass(double area);

/// Signed area of a triangle (positive for counter-clockwise vertices).
double signed_area(const Point& a, const Point& b, const Point& c);

/// Consistent P1 mass matrix, Dirichlet vertices eliminated.
SparseMatrix assemble_mass(const Mesh& mesh, const DofMap& dofs);
SparseMatrix assemble_mass(const Mesh& mesh, BoundaryCondition bc);

/// Matrix with entries a(phi_j, phi_i). Coefficients are sampled at the
/// element barycenter. Throws AssemblyError on degenerate triangles or
/// non-finite coefficient values.
SparseMatrix assemble_form(const Mesh& mesh, const CoefficientField& coeffs, const DofMap& dofs);
SparseMatrix assemble_form(const Mesh& mesh, const CoefficientField& coeffs,
                           BoundaryCondition bc);

}  // namespace nsfem
