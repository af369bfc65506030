#pragma once

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "nsfem/assembly.hpp"
#include "nsfem/fractional.hpp"
#include "nsfem/mesh.hpp"
#include "nsfem/noise.hpp"
#include "nsfem/sparse.hpp"

namespace nsfem {

/// Pointwise nonlinearity F, applied to nodal values.
struct Nonlinearity {
  std::string name;
  std::function<double(double)> f;
  /// Declared Lipschitz constant; must be positive.
  double lipschitz = 0.0;

  static Nonlinearity sine();
};

/// du = -A1 u dt + F(u) dt + A2^{-gamma} dW on a rectangle.
struct ModelSpec {
  CoefficientField a1;
  CoefficientField a2;
  BoundaryCondition bc = BoundaryCondition::kNeumann;
  double gamma = 1.0;
  std::optional<Nonlinearity> nonlinearity;
  /// Initial condition, interpolated at the nodes. Empty means zero.
  std::function<double(const Point&)> initial;
  /// Initial nodal coefficients on the free dofs; takes precedence over
  /// `initial` when non-empty.
  Vector initial_coefficients;
  /// Coercivity shift of A1. Informational; backward Euler does not use it.
  double coercivity_shift = 0.0;

  /// A1 = -Laplace, A2 = I - Laplace, zero initial data.
  static ModelSpec heat_matern(double gamma, BoundaryCondition bc = BoundaryCondition::kNeumann);

  /// Throws DomainError on gamma outside (0, 1] or a nonlinearity without a
  /// positive Lipschitz bound.
  void validate() const;
};

struct SchemeParams {
  double dt = 0.0;
  double final_time = 0.0;
  SincQuadrature quad{1.0, 1.0};
  double tol = kDefaultTolerance;

  /// T / dt; throws DomainError unless it is a nonnegative integer.
  int num_steps() const;
};

struct ContextOptions {
  /// Factor all shifted systems of the noise operator up front.
  bool precompute_fractional = true;
};

/// Everything that is fixed over a run: matrices and their factors.
/// Immutable after construction and shareable between threads.
class SolverContext {
 public:
  const Mesh& mesh() const { return mesh_; }
  const DofMap& dofs() const { return dofs_; }
  const SchemeParams& params() const { return params_; }
  int num_dofs() const { return dofs_.num_dofs(); }

  const SparseMatrix& mass() const { return mass_; }
  const SparseMatrix& form1() const { return form1_; }  // T_h
  const SparseMatrix& form2() const { return form2_; }  // K_h
  /// Factorization of M + dt T, shared by all steps.
  const LinearSolver& implicit_solver() const { return *implicit_; }
  const CholeskyFactor& mass_factor() const { return *mass_factor_; }
  /// Null if precomputation was disabled.
  const FractionalOperator* fractional() const {
    return fractional_ ? &*fractional_ : nullptr;
  }
  /// Nodal interpolant of the initial condition on the free dofs.
  const Vector& initial_state() const { return initial_; }

  /// True if K - T is a scalar multiple of M. Then the noise operator
  /// commutes with the time stepping operator and can be applied once at the
  /// end of a linear run instead of at every step.
  bool operators_commute() const { return commute_; }

 private:
  friend SolverContext precompute(const Mesh&, const ModelSpec&, const SchemeParams&,
                                  ContextOptions);
  SolverContext(const Mesh& mesh, BoundaryCondition bc) : mesh_(mesh), dofs_(mesh, bc) {}

  Mesh mesh_;
  DofMap dofs_;
  SchemeParams params_;
  SparseMatrix mass_;
  SparseMatrix form1_;
  SparseMatrix form2_;
  std::optional<LinearSolver> implicit_;
  std::optional<CholeskyFactor> mass_factor_;
  std::optional<FractionalOperator> fractional_;
  Vector initial_;
  bool commute_ = false;
};

SolverContext precompute(const Mesh& mesh, const ModelSpec& model, const SchemeParams& params,
                         ContextOptions options = {});

/// Nodal application of F: f(alpha)_i = F(alpha_i). A null F gives zero.
Vector apply_nonlinearity(const Nonlinearity* F, const Vector& state);

/// One backward Euler step:
///   (M + dt T) alpha' = M alpha + dt M f(alpha) + M theta,
/// with theta the fractional noise operator applied to `noise_load`.
/// Requires a context built with precompute_fractional.
Vector step(const SolverContext& ctx, const Vector& state, const Vector& noise_load,
            const Nonlinearity* F);

struct Snapshot {
  double time = 0.0;
  Vector state;
};

struct TrajectoryResult {
  Vector final_state;
  std::vector<Snapshot> snapshots;
  int steps = 0;
  double wall_seconds = 0.0;
  /// Increments used, when recording was requested.
  std::vector<Vector> increments;
};

struct TrajectoryOptions {
  /// Times at which to store the state; rounded to the nearest step.
  std::vector<double> snapshot_times;
  /// Keep the increments drawn from the stream.
  bool record_increments = false;
};

/// Runs the scheme from the initial state to the final time. Increments are
/// drawn from `stream` on this context's mesh unless `increments` is given,
/// in which case exactly num_steps() loads must be supplied and are used
/// verbatim.
TrajectoryResult run_trajectory(const SolverContext& ctx, const ModelSpec& model,
                                NoiseStream& stream,
                                std::optional<std::span<const Vector>> increments = std::nullopt,
                                const TrajectoryOptions& options = {});

// Linear runs with commuting operators (see SolverContext::operators_commute).
// With F = 0 the scheme gives
//   alpha^N = R^N alpha^0 + Q(M beta^N),  (M + dt T) beta^{n+1} = M beta^n + b_n,  beta^0 = 0,
// where R = (M + dt T)^{-1} M and Q is the fractional noise operator.

/// One step of the beta recursion.
Vector accumulate_noise(const SolverContext& ctx, const Vector& beta, const Vector& noise_load);

/// R^N alpha^0.
Vector deterministic_response(const SolverContext& ctx);

/// alpha^N for every column of `betas` (one replicate per column).
DenseMatrix complete_deferred(const SolverContext& ctx, const DenseMatrix& betas);

}  // namespace nsfem
