#include "nsfem/stepper.hpp"

#include <chrono>
#include <cmath>

#include <fmt/format.h>

namespace nsfem {

Nonlinearity Nonlinearity::sine() {
  return Nonlinearity{"sin", [](double u) { return std::sin(u); }, 1.0};
}

ModelSpec ModelSpec::heat_matern(double gamma, BoundaryCondition bc) {
  ModelSpec m;
  m.a1 = CoefficientField::constant(1.0, 0.0);
  m.a2 = CoefficientField::constant(1.0, 1.0);
  m.a1.coercive = bc == BoundaryCondition::kDirichlet;
  m.a2.coercive = true;
  m.bc = bc;
  m.gamma = gamma;
  // -Laplace + 1 is coercive on H^1 in the Neumann case.
  m.coercivity_shift = bc == BoundaryCondition::kNeumann ? 1.0 : 0.0;
  return m;
}

void ModelSpec::validate() const {
  // Two space dimensions: gamma > d/4 - 1/2 = 0.
  if (!(gamma > 0.0 && gamma <= 1.0)) {
    throw DomainError(fmt::format("gamma must lie in (0, 1] in two dimensions, got {}", gamma));
  }
  if (nonlinearity) {
    if (!nonlinearity->f) throw DomainError("nonlinearity has no function attached");
    if (!(nonlinearity->lipschitz > 0.0)) {
      throw DomainError("nonlinearity requires a positive Lipschitz bound");
    }
  }
}

int SchemeParams::num_steps() const {
  if (!(dt > 0.0)) throw DomainError(fmt::format("time step must be positive, got {}", dt));
  if (!(final_time >= 0.0)) throw DomainError("final time must be nonnegative");
  const double ratio = final_time / dt;
  const double rounded = std::round(ratio);
  if (std::abs(ratio - rounded) > 1e-9 * std::max(1.0, ratio) || rounded > 1e9) {
    throw DomainError(fmt::format("T / dt = {} is not an integer", ratio));
  }
  return static_cast<int>(rounded);
}

namespace {

bool differ_by_mass_multiple(const SparseMatrix& K, const SparseMatrix& T,
                             const SparseMatrix& M) {
  const SparseMatrix D = K - T;
  const double c = D.diagonal().sum() / M.diagonal().sum();
  const SparseMatrix R = D - c * M;
  const double scale = std::max({max_abs(K), max_abs(T), max_abs(M)});
  return max_abs(R) <= 1e-12 * scale;
}

}  // namespace

SolverContext precompute(const Mesh& mesh, const ModelSpec& model, const SchemeParams& params,
                         ContextOptions options) {
  model.validate();
  params.num_steps();
  if (params.quad.gamma() != model.gamma) {
    throw ConfigError(fmt::format("quadrature built for gamma {} but model has gamma {}",
                                  params.quad.gamma(), model.gamma));
  }

  SolverContext ctx(mesh, model.bc);
  ctx.params_ = params;
  ctx.mass_ = assemble_mass(mesh, ctx.dofs_);
  ctx.form1_ = assemble_form(mesh, model.a1, ctx.dofs_);
  ctx.form2_ = assemble_form(mesh, model.a2, ctx.dofs_);

  const SparseMatrix implicit = ctx.mass_ + params.dt * ctx.form1_;
  ctx.implicit_ = LinearSolver::automatic(implicit, params.tol);
  ctx.mass_factor_ = mass_sqrt(ctx.mass_);
  if (options.precompute_fractional) {
    ctx.fractional_.emplace(ctx.mass_, ctx.form2_, params.quad, params.tol);
  }
  ctx.commute_ = differ_by_mass_multiple(ctx.form2_, ctx.form1_, ctx.mass_);

  ctx.initial_ = Vector::Zero(ctx.num_dofs());
  if (model.initial_coefficients.size() > 0) {
    if (model.initial_coefficients.size() != ctx.num_dofs()) {
      throw ShapeError(fmt::format("initial coefficients have length {}, expected {}",
                                   model.initial_coefficients.size(), ctx.num_dofs()));
    }
    ctx.initial_ = model.initial_coefficients;
  } else if (model.initial) {
    for (int d = 0; d < ctx.num_dofs(); ++d) {
      ctx.initial_[d] = model.initial(mesh.vertices()[static_cast<std::size_t>(ctx.dofs_.vertex(d))]);
    }
  }
  return ctx;
}

Vector apply_nonlinearity(const Nonlinearity* F, const Vector& state) {
  if (F == nullptr) return Vector::Zero(state.size());
  Vector out(state.size());
  for (Eigen::Index i = 0; i < state.size(); ++i) out[i] = F->f(state[i]);
  return out;
}

Vector step(const SolverContext& ctx, const Vector& state, const Vector& noise_load,
            const Nonlinearity* F) {
  const int n = ctx.num_dofs();
  if (state.size() != n || noise_load.size() != n) {
    throw ShapeError(fmt::format("step expects vectors of length {}, got state {} and load {}", n,
                                 state.size(), noise_load.size()));
  }
  if (ctx.fractional() == nullptr) {
    throw ConfigError("context was built without the fractional noise operator");
  }
  Vector rhs = state;
  if (F != nullptr) rhs += ctx.params().dt * apply_nonlinearity(F, state);
  rhs += ctx.fractional()->apply(noise_load);
  return ctx.implicit_solver().solve(Vector(ctx.mass() * rhs));
}

TrajectoryResult run_trajectory(const SolverContext& ctx, const ModelSpec& model,
                                NoiseStream& stream,
                                std::optional<std::span<const Vector>> increments,
                                const TrajectoryOptions& options) {
  const auto start = std::chrono::steady_clock::now();
  const SchemeParams& params = ctx.params();
  const int steps = params.num_steps();
  if (increments && static_cast<int>(increments->size()) != steps) {
    throw ShapeError(fmt::format("expected {} increments, got {}", steps, increments->size()));
  }

  std::vector<int> snapshot_steps;
  for (double t : options.snapshot_times) {
    if (t < 0.0 || t > params.final_time) {
      throw DomainError(fmt::format("snapshot time {} outside [0, T]", t));
    }
    snapshot_steps.push_back(static_cast<int>(std::lround(t / params.dt)));
  }

  TrajectoryResult result;
  const Nonlinearity* F = model.nonlinearity ? &*model.nonlinearity : nullptr;
  Vector state = ctx.initial_state();
  auto record = [&](int n) {
    for (std::size_t s = 0; s < snapshot_steps.size(); ++s) {
      if (snapshot_steps[s] == n) result.snapshots.push_back({n * params.dt, state});
    }
  };
  record(0);
  for (int n = 0; n < steps; ++n) {
    Vector load = increments ? (*increments)[static_cast<std::size_t>(n)]
                             : sample_increment(stream, ctx.mass_factor(), params.dt);
    state = step(ctx, state, load, F);
    if (options.record_increments) result.increments.push_back(std::move(load));
    record(n + 1);
  }
  result.final_state = std::move(state);
  result.steps = steps;
  result.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return result;
}

Vector accumulate_noise(const SolverContext& ctx, const Vector& beta, const Vector& noise_load) {
  if (beta.size() != ctx.num_dofs() || noise_load.size() != ctx.num_dofs()) {
    throw ShapeError("accumulate_noise: length mismatch");
  }
  return ctx.implicit_solver().solve(Vector(ctx.mass() * beta + noise_load));
}

Vector deterministic_response(const SolverContext& ctx) {
  const int steps = ctx.params().num_steps();
  Vector state = ctx.initial_state();
  if (state.isZero(0.0)) return state;
  for (int n = 0; n < steps; ++n) state = ctx.implicit_solver().solve(Vector(ctx.mass() * state));
  return state;
}

DenseMatrix complete_deferred(const SolverContext& ctx, const DenseMatrix& betas) {
  if (!ctx.operators_commute()) {
    throw ConfigError("deferred noise application requires K - T to be a multiple of M");
  }
  if (betas.rows() != ctx.num_dofs()) throw ShapeError("complete_deferred: row mismatch");
  const DenseMatrix loads = ctx.mass() * betas;
  DenseMatrix out;
  if (ctx.fractional() != nullptr) {
    out.resize(betas.rows(), betas.cols());
    for (Eigen::Index c = 0; c < betas.cols(); ++c) {
      out.col(c) = ctx.fractional()->apply(Vector(loads.col(c)));
    }
  } else {
    out = apply_fractional_inverse(ctx.mass(), ctx.form2(), ctx.params().quad, loads,
                                   ctx.params().tol);
  }
  const Vector det = deterministic_response(ctx);
  out.colwise() += det;
  return out;
}

}  // namespace nsfem
