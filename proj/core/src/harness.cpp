#include "nsfem/harness.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <mutex>
#include <random>
#include <thread>

#include <fmt/format.h>

#include "nsfem/assembly.hpp"
#include "nsfem/fractional.hpp"

namespace nsfem {

void parallel_for(int n, int threads, const std::function<void(int)>& f) {
  threads = std::max(1, std::min(threads, n));
  if (threads == 1) {
    for (int i = 0; i < n; ++i) f(i);
    return;
  }
  std::exception_ptr failure;
  std::mutex lock;
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(threads));
  for (int t = 0; t < threads; ++t) {
    pool.emplace_back([&, t] {
      for (int i = t; i < n; i += threads) {
        {
          std::lock_guard guard(lock);
          if (failure) return;
        }
        try {
          f(i);
        } catch (...) {
          std::lock_guard guard(lock);
          if (!failure) failure = std::current_exception();
          return;
        }
      }
    });
  }
  for (auto& th : pool) th.join();
  if (failure) std::rethrow_exception(failure);
}

// ---------------------------------------------------------------------------
// CoupledRunner

CoupledRunner::CoupledRunner(ModelSpec model, std::shared_ptr<const SolverContext> reference,
                             std::vector<CoupledTarget> targets)
    : model_(std::move(model)), reference_(std::move(reference)), targets_(std::move(targets)) {
  if (!reference_) throw ConfigError("coupled run needs a reference context");
  const int ref_steps = reference_->params().num_steps();
  bool commute = reference_->operators_commute();
  for (const CoupledTarget& t : targets_) {
    if (!t.ctx) throw ConfigError("coupled target without context");
    if (t.substeps < 1 || t.ctx->params().num_steps() * t.substeps != ref_steps) {
      throw ConfigError(fmt::format("target at level {}: {} steps x {} substeps != {} reference steps",
                                    t.level, t.ctx->params().num_steps(), t.substeps, ref_steps));
    }
    const bool same_mesh = t.restriction.size() == 0;
    if (same_mesh && t.ctx->num_dofs() != reference_->num_dofs()) {
      throw ShapeError("target without restriction must share the reference mesh");
    }
    if (!same_mesh && (t.restriction.rows() != t.ctx->num_dofs() ||
                       t.restriction.cols() != reference_->num_dofs())) {
      throw ShapeError(fmt::format("restriction for level {} has shape {}x{}", t.level,
                                   t.restriction.rows(), t.restriction.cols()));
    }
    commute = commute && t.ctx->operators_commute();
  }
  deferred_ = !model_.nonlinearity && commute;
  if (!deferred_) {
    if (reference_->fractional() == nullptr) throw ConfigError("reference context lacks noise operator");
    for (const CoupledTarget& t : targets_) {
      if (t.ctx->fractional() == nullptr) throw ConfigError("target context lacks noise operator");
    }
  }
}

template <typename LoadSource>
CoupledSample CoupledRunner::drive(LoadSource&& next_load) const {
  const int ref_steps = reference_->params().num_steps();
  const Nonlinearity* F = model_.nonlinearity ? &*model_.nonlinearity : nullptr;

  // In deferred mode the states are the beta accumulators (start at zero).
  auto advance = [&](const SolverContext& ctx, const Vector& state, const Vector& load) {
    return deferred_ ? accumulate_noise(ctx, state, load) : step(ctx, state, load, F);
  };
  auto start = [&](const SolverContext& ctx) -> Vector {
    return deferred_ ? Vector::Zero(ctx.num_dofs()) : ctx.initial_state();
  };

  CoupledSample s;
  s.reference = start(*reference_);
  std::vector<Vector> buffers;
  for (const CoupledTarget& t : targets_) {
    s.targets.push_back(start(*t.ctx));
    buffers.push_back(Vector::Zero(t.ctx->num_dofs()));
  }
  for (int n = 0; n < ref_steps; ++n) {
    const Vector load = next_load(n);
    for (std::size_t t = 0; t < targets_.size(); ++t) {
      const CoupledTarget& target = targets_[t];
      if (target.restriction.size() == 0) buffers[t] += load;
      else buffers[t].noalias() += target.restriction * load;
      if ((n + 1) % target.substeps == 0) {
        s.targets[t] = advance(*target.ctx, s.targets[t], buffers[t]);
        buffers[t].setZero();
      }
    }
    s.reference = advance(*reference_, s.reference, load);
  }
  return s;
}

CoupledSample CoupledRunner::run(NoiseStream& stream, double noise_scale) const {
  const double dt = reference_->params().dt;
  const double scale = noise_scale * std::sqrt(dt);
  return drive([&](int n) {
    stream.seek(static_cast<std::uint64_t>(n));
    const Vector rho = stream.next(reference_->num_dofs());
    return Vector(scale * reference_->mass_factor().apply_factor(rho));
  });
}

CoupledSample CoupledRunner::run(std::span<const Vector> reference_loads) const {
  if (static_cast<int>(reference_loads.size()) != reference_->params().num_steps()) {
    throw ShapeError(fmt::format("expected {} reference loads, got {}",
                                 reference_->params().num_steps(), reference_loads.size()));
  }
  return drive([&](int n) { return reference_loads[static_cast<std::size_t>(n)]; });
}

std::vector<CoupledSample> CoupledRunner::finalize(std::vector<CoupledSample> raw) const {
  if (!deferred_ || raw.empty()) return raw;
  const auto cols = static_cast<Eigen::Index>(raw.size());
  auto complete = [&](const SolverContext& ctx, auto&& pick) {
    DenseMatrix betas(ctx.num_dofs(), cols);
    for (Eigen::Index c = 0; c < cols; ++c) betas.col(c) = pick(raw[static_cast<std::size_t>(c)]);
    const DenseMatrix done = complete_deferred(ctx, betas);
    for (Eigen::Index c = 0; c < cols; ++c) pick(raw[static_cast<std::size_t>(c)]) = done.col(c);
  };
  complete(*reference_, [](CoupledSample& s) -> Vector& { return s.reference; });
  for (std::size_t t = 0; t < targets_.size(); ++t) {
    complete(*targets_[t].ctx, [t](CoupledSample& s) -> Vector& { return s.targets[t]; });
  }
  return raw;
}

double CoupledRunner::squared_error(const CoupledSample& sample, std::size_t t) const {
  const CoupledTarget& target = targets_.at(t);
  const Vector& coarse = sample.targets.at(t);
  const Vector e = target.restriction.size() == 0
                       ? Vector(sample.reference - coarse)
                       : Vector(sample.reference - target.restriction.transpose() * coarse);
  return e.dot(reference_->mass() * e);
}

double CoupledRunner::reference_squared_norm(const CoupledSample& sample) const {
  return sample.reference.dot(reference_->mass() * sample.reference);
}

// ---------------------------------------------------------------------------
// Studies

double coercivity_probe(const SparseMatrix& K, const SparseMatrix& M, int samples,
                        std::uint64_t seed) {
  if (samples < 1) throw DomainError("coercivity probe needs at least one sample");
  double worst = std::numeric_limits<double>::infinity();
  for (int s = 0; s < samples; ++s) {
    const Vector u = NoiseStream(seed, static_cast<std::uint64_t>(s)).normals(0, K.rows());
    worst = std::min(worst, u.dot(K * u) / u.dot(M * u));
  }
  return worst;
}

namespace {

constexpr std::uint64_t kProbeSeed = 0x5eedc0ffeeULL;

SchemeParams scheme_for(const ExperimentConfig& c, double dt, double h) {
  SchemeParams p;
  p.dt = dt;
  p.final_time = c.final_time;
  p.quad = SincQuadrature(c.model.gamma, c.resolution_for(h));
  p.tol = c.tol;
  return p;
}

bool linear_commuting_candidate(const ModelConfig& m) {
  // Deferred mode only needs to skip the per-step factors when it will be
  // used; the runner re-checks commutation on the assembled matrices.
  return m.nonlinearity == "none" && m.a1_advection == m.a2_advection &&
         m.a1_diffusion == m.a2_diffusion;
}

std::shared_ptr<const SolverContext> make_context(const Mesh& mesh, const ModelSpec& model,
                                                  const SchemeParams& params, bool lazy) {
  ContextOptions options;
  options.precompute_fractional = !lazy;
  return std::make_shared<const SolverContext>(precompute(mesh, model, params, options));
}

void probe_coercivity(const ModelSpec& model, const SolverContext& ctx) {
  if (!model.a2.coercive) return;
  const double ratio = coercivity_probe(ctx.form2(), ctx.mass(), 8, kProbeSeed);
  if (!(ratio > 0.0)) {
    throw ConfigError(fmt::format(
        "A2 is declared coercive but u^T K u / u^T M u = {:.3e} for a random u", ratio));
  }
}

int substeps_of(double dt, double dt_ref) { return static_cast<int>(std::lround(dt / dt_ref)); }

struct SpatialSetup {
  std::unique_ptr<CoupledRunner> runner;
  std::vector<double> h;
  std::vector<double> k;
  std::vector<int> levels;
};

SpatialSetup spatial_setup(const ExperimentConfig& c, const ModelSpec& model, bool lazy) {
  const Mesh ref_mesh = build_unit_square(c.level_ref);
  auto ref_ctx = make_context(ref_mesh, model, scheme_for(c, c.reference_dt(), ref_mesh.h()), lazy);
  SpatialSetup setup;
  std::vector<CoupledTarget> targets;
  for (int level = c.level_min; level <= c.level_max; ++level) {
    const Mesh mesh = build_unit_square(level);
    auto ctx = make_context(mesh, model, scheme_for(c, c.dt, mesh.h()), lazy);
    if (level == c.level_min) probe_coercivity(model, *ctx);
    CoupledTarget t;
    t.level = level;
    t.restriction = prolongation(mesh, ctx->dofs(), ref_mesh, ref_ctx->dofs());
    t.substeps = substeps_of(c.dt, c.reference_dt());
    t.ctx = std::move(ctx);
    setup.h.push_back(mesh.h());
    setup.k.push_back(t.ctx->params().quad.resolution());
    setup.levels.push_back(level);
    targets.push_back(std::move(t));
  }
  if (lazy) {
    // Without per-step factors the runner must be able to defer the noise.
    bool commute = ref_ctx->operators_commute();
    for (const CoupledTarget& t : targets) commute = commute && t.ctx->operators_commute();
    if (!commute) return setup;
  }
  setup.runner = std::make_unique<CoupledRunner>(model, std::move(ref_ctx), std::move(targets));
  return setup;
}

SpatialSetup spatial_setup(const ExperimentConfig& c, const ModelSpec& model) {
  if (linear_commuting_candidate(c.model)) {
    SpatialSetup setup = spatial_setup(c, model, true);
    if (setup.runner) return setup;
  }
  // Per-step noise operator factors.
  return spatial_setup(c, model, false);
}

std::vector<CoupledSample> run_replicates(const CoupledRunner& runner, const ExperimentConfig& c,
                                          int replicates, double noise_scale) {
  std::vector<CoupledSample> samples(static_cast<std::size_t>(replicates));
  parallel_for(replicates, c.threads, [&](int r) {
    NoiseStream stream(c.seed, static_cast<std::uint64_t>(r));
    samples[static_cast<std::size_t>(r)] = runner.run(stream, noise_scale);
  });
  return runner.finalize(std::move(samples));
}

void sort_and_fit(ErrorReport& report) {
  std::stable_sort(report.rows.begin(), report.rows.end(), [&](const ErrorRow& a, const ErrorRow& b) {
    return report.against_dt ? a.dt > b.dt : a.h > b.h;
  });
  std::vector<double> x, e;
  for (const ErrorRow& r : report.rows) {
    if (r.error > 0.0) {
      x.push_back(report.against_dt ? r.dt : r.h);
      e.push_back(r.error);
    }
  }
  if (x.size() >= 2) report.fit = fit_rate(x, e);
  else report.fit = RateFit{};
}

}  // namespace

ErrorReport strong_error_study(const ExperimentConfig& config) {
  config.validate_spatial();
  const ModelSpec model = config.model.to_model();
  const SpatialSetup setup = spatial_setup(config, model);
  const auto samples = run_replicates(*setup.runner, config, config.replicates, 1.0);

  ErrorReport report;
  for (std::size_t t = 0; t < setup.levels.size(); ++t) {
    std::vector<double> q;
    q.reserve(samples.size());
    for (const CoupledSample& s : samples) q.push_back(setup.runner->squared_error(s, t));
    const RmsEstimate est = jackknife_rms(q);
    report.rows.push_back({"converge", setup.levels[t], setup.h[t], config.dt, config.model.gamma,
                           setup.k[t], config.replicates, est.value, est.stderr_});
  }
  sort_and_fit(report);
  return report;
}

ErrorReport pathwise_error(const ExperimentConfig& config, double noise_scale) {
  config.validate_spatial();
  const ModelSpec model = config.model.to_model();
  const SpatialSetup setup = spatial_setup(config, model);
  const auto samples = run_replicates(*setup.runner, config, 1, noise_scale);
  const CoupledSample& path = samples.front();

  const double ref_norm2 = setup.runner->reference_squared_norm(path);
  const bool absolute = !(ref_norm2 > 0.0);
  ErrorReport report;
  for (std::size_t t = 0; t < setup.levels.size(); ++t) {
    const double q = setup.runner->squared_error(path, t);
    const double e = absolute ? std::sqrt(q) : std::sqrt(q / ref_norm2);
    report.rows.push_back({absolute ? "pathwise_absolute" : "pathwise", setup.levels[t], setup.h[t],
                           config.dt, config.model.gamma, setup.k[t], 1, e, 0.0});
  }
  sort_and_fit(report);
  return report;
}

ErrorReport time_rate_study(const ExperimentConfig& config) {
  config.validate_time();
  const ModelSpec model = config.model.to_model();
  const Mesh mesh = build_unit_square(config.time_level);
  const double k = config.resolution_for(mesh.h());

  auto build = [&](bool lazy) -> std::unique_ptr<CoupledRunner> {
    auto ref_ctx = make_context(mesh, model, scheme_for(config, config.reference_dt(), mesh.h()), lazy);
    probe_coercivity(model, *ref_ctx);
    if (lazy && !ref_ctx->operators_commute()) return nullptr;
    std::vector<CoupledTarget> targets;
    for (double dt : config.dt_list) {
      CoupledTarget t;
      t.level = config.time_level;
      t.ctx = make_context(mesh, model, scheme_for(config, dt, mesh.h()), lazy);
      t.substeps = substeps_of(dt, config.reference_dt());
      if (lazy && !t.ctx->operators_commute()) return nullptr;
      targets.push_back(std::move(t));
    }
    return std::make_unique<CoupledRunner>(model, std::move(ref_ctx), std::move(targets));
  };
  std::unique_ptr<CoupledRunner> runner;
  if (linear_commuting_candidate(config.model)) runner = build(true);
  if (!runner) runner = build(false);

  const auto samples = run_replicates(*runner, config, config.replicates, 1.0);
  ErrorReport report;
  report.against_dt = true;
  for (std::size_t t = 0; t < config.dt_list.size(); ++t) {
    std::vector<double> q;
    q.reserve(samples.size());
    for (const CoupledSample& s : samples) q.push_back(runner->squared_error(s, t));
    const RmsEstimate est = jackknife_rms(q);
    report.rows.push_back({"time-rate", config.time_level, mesh.h(), config.dt_list[t],
                           config.model.gamma, k, config.replicates, est.value, est.stderr_});
  }
  sort_and_fit(report);
  return report;
}

// ---------------------------------------------------------------------------
// Checks

QuadratureCheck quadrature_decay_check(int level, const std::vector<double>& gammas,
                                       const std::vector<double>& ks, std::uint64_t seed,
                                       double floor, double factor) {
  const Mesh mesh = build_unit_square(level);
  const DofMap dofs(mesh, BoundaryCondition::kNeumann);
  const SparseMatrix M = assemble_mass(mesh, dofs);
  const SparseMatrix K = assemble_form(mesh, CoefficientField::constant(1.0, 1.0), dofs);
  const DenseSpectralOracle oracle(M, K);
  const Vector b = NoiseStream(seed, 0).normals(0, M.rows());

  QuadratureCheck check;
  check.floor = floor;
  check.factor = factor;
  check.passed = true;
  for (double gamma : gammas) {
    const Vector exact = oracle.apply(gamma, b);
    double previous = std::numeric_limits<double>::infinity();
    for (double k : ks) {
      const SincQuadrature quad(gamma, k);
      const Vector approx = apply_fractional_inverse(M, K, quad, b, 1e-13);
      const double err = (approx - exact).cwiseAbs().maxCoeff();
      check.rows.push_back({gamma, k, quad.num_nodes(), err});
      if (std::isfinite(previous)) {
        const bool monotone = err < previous || previous < floor;
        const bool fast = previous < floor || err <= previous / factor;
        check.passed = check.passed && monotone && fast;
      }
      previous = err;
    }
  }
  return check;
}

NoiseCheck noise_covariance_check(int level, int samples, double dt, std::uint64_t seed,
                                  std::optional<int> fine_level, double threshold) {
  if (samples < 2) throw DomainError("noise check needs at least two samples");
  const Mesh mesh = build_unit_square(level);
  const SparseMatrix M = assemble_mass(mesh, BoundaryCondition::kNeumann);
  const Mesh source = build_unit_square(fine_level.value_or(level));
  const SparseMatrix Ms = assemble_mass(source, BoundaryCondition::kNeumann);
  const CholeskyFactor factor = mass_sqrt(Ms);
  const SparseMatrix A = prolongation(mesh, source);

  const auto n = M.rows();
  DenseMatrix draws(n, samples);
  NoiseStream stream(seed, 0);
  for (int s = 0; s < samples; ++s) {
    draws.col(s) = restrict_increment(sample_increment(stream, factor, dt), A);
  }
  const DenseMatrix target = dt * to_dense(M);

  NoiseCheck check;
  check.samples = samples;
  check.threshold = threshold;
  const double ns = samples;
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto xi = draws.row(i).array();
    const double se_mean = std::sqrt(dt * M.coeff(i, i) / ns);
    check.max_abs_z_mean = std::max(check.max_abs_z_mean, std::abs(xi.mean()) / se_mean);
    for (Eigen::Index j = i; j < n; ++j) {
      // Mean-zero law is known, so E[x_i x_j] is estimated without centering.
      const Eigen::ArrayXd prod = xi * draws.row(j).array();
      const double mean = prod.mean();
      const double var = (prod - mean).square().sum() / (ns - 1.0);
      const double se = std::sqrt(var / ns);
      const double z = se > 0.0 ? std::abs(mean - target(i, j)) / se : 0.0;
      check.max_abs_z = std::max(check.max_abs_z, z);
      ++check.entries;
    }
  }
  check.passed = check.max_abs_z <= threshold && check.max_abs_z_mean <= threshold;
  return check;
}

}  // namespace nsfem
