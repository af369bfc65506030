#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "nsfem/config.hpp"
#include "nsfem/report.hpp"
#include "nsfem/stepper.hpp"

namespace nsfem {

/// A run that is driven by the reference run's noise.
struct CoupledTarget {
  int level = 0;
  std::shared_ptr<const SolverContext> ctx;
  /// Maps reference loads to this target's loads (prolongation A); an empty
  /// (0 x 0) matrix means the target lives on the reference mesh.
  SparseMatrix restriction;
  /// Reference steps per target step.
  int substeps = 1;
};

/// Final states of one coupled replicate.
struct CoupledSample {
  Vector reference;
  std::vector<Vector> targets;
};

/// Drives a reference run and any number of coarser runs with one Wiener
/// path: increments are sampled on the reference mesh, restricted to each
/// target mesh and summed over the reference steps of each target step.
class CoupledRunner {
 public:
  CoupledRunner(ModelSpec model, std::shared_ptr<const SolverContext> reference,
                std::vector<CoupledTarget> targets);

  /// True when linear runs defer the noise operator to the end
  /// (F = 0 and commuting operators on every mesh).
  bool deferred() const { return deferred_; }

  /// One replicate with increments drawn from the stream, scaled by
  /// noise_scale. In deferred mode the returned states still need finalize().
  CoupledSample run(NoiseStream& stream, double noise_scale = 1.0) const;
  /// One replicate driven by explicitly given reference loads.
  CoupledSample run(std::span<const Vector> reference_loads) const;
  /// Final states of all replicates; applies the noise operator in deferred mode.
  std::vector<CoupledSample> finalize(std::vector<CoupledSample> raw) const;

  /// (a - A^T b)^T M_ref (a - A^T b) for target t.
  double squared_error(const CoupledSample& sample, std::size_t t) const;
  /// a^T M_ref a.
  double reference_squared_norm(const CoupledSample& sample) const;

  const SolverContext& reference() const { return *reference_; }
  const std::vector<CoupledTarget>& targets() const { return targets_; }

 private:
  template <typename LoadSource>
  CoupledSample drive(LoadSource&& next_load) const;

  ModelSpec model_;
  std::shared_ptr<const SolverContext> reference_;
  std::vector<CoupledTarget> targets_;
  bool deferred_ = false;
};

/// Strong L^2(Omega; H) error of every coarse level against the reference
/// level, estimated from coupled replicates; slope fitted against h.
ErrorReport strong_error_study(const ExperimentConfig& config);

/// Relative error of a single coupled path (replicate 0); slope against h.
/// A vanishing reference path switches to absolute errors (mode
/// "pathwise_absolute").
ErrorReport pathwise_error(const ExperimentConfig& config, double noise_scale = 1.0);

/// Strong error of each dt in dt_list against dt_ref on the mesh at
/// time_level; slope fitted against dt.
ErrorReport time_rate_study(const ExperimentConfig& config);

/// min over random u of u^T K u / u^T M u.
double coercivity_probe(const SparseMatrix& K, const SparseMatrix& M, int samples,
                        std::uint64_t seed);

struct QuadratureCheckRow {
  double gamma = 0.0;
  double k = 0.0;
  int nodes = 0;
  double error = 0.0;  // max coefficient error against the dense oracle
};

struct QuadratureCheck {
  std::vector<QuadratureCheckRow> rows;
  double floor = 1e-8;
  double factor = 10.0;
  bool passed = false;
};

/// Quadrature error against the dense oracle for the Neumann I - Laplace form
/// on the given level. Passes when, for each gamma, errors decrease
/// monotonically over the (decreasing) k values and drop by at least
/// `factor` per step until they are below `floor`.
QuadratureCheck quadrature_decay_check(int level, const std::vector<double>& gammas,
                                       const std::vector<double>& ks, std::uint64_t seed,
                                       double floor = 1e-8, double factor = 10.0);

struct NoiseCheck {
  int samples = 0;
  int entries = 0;
  double max_abs_z = 0.0;
  double max_abs_z_mean = 0.0;
  double threshold = 5.0;
  bool passed = false;
};

/// Entrywise z-scores of the sample covariance of `samples` increments
/// against dt M on `level`. With fine_level set, increments are sampled there
/// and restricted to `level`.
NoiseCheck noise_covariance_check(int level, int samples, double dt, std::uint64_t seed,
                                  std::optional<int> fine_level = std::nullopt,
                                  double threshold = 5.0);

/// Runs f(i) for i in [0, n) on `threads` workers. Exceptions are rethrown
/// on the calling thread.
void parallel_for(int n, int threads, const std::function<void(int)>& f);

}  // namespace nsfem
