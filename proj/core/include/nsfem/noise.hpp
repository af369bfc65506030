#pragma once

#include <cstdint>

#include "nsfem/sparse.hpp"

namespace nsfem {

/// Deterministic source of standard normal variates keyed by
/// (seed, replicate, step).
///
/// The variates of a given step are a pure function of the key, so streams
/// can be replayed, skipped ahead, or run on different threads without
/// sequential state handoff. Distinct replicates draw from generators seeded
/// with well-mixed, distinct 64-bit keys.
class NoiseStream {
 public:
  NoiseStream(std::uint64_t seed, std::uint64_t replicate);

  std::uint64_t seed() const { return seed_; }
  std::uint64_t replicate() const { return replicate_; }
  /// Index of the next step to be drawn.
  std::uint64_t position() const { return step_; }
  void seek(std::uint64_t step) { step_ = step; }

  /// n standard normals for the given step; does not move the stream.
  Vector normals(std::uint64_t step, Eigen::Index n) const;
  /// n standard normals for the current step, then advances by one step.
  Vector next(Eigen::Index n);

 private:
  std::uint64_t seed_;
  std::uint64_t replicate_;
  std::uint64_t step_ = 0;
};

/// Draws one projected Wiener increment as a load vector,
/// sqrt(dt) * sqrt(M) * rho with rho ~ N(0, I); its law is N(0, dt M).
/// Advances the stream by one step.
Vector sample_increment(NoiseStream& stream, const CholeskyFactor& mass_factor, double dt);

/// Tests a fine increment against the coarse nodal basis: A * fine_load.
Vector restrict_increment(const Vector& fine_load, const SparseMatrix& prolongation);

}  // namespace nsfem
