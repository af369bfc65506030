#include "nsfem/noise.hpp"

#include <cmath>
#include <random>

#include <boost/random/normal_distribution.hpp>
#include <fmt/format.h>

namespace nsfem {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t derive_key(std::uint64_t seed, std::uint64_t replicate, std::uint64_t step) {
  std::uint64_t k = splitmix64(seed);
  k = splitmix64(k ^ replicate);
  return splitmix64(k ^ (step * 0xd1342543de82ef95ULL));
}

}  // namespace

NoiseStream::NoiseStream(std::uint64_t seed, std::uint64_t replicate)
    : seed_(seed), replicate_(replicate) {}

Vector NoiseStream::normals(std::uint64_t step, Eigen::Index n) const {
  // mt19937_64 is fully specified by the standard and boost's ziggurat
  // normal sampler is platform independent, unlike std::normal_distribution.
  std::mt19937_64 engine(derive_key(seed_, replicate_, step));
  boost::random::normal_distribution<double> normal(0.0, 1.0);
  Vector z(n);
  for (Eigen::Index i = 0; i < n; ++i) z[i] = normal(engine);
  return z;
}

Vector NoiseStream::next(Eigen::Index n) { return normals(step_++, n); }

Vector sample_increment(NoiseStream& stream, const CholeskyFactor& mass_factor, double dt) {
  if (!(dt > 0.0)) throw DomainError(fmt::format("time step must be positive, got {}", dt));
  const Vector rho = stream.next(mass_factor.size());
  return std::sqrt(dt) * mass_factor.apply_factor(rho);
}

Vector restrict_increment(const Vector& fine_load, const SparseMatrix& prolongation) {
  if (fine_load.size() != prolongation.cols()) {
    throw ShapeError(fmt::format("fine load has length {}, prolongation expects {}",
                                 fine_load.size(), prolongation.cols()));
  }
  return prolongation * fine_load;
}

}  // namespace nsfem
