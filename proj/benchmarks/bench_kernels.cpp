#include <benchmark/benchmark.h>

#include "nsfem/assembly.hpp"
#include "nsfem/fractional.hpp"
#include "nsfem/harness.hpp"
#include "nsfem/noise.hpp"
#include "nsfem/stepper.hpp"

namespace {

using namespace nsfem;

SchemeParams params_for(double gamma, double k, double dt) {
  SchemeParams p;
  p.dt = dt;
  p.final_time = dt;
  p.quad = SincQuadrature(gamma, k);
  return p;
}

void BM_AssembleForm(benchmark::State& state) {
  const Mesh mesh = build_unit_square(static_cast<int>(state.range(0)));
  const auto coeffs = CoefficientField::constant(1.0, 1.0);
  for (auto _ : state) {
    benchmark::DoNotOptimize(assemble_form(mesh, coeffs, BoundaryCondition::kNeumann));
  }
}
BENCHMARK(BM_AssembleForm)->DenseRange(4, 7);

void BM_SampleIncrement(benchmark::State& state) {
  const Mesh mesh = build_unit_square(static_cast<int>(state.range(0)));
  const CholeskyFactor factor = mass_sqrt(assemble_mass(mesh, BoundaryCondition::kNeumann));
  NoiseStream stream(1, 0);
  for (auto _ : state) benchmark::DoNotOptimize(sample_increment(stream, factor, 1e-3));
}
BENCHMARK(BM_SampleIncrement)->DenseRange(4, 7);

void BM_StepGammaOne(benchmark::State& state) {
  const Mesh mesh = build_unit_square(static_cast<int>(state.range(0)));
  const ModelSpec model = ModelSpec::heat_matern(1.0);
  const SolverContext ctx = precompute(mesh, model, params_for(1.0, 1.0, 1.0 / 4096));
  NoiseStream stream(1, 0);
  const Vector load = sample_increment(stream, ctx.mass_factor(), ctx.params().dt);
  Vector x = Vector::Zero(ctx.num_dofs());
  for (auto _ : state) {
    x = step(ctx, x, load, nullptr);
    benchmark::DoNotOptimize(x.data());
  }
}
BENCHMARK(BM_StepGammaOne)->DenseRange(4, 7);

void BM_AccumulateNoise(benchmark::State& state) {
  const Mesh mesh = build_unit_square(static_cast<int>(state.range(0)));
  ContextOptions options;
  options.precompute_fractional = false;
  const SolverContext ctx =
      precompute(mesh, ModelSpec::heat_matern(0.5), params_for(0.5, 0.5, 1.0 / 4096), options);
  NoiseStream stream(1, 0);
  const Vector load = sample_increment(stream, ctx.mass_factor(), ctx.params().dt);
  Vector x = Vector::Zero(ctx.num_dofs());
  for (auto _ : state) {
    x = accumulate_noise(ctx, x, load);
    benchmark::DoNotOptimize(x.data());
  }
}
BENCHMARK(BM_AccumulateNoise)->DenseRange(4, 7);

void BM_FractionalApply(benchmark::State& state) {
  const Mesh mesh = build_unit_square(4);
  const SparseMatrix M = assemble_mass(mesh, BoundaryCondition::kNeumann);
  const SparseMatrix K = assemble_form(mesh, CoefficientField::constant(1.0, 1.0), BoundaryCondition::kNeumann);
  const FractionalOperator op(M, K, SincQuadrature(0.5, 1.0 / static_cast<double>(state.range(0))));
  const Vector b = Vector::Ones(M.rows());
  for (auto _ : state) benchmark::DoNotOptimize(op.apply(b));
  state.counters["nodes"] = op.num_factors();
}
BENCHMARK(BM_FractionalApply)->Arg(1)->Arg(2)->Arg(4);

void BM_CoupledReplicate(benchmark::State& state) {
  ExperimentConfig c;
  c.model.gamma = 1.0;
  c.final_time = 1.0 / 64;
  c.dt = c.final_time / 16;
  c.level_min = 2;
  c.level_max = 3;
  c.level_ref = static_cast<int>(state.range(0));
  c.replicates = 1;
  for (auto _ : state) benchmark::DoNotOptimize(strong_error_study(c));
}
BENCHMARK(BM_CoupledReplicate)->Arg(4)->Arg(5)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
