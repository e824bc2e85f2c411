#include <benchmark/benchmark.h>

#include <random>
#include <vector>

#include "mflab/dynamics.hpp"
#include "mflab/exact_solution.hpp"
#include "mflab/grid.hpp"
#include "mflab/modulated_energy.hpp"
#include "mflab/particles.hpp"
#include "mflab/potential_solver.hpp"
#include "mflab/reference.hpp"
#include "mflab/sampling.hpp"

using namespace mflab;

namespace {

ParticleSystem disk_sample(std::size_t N)
{
    ExactReference disk(ExactSolution::uniform_ball_static(KernelSpec::logarithmic(2), 1.0));
    return initial_particles(disk, N, 0, SamplingMode::quantized);
}

void BM_PairwiseForce(benchmark::State& state)
{
    auto sys = disk_sample(state.range(0));
    auto spec = KernelSpec::logarithmic(2);
    for (auto _ : state)
        benchmark::DoNotOptimize(pairwise_force(sys, spec));
    state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_PairwiseForce)->RangeMultiplier(2)->Range(64, 2048)->Complexity(benchmark::oNSquared);

void BM_GradientStep(benchmark::State& state)
{
    auto sys = disk_sample(state.range(0));
    auto spec = KernelSpec::logarithmic(2);
    IntegratorConfig cfg;
    cfg.dt = 1e-3;
    for (auto _ : state)
        benchmark::DoNotOptimize(step(sys, FlowSpec::gradient(), spec, cfg));
}
BENCHMARK(BM_GradientStep)->Arg(256)->Arg(1024);

void BM_ModulatedEnergy(benchmark::State& state)
{
    auto spec = KernelSpec::logarithmic(2);
    ExactReference disk(ExactSolution::uniform_ball_static(spec, 1.0));
    auto sys = disk_sample(state.range(0));
    for (auto _ : state)
        benchmark::DoNotOptimize(modulated_energy(sys, disk));
}
BENCHMARK(BM_ModulatedEnergy)->Arg(256)->Arg(1024);

void BM_TruncatedEnergy(benchmark::State& state)
{
    auto spec = KernelSpec::logarithmic(2);
    ExactReference disk(ExactSolution::uniform_ball_static(spec, 1.0));
    auto sys = disk_sample(state.range(0));
    auto r = minimal_distances(sys).r;
    for (auto _ : state)
        benchmark::DoNotOptimize(truncated_energy(sys, disk, r));
}
BENCHMARK(BM_TruncatedEnergy)->Arg(256)->Arg(1024);

void BM_PotentialSolve(benchmark::State& state)
{
    const int n = state.range(0);
    auto spec = KernelSpec::logarithmic(2);
    auto g = GridGeometry::box(2, n, 1.5);
    auto mu = ExactSolution::uniform_ball_static(spec, 1.0).rasterize(g, 0);
    PotentialSolver solver(g, spec, n / 2);
    for (auto _ : state)
        benchmark::DoNotOptimize(solver.solve(mu.values));
}
BENCHMARK(BM_PotentialSolve)->Arg(64)->Arg(128)->Arg(256);

} // namespace

BENCHMARK_MAIN();
