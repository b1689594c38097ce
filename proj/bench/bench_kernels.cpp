// OpenMP kernels against their serial references.

#include <vector>

#include <benchmark/benchmark.h>

#include "batchps/kernels.hpp"
#include "batchps/rng.hpp"
#include "batchps/series.hpp"
#include "batchps/simulator.hpp"

using namespace batchps;

namespace {

std::vector<double> noise(std::size_t n, std::uint64_t seed) {
  RandomStream g(seed, 0);
  std::vector<double> v(n);
  for (auto& x : v) x = g.uniform();
  return v;
}

template <auto Kernel>
void BM_convolve(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto a = noise(n, 1), b = noise(n, 2);
  std::vector<double> out(n);
  for (auto _ : state) {
    Kernel(a, b, out);
    benchmark::DoNotOptimize(out.data());
  }
  state.SetComplexityN(state.range(0));
}

void BM_convolve_parallel(benchmark::State& s) { BM_convolve<kernels::convolve_truncated>(s); }
void BM_convolve_serial(benchmark::State& s) { BM_convolve<kernels::reference::convolve_truncated>(s); }

template <bool Parallel>
void BM_simulate(benchmark::State& state) {
  SimConfig cfg{.params = params_from_load(0.7, 0.7)};
  cfg.replications = static_cast<std::uint64_t>(state.range(0));
  for (auto _ : state) {
    auto r = Parallel ? simulate_tagged(cfg) : reference::simulate_tagged(cfg);
    benchmark::DoNotOptimize(r.data());
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

void BM_simulate_parallel(benchmark::State& s) { BM_simulate<true>(s); }
void BM_simulate_serial(benchmark::State& s) { BM_simulate<false>(s); }

void BM_j_pmf(benchmark::State& state) {
  const auto p = params_from_load(0.7, 0.7);
  for (auto _ : state) benchmark::DoNotOptimize(j_pmf(p, static_cast<std::size_t>(state.range(0))).mass.data());
}

}  // namespace

BENCHMARK(BM_convolve_parallel)->RangeMultiplier(4)->Range(256, 16384)->Complexity();
BENCHMARK(BM_convolve_serial)->RangeMultiplier(4)->Range(256, 16384)->Complexity();
BENCHMARK(BM_simulate_parallel)->Arg(100000)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_simulate_serial)->Arg(100000)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_j_pmf)->Arg(500)->Arg(2000)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
