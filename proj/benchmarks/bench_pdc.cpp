#include <benchmark/benchmark.h>

#include <cmath>

#include "pdc/completion.hpp"
#include "pdc/domain.hpp"
#include "pdc/stationary.hpp"

using namespace pdc;

namespace {

// AR(1) band data: rho^|i-j| for |i-j| <= w
PartialKernel markov_band(int n, int w, double rho = 0.8) {
  BoolMatrix mask(n, n);
  Matrix v = Matrix::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      mask(i, j) = std::abs(i - j) <= w;
      if (mask(i, j)) v(i, j) = std::pow(rho, std::abs(i - j));
    }
  }
  return PartialKernel(validate_domain(mask), v);
}

void BM_SerratedBand(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const PartialKernel data = markov_band(n, 3);
  const SerratedCover cover = band_cover(n, 3);
  for (auto _ : state) benchmark::DoNotOptimize(complete_serrated(data, cover));
  state.SetComplexityN(n);
}
BENCHMARK(BM_SerratedBand)->RangeMultiplier(2)->Range(16, 256)->Complexity();

void BM_JunctionTreePath(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const PartialKernel data = markov_band(n, 3);
  const JunctionTree tree = JunctionTree::from_cover(band_cover(n, 3));
  for (auto _ : state) benchmark::DoNotOptimize(complete_junction_tree(data, tree));
}
BENCHMARK(BM_JunctionTreePath)->RangeMultiplier(2)->Range(16, 128);

void BM_PrecisionAssembly(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const PartialKernel data = markov_band(n, 3);
  const SerratedCover cover = band_cover(n, 3);
  for (auto _ : state) benchmark::DoNotOptimize(precision_assembly(data, cover));
}
BENCHMARK(BM_PrecisionAssembly)->RangeMultiplier(2)->Range(16, 256);

void BM_Verify(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const PartialKernel data = markov_band(n, 2);
  const SerratedCover cover = band_cover(n, 2);
  const KernelMatrix k = complete_serrated(data, cover);
  const JunctionTree tree = JunctionTree::from_cover(cover);
  for (auto _ : state) benchmark::DoNotOptimize(verify_canonical(k, data, tree));
}
BENCHMARK(BM_Verify)->Arg(16)->Arg(64);

void BM_Maxdet(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const PartialKernel data = markov_band(n, 1, 0.5);
  for (auto _ : state) benchmark::DoNotOptimize(maxdet_oracle(data));
}
BENCHMARK(BM_Maxdet)->Arg(6)->Arg(10)->Arg(14)->Unit(benchmark::kMillisecond);

void BM_SingleEntryBisection(benchmark::State& state) {
  const PartialKernel data = markov_band(3, 1, 0.5);
  for (auto _ : state) benchmark::DoNotOptimize(feasible_interval_single_entry(data, 0, 2));
}
BENCHMARK(BM_SingleEntryBisection);

void BM_StationaryExtension(benchmark::State& state) {
  const int points = static_cast<int>(state.range(0));
  const StationaryFunction f =
      StationaryFunction::sample([](double t) { return std::exp(-std::abs(t)); }, 0.1, 0.5);
  for (auto _ : state) benchmark::DoNotOptimize(canonical_extension_grid(f, points));
}
BENCHMARK(BM_StationaryExtension)->RangeMultiplier(2)->Range(32, 512);

void BM_NagyEval(benchmark::State& state) {
  const StationaryFunction f =
      StationaryFunction::sample([](double t) { return std::exp(-std::abs(t)); }, 0.1, 0.5);
  const DiscreteSemigroup s = semigroup_step(canonical_extension_grid(f, 41), 1);
  for (auto _ : state) benchmark::DoNotOptimize(nagy_eval(s, 40));
}
BENCHMARK(BM_NagyEval);

}  // namespace

BENCHMARK_MAIN();
