#include <benchmark/benchmark.h>

#include "semmatch/matching.h"
#include "semmatch/random.h"
#include "semmatch/tensor.h"

namespace semmatch {
namespace {

TensorF RandomScores(int n, std::uint64_t seed) {
  Rng rng(seed);
  TensorF s({n, n});
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) s.at(i, j) = static_cast<float>(rng.Normal());
  }
  return s;
}

void BM_DualSoftmax(benchmark::State& state) {
  const TensorF scores = RandomScores(static_cast<int>(state.range(0)), 1);
  for (auto _ : state) benchmark::DoNotOptimize(DualSoftmax(scores));
  state.SetComplexityN(state.range(0) * state.range(0));
}
BENCHMARK(BM_DualSoftmax)->RangeMultiplier(2)->Range(16, 256)->Complexity();

void BM_MnnSelect(benchmark::State& state) {
  const ConfidenceMatrix p = DualSoftmax(RandomScores(static_cast<int>(state.range(0)), 2));
  for (auto _ : state) benchmark::DoNotOptimize(MnnSelect(p, 0.0));
  state.SetComplexityN(state.range(0) * state.range(0));
}
BENCHMARK(BM_MnnSelect)->RangeMultiplier(2)->Range(16, 256)->Complexity();

}  // namespace
}  // namespace semmatch
