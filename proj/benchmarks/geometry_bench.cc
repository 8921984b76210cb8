#include <vector>

#include <benchmark/benchmark.h>

#include "semmatch/dlt.h"
#include "semmatch/homography.h"
#include "semmatch/random.h"
#include "semmatch/ransac.h"

namespace semmatch {
namespace {

// Correspondences under a fixed perspective map; every second one is an
// outlier when `outliers` is set.
std::vector<Correspondence> Planted(int n, bool outliers) {
  Eigen::Matrix3d m;
  m << 1.02, 0.05, 3.0, -0.04, 0.98, -2.0, 1e-4, -5e-5, 1.0;
  const Homography h(m);
  Rng rng(7);
  std::vector<Correspondence> out(n);
  for (int i = 0; i < n; ++i) {
    out[i].p = Point2(rng.Uniform(0, 640), rng.Uniform(0, 480));
    out[i].q = h.Apply(out[i].p) + 0.5 * Point2(rng.Normal(), rng.Normal());
    if (outliers && i % 2 == 1) out[i].q = Point2(rng.Uniform(0, 640), rng.Uniform(0, 480));
  }
  return out;
}

void BM_FitDlt(benchmark::State& state) {
  const auto corr = Planted(static_cast<int>(state.range(0)), false);
  for (auto _ : state) benchmark::DoNotOptimize(FitDlt(corr));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_FitDlt)->RangeMultiplier(4)->Range(8, 2048)->Complexity();

void BM_RansacHalfOutliers(benchmark::State& state) {
  const auto corr = Planted(static_cast<int>(state.range(0)), true);
  RansacOptions options;
  options.inlier_threshold = 3.0;
  options.seed = 1;
  for (auto _ : state) benchmark::DoNotOptimize(RansacHomography(corr, options));
}
BENCHMARK(BM_RansacHalfOutliers)->Arg(200)->Arg(1000)->Unit(benchmark::kMillisecond);

}  // namespace
}  // namespace semmatch
