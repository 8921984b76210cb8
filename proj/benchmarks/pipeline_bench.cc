#include <memory>

#include <benchmark/benchmark.h>

#include "semmatch/model.h"
#include "semmatch/pipeline.h"
#include "semmatch/semantic.h"
#include "semmatch/synth.h"

namespace semmatch {
namespace {

// Full forward pass and matching on a procedural image pair of side range(0).
void BM_PipelineRun(benchmark::State& state) {
  const int side = static_cast<int>(state.range(0));
  const bool no_sfb = state.range(1) != 0;
  ModelConfig model;
  model.ablation.no_sfb = no_sfb;
  std::shared_ptr<const SemanticProvider> provider;
  if (!no_sfb) provider = std::make_shared<ToySemanticProvider>(model.semantic_channels);
  const MatchPipeline pipeline(InitModelParams(model, 3), model, MatchingConfig{}, provider);
  const Image a = ProceduralImage(11, side, side);
  const Image b = ProceduralImage(12, side, side);
  for (auto _ : state) benchmark::DoNotOptimize(pipeline.Run(a, b));
}
BENCHMARK(BM_PipelineRun)
    ->ArgNames({"side", "no_sfb"})
    ->ArgsProduct({{64, 128}, {0, 1}})
    ->Unit(benchmark::kMillisecond);

}  // namespace
}  // namespace semmatch
