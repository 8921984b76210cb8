#include "semmatch/pipeline.h"

#include <utility>

#include "semmatch/autodiff.h"
#include "semmatch/error.h"

namespace semmatch {
namespace {

constexpr double kCoarseScale = 1.0 / 8.0;
constexpr double kFineScale = 1.0 / 2.0;

FeatureMap ToMap(const Var<float>& v, Grid grid, double scale, FeatureOrigin origin,
                 const Image& image) {
  FeatureMap map = FeatureMapFromTensor(v.value(), grid.height, grid.width, scale, origin);
  MaskToContent(map, image.original_width, image.original_height);
  return map;
}

}  // namespace

MatchResult MatchFeatures(const FeatureMap& coarse0, const FeatureMap& coarse1,
                          const FeatureMap& fine0, const FeatureMap& fine1,
                          const MatchingConfig& config, bool center_only) {
  MatchResult result;
  result.coarse_confidence =
      DualSoftmax(SimilarityMatrix(coarse0, coarse1, config.temperature));
  result.coarse = MnnSelect(result.coarse_confidence, config.coarse_threshold);
  result.window_confidence.reserve(result.coarse.size());
  for (std::size_t m = 0; m < result.coarse.size(); ++m) {
    const CoarseMatch& c = result.coarse[m];
    const FeatureWindow w0 = CropWindowAtCoarse(fine0, coarse0.width, c.index0, config.window);
    const FeatureWindow w1 = CropWindowAtCoarse(fine1, coarse1.width, c.index1, config.window);
    ConfidenceMatrix p = WindowConfidence(w0, w1, config.fine_temperature);
    if (center_only) {
      if (auto f = FineMatchCenter(w0, w1, p)) {
        result.fine.push_back(*f);
        result.fine_source.push_back(static_cast<int>(m));
      }
    } else {
      for (const FineMatch& f : FineMatchOverlap(w0, w1, p, config.fine_threshold)) {
        result.fine.push_back(f);
        result.fine_source.push_back(static_cast<int>(m));
      }
    }
    result.window_confidence.push_back(std::move(p));
  }
  return result;
}

MatchPipeline::MatchPipeline(ParamStore<float> params, ModelConfig model,
                             MatchingConfig matching,
                             std::shared_ptr<const SemanticProvider> provider)
    : params_(std::move(params)),
      model_(std::move(model)),
      matching_(matching),
      provider_(std::move(provider)) {
  if (!model_.ablation.no_sfb && provider_ == nullptr) {
    throw Error(ErrorCode::kConfig, "semantic fusion requires a semantic provider");
  }
}

DescriptorMaps MatchPipeline::Describe(const Image& image0, const Image& image1,
                                       const std::string& id0, const std::string& id1) const {
  FeatureMap s0, s1;
  if (!model_.ablation.no_sfb) {
    s0 = provider_->Extract(image0, id0);
    s1 = provider_->Extract(image1, id1);
  }
  Tape<float> tape;
  BoundParams<float> bound(tape, params_, /*trainable=*/false);
  const ForwardVars<float> f = ModelForward(bound, image0, image1, s0, s1, model_);
  DescriptorMaps maps;
  maps.coarse0 = ToMap(f.coarse0, f.grid0, kCoarseScale, FeatureOrigin::kFused, image0);
  maps.coarse1 = ToMap(f.coarse1, f.grid1, kCoarseScale, FeatureOrigin::kFused, image1);
  maps.fine0 = ToMap(f.fine0, f.fine_grid0, kFineScale, FeatureOrigin::kFine, image0);
  maps.fine1 = ToMap(f.fine1, f.fine_grid1, kFineScale, FeatureOrigin::kFine, image1);
  return maps;
}

MatchResult MatchPipeline::Run(const Image& image0, const Image& image1, const std::string& id0,
                               const std::string& id1) const {
  const DescriptorMaps maps = Describe(image0, image1, id0, id1);
  return MatchFeatures(maps.coarse0, maps.coarse1, maps.fine0, maps.fine1, matching_,
                       model_.ablation.no_overlap_fine);
}

}  // namespace semmatch
