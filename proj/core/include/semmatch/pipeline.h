#ifndef SEMMATCH_PIPELINE_H_
#define SEMMATCH_PIPELINE_H_

#include <memory>
#include <string>
#include <vector>

#include "semmatch/feature_map.h"
#include "semmatch/image.h"
#include "semmatch/matching.h"
#include "semmatch/model.h"
#include "semmatch/param_store.h"
#include "semmatch/semantic.h"

namespace semmatch {

struct MatchResult {
  std::vector<CoarseMatch> coarse;                 // M_c
  ConfidenceMatrix coarse_confidence;              // P_c
  std::vector<ConfidenceMatrix> window_confidence; // P_f, one per coarse match
  std::vector<FineMatch> fine;                     // M_f, in coarse-match order
  std::vector<int> fine_source;                    // coarse match of each fine match
};

// Coarse + fine matching over already computed descriptors. Coarse maps are
// at 1/8 scale, fine maps at 1/2 scale.
MatchResult MatchFeatures(const FeatureMap& coarse0, const FeatureMap& coarse1,
                          const FeatureMap& fine0, const FeatureMap& fine1,
                          const MatchingConfig& config, bool center_only);

// Descriptor maps of one forward pass, masked to image content.
struct DescriptorMaps {
  FeatureMap coarse0, coarse1, fine0, fine1;
};

class MatchPipeline {
 public:
  // `provider` may be null only for variants without semantic fusion.
  MatchPipeline(ParamStore<float> params, ModelConfig model, MatchingConfig matching,
                std::shared_ptr<const SemanticProvider> provider);

  DescriptorMaps Describe(const Image& image0, const Image& image1, const std::string& id0,
                          const std::string& id1) const;
  MatchResult Run(const Image& image0, const Image& image1, const std::string& id0 = "0",
                  const std::string& id1 = "1") const;

  const ModelConfig& model_config() const { return model_; }
  const MatchingConfig& matching_config() const { return matching_; }
  const ParamStore<float>& params() const { return params_; }

 private:
  ParamStore<float> params_;
  ModelConfig model_;
  MatchingConfig matching_;
  std::shared_ptr<const SemanticProvider> provider_;
};

}  // namespace semmatch

#endif  // SEMMATCH_PIPELINE_H_
