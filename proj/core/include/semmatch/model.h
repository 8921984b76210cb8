#ifndef SEMMATCH_MODEL_H_
#define SEMMATCH_MODEL_H_

#include <cstdint>
#include <string>
#include <vector>

#include "semmatch/autodiff.h"
#include "semmatch/backbone.h"
#include "semmatch/feature_map.h"
#include "semmatch/fusion.h"
#include "semmatch/image.h"
#include "semmatch/param_store.h"

namespace semmatch {

enum class SemanticMode { kToy, kFile };

struct AblationFlags {
  bool no_sfb = false;
  bool no_cross_image_fusion = false;
  bool no_overlap_fine = false;
  SemanticMode semantic = SemanticMode::kToy;

  bool operator==(const AblationFlags&) const = default;
};

// Accepts no_sfb, no_cross_image_fusion (alias no_cross), no_overlap_fine
// (alias no_overlap), toy_semantic, file_semantic. Throws kConfig on unknown
// or contradictory flags.
AblationFlags ConfigureAblation(const std::vector<std::string>& flags);
std::string AblationName(const AblationFlags& flags);

struct ModelConfig {
  BackboneConfig backbone;
  int semantic_channels = 24;  // D_s entering the learned projection
  int enhancer_layers = 4;
  int stage2_repeats = 1;
  AblationFlags ablation;

  FusionConfig fusion() const;
};

// Parameters of every block the configured variant uses (theta_m). The
// semantic extractor's own parameters are never part of the store.
ParamStore<float> InitModelParams(const ModelConfig& config, std::uint64_t seed);

template <typename T>
struct ForwardVars {
  // Unit-norm descriptors handed to matching.
  Var<T> coarse0, coarse1;  // [coarse cells x coarse_channels]
  Var<T> fine0, fine1;      // [fine cells x fine_channels]
  // Enhanced maps before semantic fusion.
  Var<T> enhanced0, enhanced1;
  Grid grid0, grid1;            // coarse grids
  Grid fine_grid0, fine_grid1;  // fine grids
};

// extract -> semantic resize + projection -> enhance -> SFB -> normalize.
// `semantic0/1` come from a SemanticProvider and are resampled onto the
// coarse grid here.
template <typename T>
ForwardVars<T> ModelForward(const BoundParams<T>& params, const Image& image0,
                            const Image& image1, const FeatureMap& semantic0,
                            const FeatureMap& semantic1, const ModelConfig& config);

}  // namespace semmatch

#endif  // SEMMATCH_MODEL_H_
