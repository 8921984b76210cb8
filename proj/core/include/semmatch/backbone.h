#ifndef SEMMATCH_BACKBONE_H_
#define SEMMATCH_BACKBONE_H_

#include <cstdint>
#include <string>
#include <utility>

#include "semmatch/autodiff.h"
#include "semmatch/feature_map.h"
#include "semmatch/image.h"
#include "semmatch/param_store.h"

namespace semmatch {

// Small convolutional pyramid standing in for ResNet-FPN. A shared stride-2
// stem feeds a stride-1 fine head (1/2 scale) and two further stride-2
// stages (1/8 scale). All convolutions are 3x3 with zero padding 1, so cell
// k of a stride-s map is centered on input pixel s*k.
struct BackboneConfig {
  int stem_channels = 16;
  int mid_channels = 32;
  int coarse_channels = 64;
  int fine_channels = 32;
};

void AddBackboneParams(const BackboneConfig& config, std::uint64_t seed,
                       ParamStore<float>& store);

template <typename T>
struct PyramidVars {
  Var<T> coarse;  // [coarse_h*coarse_w x coarse_channels]
  Var<T> fine;    // [fine_h*fine_w x fine_channels]
  int coarse_h = 0, coarse_w = 0;
  int fine_h = 0, fine_w = 0;
};

template <typename T>
PyramidVars<T> ExtractPyramidVars(const BoundParams<T>& params, const Image& image,
                                  const BackboneConfig& config);

// Inference convenience: (coarse @1/8, fine @1/2).
std::pair<FeatureMap, FeatureMap> ExtractPyramid(const Image& image,
                                                 const ParamStore<float>& params,
                                                 const BackboneConfig& config);

// Deterministic per-parameter seed so that adding or removing blocks does
// not change the initialization of the others.
std::uint64_t ParamSeed(std::uint64_t seed, const std::string& name);

}  // namespace semmatch

#endif  // SEMMATCH_BACKBONE_H_
