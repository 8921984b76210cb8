#ifndef SEMMATCH_FUSION_H_
#define SEMMATCH_FUSION_H_

#include <cstdint>
#include <string>
#include <utility>

#include "semmatch/autodiff.h"
#include "semmatch/feature_map.h"
#include "semmatch/param_store.h"

namespace semmatch {

struct FusionConfig {
  int channels = 64;
  // Interleaved self/cross linear-attention layers; must be even.
  int enhancer_layers = 4;
  bool enable_sfb = true;
  // Stage 2 of the fusion block (semantics of the other image).
  bool enable_cross_image = true;
  int stage2_repeats = 1;
};

void AddEnhancerParams(int channels, int layers, std::uint64_t seed, ParamStore<float>& store);
// Parameters of one semantic-guided interaction block under `prefix`:
// semantic self-attention (q/k/v/out), cross-attention projections
// (semantic -> query, image -> key/value) and the 2C -> C projection that
// follows the concatenation.
void AddSgibParams(const std::string& prefix, int channels, std::uint64_t seed,
                   ParamStore<float>& store);
void AddSfbParams(const FusionConfig& config, std::uint64_t seed, ParamStore<float>& store);

std::string SfbStagePrefix(int stage, int repeat);

// 2-D sinusoidal encoding, [h*w x channels]; channels must be a multiple of 4.
template <typename T>
Tensor<T> PositionalEncoding(int height, int width, int channels);

// Self- and cross-attention enhancement of both coarse maps. Cross layers
// update both images from the pre-layer states, so swapping the inputs swaps
// the outputs.
template <typename T>
std::pair<Var<T>, Var<T>> Enhance(const BoundParams<T>& params, Var<T> c0, Var<T> c1,
                                  Grid grid0, Grid grid1, int layers);

// Q = SA(s), with a residual softmax self-attention layer.
template <typename T>
Var<T> SgibQuery(const BoundParams<T>& params, const std::string& prefix, Var<T> semantic);

// softmax(Q K^T / sqrt(C)) V with K, V projected from the image features.
template <typename T>
Var<T> SgibAttend(const BoundParams<T>& params, const std::string& prefix, Var<T> query,
                  Var<T> image);

// project(concat(image, SgibAttend(SgibQuery(semantic), image))).
template <typename T>
Var<T> SgibForward(const BoundParams<T>& params, const std::string& prefix, Var<T> semantic,
                   Var<T> image);

// Projected semantic features. `other_on_0` is image 1's semantics sampled
// on image 0's coarse grid (and vice versa); for equal grids they are simply
// the other image's own semantics.
template <typename T>
struct SemanticInputs {
  Var<T> own0, own1;
  Var<T> other_on_0, other_on_1;
};

// Stage 1 fuses each image with its own semantics; stage 2 (repeated
// `stage2_repeats` times) fuses it with the other image's semantics.
template <typename T>
std::pair<Var<T>, Var<T>> SfbForward(const BoundParams<T>& params,
                                     const SemanticInputs<T>& semantics, Var<T> c0, Var<T> c1,
                                     const FusionConfig& config);

// Equal-grid convenience.
template <typename T>
std::pair<Var<T>, Var<T>> SfbForward(const BoundParams<T>& params, Var<T> s0, Var<T> s1,
                                     Var<T> c0, Var<T> c1, const FusionConfig& config);

}  // namespace semmatch

#endif  // SEMMATCH_FUSION_H_
