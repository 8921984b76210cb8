#ifndef SEMMATCH_SEMANTIC_H_
#define SEMMATCH_SEMANTIC_H_

#include <array>
#include <cstdint>
#include <memory>
#include <string>

#include "semmatch/feature_map.h"
#include "semmatch/image.h"
#include "semmatch/tensor.h"

namespace semmatch {

inline constexpr int kSemanticPatch = 8;
inline constexpr int kToyHistogramBins = 16;
inline constexpr int kToyDctCoefficients = 8;
inline constexpr int kToyRawDescriptor = kToyHistogramBins + kToyDctCoefficients;
inline constexpr int kDefaultSemanticChannels = 24;

// Raw descriptor of the 8x8 patch at patch coordinates (px, py): a 16-bin
// normalized intensity histogram followed by the 8 lowest-frequency
// orthonormal 2-D DCT-II coefficients in zig-zag order.
std::array<float, kToyRawDescriptor> ToyPatchDescriptor(const Image& image, int px, int py);

// Frozen semantic extractor. Implementations are deterministic and read-only
// after construction, so a provider may be shared across threads.
class SemanticProvider {
 public:
  virtual ~SemanticProvider() = default;
  // Semantic grid S for an image. `image_id` names the image for
  // file-backed providers.
  virtual FeatureMap Extract(const Image& image, const std::string& image_id) const = 0;
  virtual int channels() const = 0;
};

// Histogram + DCT patch descriptor projected to `channels` by a fixed
// seeded Gaussian matrix.
class ToySemanticProvider final : public SemanticProvider {
 public:
  explicit ToySemanticProvider(int channels = kDefaultSemanticChannels,
                               std::uint64_t seed = 0x5e3a7u);

  FeatureMap Extract(const Image& image, const std::string& image_id) const override;
  int channels() const override { return channels_; }
  const TensorF& projection() const { return projection_; }

 private:
  int channels_;
  TensorF projection_;  // [kToyRawDescriptor x channels]
};

// Loads `<dir>/<image_id>.srmt` blobs of shape (grid_h, grid_w, D).
class FileSemanticProvider final : public SemanticProvider {
 public:
  FileSemanticProvider(std::string directory, int channels);

  FeatureMap Extract(const Image& image, const std::string& image_id) const override;
  int channels() const override { return channels_; }

 private:
  std::string directory_;
  int channels_;
};

FeatureMap ToySemanticExtract(const Image& image, const TensorF& projection);
FeatureMap SemanticFromFile(const std::string& directory, const std::string& image_id);

// Spatial part of semantic resizing: bilinear resampling with aligned
// corners. The learned channel projection lives in the model.
FeatureMap ResizeBilinear(const FeatureMap& map, int target_height, int target_width);

std::unique_ptr<SemanticProvider> MakeSemanticProvider(const std::string& semantic_dir,
                                                       int channels);

}  // namespace semmatch

#endif  // SEMMATCH_SEMANTIC_H_
