#ifndef SEMMATCH_FEATURE_MAP_H_
#define SEMMATCH_FEATURE_MAP_H_

#include <cstdint>
#include <vector>

#include "semmatch/tensor.h"

namespace semmatch {

struct Grid {
  int height = 0;
  int width = 0;
  int cells() const { return height * width; }

  bool operator==(const Grid&) const = default;
};

enum class FeatureOrigin { kCoarse, kEnhanced, kFused, kFine, kSemantic };

// Dense grid of C-channel cells. Cell (x, y) at `scale` represents image
// pixel (x / scale, y / scale). `valid` marks cells whose pixel lies inside
// the unpadded image content.
struct FeatureMap {
  int height = 0;
  int width = 0;
  int channels = 0;
  double scale = 1.0;
  FeatureOrigin origin = FeatureOrigin::kCoarse;
  std::vector<float> values;   // [height * width * channels]
  std::vector<std::uint8_t> valid;  // [height * width]

  int num_cells() const { return height * width; }
  const float* cell(int index) const {
    return values.data() + static_cast<std::size_t>(index) * channels;
  }
  float* cell(int index) { return values.data() + static_cast<std::size_t>(index) * channels; }

  // [cells x channels] view as a tensor copy.
  TensorF AsTensor() const;
};

// Wraps a [cells x channels] tensor; all cells valid.
FeatureMap FeatureMapFromTensor(const TensorF& t, int height, int width, double scale,
                                FeatureOrigin origin);

// Marks cells whose represented pixel falls outside original_w x original_h.
void MaskToContent(FeatureMap& map, int original_width, int original_height);

// Grid dims for an image dimension at a scale: ceil(dim * scale).
int GridSize(int image_dim, double scale);

}  // namespace semmatch

#endif  // SEMMATCH_FEATURE_MAP_H_
