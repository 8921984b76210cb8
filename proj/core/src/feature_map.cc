#include "semmatch/feature_map.h"

#include <cmath>

namespace semmatch {

TensorF FeatureMap::AsTensor() const { return TensorF({num_cells(), channels}, values); }

FeatureMap FeatureMapFromTensor(const TensorF& t, int height, int width, double scale,
                                FeatureOrigin origin) {
  if (t.rank() != 2 || t.rows() != height * width) {
    throw Error(ErrorCode::kDimension, "tensor " + ShapeToString(t.shape()) +
                                           " is not a " + std::to_string(height) + "x" +
                                           std::to_string(width) + " grid");
  }
  FeatureMap map;
  map.height = height;
  map.width = width;
  map.channels = t.cols();
  map.scale = scale;
  map.origin = origin;
  map.values.assign(t.values().begin(), t.values().end());
  map.valid.assign(static_cast<std::size_t>(height) * width, 1);
  return map;
}

void MaskToContent(FeatureMap& map, int original_width, int original_height) {
  map.valid.assign(static_cast<std::size_t>(map.num_cells()), 1);
  for (int y = 0; y < map.height; ++y) {
    for (int x = 0; x < map.width; ++x) {
      const double px = x / map.scale, py = y / map.scale;
      if (px >= original_width || py >= original_height) {
        map.valid[static_cast<std::size_t>(y) * map.width + x] = 0;
      }
    }
  }
}

int GridSize(int image_dim, double scale) {
  return static_cast<int>(std::ceil(image_dim * scale - 1e-9));
}

}  // namespace semmatch
