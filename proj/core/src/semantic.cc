#include "semmatch/semantic.h"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "semmatch/random.h"
#include "semmatch/tensor_io.h"

namespace semmatch {
namespace {

// Zig-zag order of the lowest-frequency (row, col) DCT coefficients.
constexpr std::array<std::array<int, 2>, kToyDctCoefficients> kZigZag = {
    {{0, 0}, {0, 1}, {1, 0}, {2, 0}, {1, 1}, {0, 2}, {0, 3}, {1, 2}}};

double DctBasis(int freq, int pos) {
  const double alpha = freq == 0 ? std::sqrt(1.0 / kSemanticPatch) : std::sqrt(2.0 / kSemanticPatch);
  return alpha * std::cos((2 * pos + 1) * freq * std::numbers::pi / (2.0 * kSemanticPatch));
}

}  // namespace

std::array<float, kToyRawDescriptor> ToyPatchDescriptor(const Image& image, int px, int py) {
  std::array<float, kToyRawDescriptor> d{};
  const int x0 = px * kSemanticPatch, y0 = py * kSemanticPatch;
  constexpr float kInvCount = 1.0f / (kSemanticPatch * kSemanticPatch);
  for (int y = 0; y < kSemanticPatch; ++y) {
    for (int x = 0; x < kSemanticPatch; ++x) {
      const float v = std::clamp(image.at(x0 + x, y0 + y), 0.0f, 1.0f);
      const int bin = std::min(kToyHistogramBins - 1, static_cast<int>(v * kToyHistogramBins));
      d[bin] += kInvCount;
    }
  }
  for (int k = 0; k < kToyDctCoefficients; ++k) {
    const int u = kZigZag[k][0], v = kZigZag[k][1];
    double acc = 0.0;
    for (int y = 0; y < kSemanticPatch; ++y) {
      for (int x = 0; x < kSemanticPatch; ++x) {
        acc += image.at(x0 + x, y0 + y) * DctBasis(u, y) * DctBasis(v, x);
      }
    }
    d[kToyHistogramBins + k] = static_cast<float>(acc);
  }
  return d;
}

FeatureMap ToySemanticExtract(const Image& image, const TensorF& projection) {
  if (image.width % kSemanticPatch != 0 || image.height % kSemanticPatch != 0) {
    throw Error(ErrorCode::kDimension, "image is not padded to the semantic patch size");
  }
  if (projection.rank() != 2 || projection.rows() != kToyRawDescriptor) {
    throw Error(ErrorCode::kDimension, "toy semantic projection must have 24 rows");
  }
  FeatureMap map;
  map.height = image.height / kSemanticPatch;
  map.width = image.width / kSemanticPatch;
  map.channels = projection.cols();
  map.scale = 1.0 / kSemanticPatch;
  map.origin = FeatureOrigin::kSemantic;
  map.values.assign(static_cast<std::size_t>(map.num_cells()) * map.channels, 0.0f);
  for (int py = 0; py < map.height; ++py) {
    for (int px = 0; px < map.width; ++px) {
      const auto raw = ToyPatchDescriptor(image, px, py);
      float* out = map.cell(py * map.width + px);
      for (int r = 0; r < kToyRawDescriptor; ++r) {
        if (raw[r] == 0.0f) continue;
        for (int c = 0; c < map.channels; ++c) out[c] += raw[r] * projection.at(r, c);
      }
    }
  }
  MaskToContent(map, image.original_width, image.original_height);
  return map;
}

ToySemanticProvider::ToySemanticProvider(int channels, std::uint64_t seed)
    : channels_(channels), projection_({kToyRawDescriptor, channels}) {
  if (channels <= 0) throw Error(ErrorCode::kConfig, "semantic channels must be positive");
  Rng rng(seed);
  const double scale = 1.0 / std::sqrt(static_cast<double>(kToyRawDescriptor));
  for (float& v : projection_.values()) v = static_cast<float>(rng.Normal() * scale);
}

FeatureMap ToySemanticProvider::Extract(const Image& image, const std::string&) const {
  return ToySemanticExtract(image, projection_);
}

FeatureMap SemanticFromFile(const std::string& directory, const std::string& image_id) {
  const TensorF blob = ReadTensorFile(directory + "/" + image_id + ".srmt");
  if (blob.rank() != 3) {
    throw Error(ErrorCode::kFormat, "semantic blob must be (grid_h, grid_w, D), got " +
                                        ShapeToString(blob.shape()));
  }
  FeatureMap map;
  map.height = blob.dim(0);
  map.width = blob.dim(1);
  map.channels = blob.dim(2);
  map.origin = FeatureOrigin::kSemantic;
  map.scale = 1.0;  // unknown until resampled onto the coarse grid
  map.values.assign(blob.values().begin(), blob.values().end());
  map.valid.assign(static_cast<std::size_t>(map.num_cells()), 1);
  return map;
}

FileSemanticProvider::FileSemanticProvider(std::string directory, int channels)
    : directory_(std::move(directory)), channels_(channels) {}

FeatureMap FileSemanticProvider::Extract(const Image&, const std::string& image_id) const {
  FeatureMap map = SemanticFromFile(directory_, image_id);
  if (map.channels != channels_) {
    throw Error(ErrorCode::kFormat, "semantic blob for '" + image_id + "' has " +
                                        std::to_string(map.channels) + " channels, expected " +
                                        std::to_string(channels_));
  }
  return map;
}

FeatureMap ResizeBilinear(const FeatureMap& map, int target_height, int target_width) {
  if (target_height <= 0 || target_width <= 0) {
    throw Error(ErrorCode::kDimension, "zero target grid");
  }
  if (map.channels <= 0 || map.num_cells() == 0) {
    throw Error(ErrorCode::kDimension, "empty feature map");
  }
  FeatureMap out;
  out.height = target_height;
  out.width = target_width;
  out.channels = map.channels;
  out.origin = map.origin;
  out.scale = map.scale * static_cast<double>(target_height) / map.height;
  out.values.assign(static_cast<std::size_t>(target_height) * target_width * map.channels, 0.0f);
  out.valid.assign(static_cast<std::size_t>(target_height) * target_width, 1);
  // Half-pixel centres, clamped to the border cells.
  auto source_coord = [](int t, int target, int source) {
    const double s = (t + 0.5) * source / target - 0.5;
    return std::clamp(s, 0.0, static_cast<double>(source - 1));
  };
  for (int ty = 0; ty < target_height; ++ty) {
    const double sy = source_coord(ty, target_height, map.height);
    const int y0 = std::min(static_cast<int>(sy), map.height - 1);
    const int y1 = std::min(y0 + 1, map.height - 1);
    const double fy = sy - y0;
    for (int tx = 0; tx < target_width; ++tx) {
      const double sx = source_coord(tx, target_width, map.width);
      const int x0 = std::min(static_cast<int>(sx), map.width - 1);
      const int x1 = std::min(x0 + 1, map.width - 1);
      const double fx = sx - x0;
      const float* c00 = map.cell(y0 * map.width + x0);
      const float* c01 = map.cell(y0 * map.width + x1);
      const float* c10 = map.cell(y1 * map.width + x0);
      const float* c11 = map.cell(y1 * map.width + x1);
      float* dst = out.cell(ty * target_width + tx);
      for (int c = 0; c < map.channels; ++c) {
        const double top = c00[c] * (1 - fx) + c01[c] * fx;
        const double bottom = c10[c] * (1 - fx) + c11[c] * fx;
        dst[c] = static_cast<float>(top * (1 - fy) + bottom * fy);
      }
      if (!map.valid.empty()) {
        const int ny = static_cast<int>(std::lround(sy)), nx = static_cast<int>(std::lround(sx));
        out.valid[static_cast<std::size_t>(ty) * target_width + tx] =
            map.valid[static_cast<std::size_t>(ny) * map.width + nx];
      }
    }
  }
  return out;
}

std::unique_ptr<SemanticProvider> MakeSemanticProvider(const std::string& semantic_dir,
                                                       int channels) {
  if (semantic_dir.empty()) return std::make_unique<ToySemanticProvider>(channels);
  return std::make_unique<FileSemanticProvider>(semantic_dir, channels);
}

}  // namespace semmatch
