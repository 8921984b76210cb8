#ifndef SEMMATCH_IMAGE_H_
#define SEMMATCH_IMAGE_H_

#include <string>
#include <vector>

namespace semmatch {

// Grayscale image with intensities in [0, 1], row-major. `width`/`height`
// are the (possibly padded) storage dimensions; `original_width`/
// `original_height` record the content size before padding.
struct Image {
  int width = 0;
  int height = 0;
  int original_width = 0;
  int original_height = 0;
  std::vector<float> pixels;

  Image() = default;
  Image(int w, int h, float fill = 0.0f)
      : width(w), height(h), original_width(w), original_height(h),
        pixels(static_cast<std::size_t>(w) * h, fill) {}

  float& at(int x, int y) { return pixels[static_cast<std::size_t>(y) * width + x]; }
  float at(int x, int y) const { return pixels[static_cast<std::size_t>(y) * width + x]; }
  bool InContent(int x, int y) const {
    return x >= 0 && y >= 0 && x < original_width && y < original_height;
  }
};

inline constexpr int kPadMultiple = 8;

// Reads binary PGM (P5) or PPM (P6) with maxval 255. PPM is converted to
// gray with luma weights (0.299, 0.587, 0.114). The result is zero-padded to
// multiples of 8.
Image LoadImage(const std::string& path);
Image DecodeNetpbm(const std::string& bytes);

// Writes an 8-bit binary PGM of the content region.
void SavePgm(const std::string& path, const Image& image);

// Zero-pads bottom/right so both dimensions are multiples of `multiple`.
Image PadToMultiple(const Image& image, int multiple = kPadMultiple);

// Bilinear resize of the content region with half-pixel centres, clamped at
// the border.
Image ResizeImage(const Image& image, int width, int height);

// Bilinear sample with coordinates in pixels; returns false outside
// [0, w-1] x [0, h-1].
bool SampleBilinear(const Image& image, double x, double y, float* value);

}  // namespace semmatch

#endif  // SEMMATCH_IMAGE_H_
