#include "semmatch/image.h"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <iterator>

#include "semmatch/error.h"

namespace semmatch {
namespace {

class HeaderReader {
 public:
  explicit HeaderReader(const std::string& bytes) : bytes_(bytes) {}

  int NextInt() {
    SkipSpaceAndComments();
    if (pos_ >= bytes_.size() || !std::isdigit(static_cast<unsigned char>(bytes_[pos_]))) {
      throw Error(ErrorCode::kFormat, "malformed netpbm header");
    }
    long v = 0;
    while (pos_ < bytes_.size() && std::isdigit(static_cast<unsigned char>(bytes_[pos_]))) {
      v = v * 10 + (bytes_[pos_++] - '0');
      if (v > 1 << 20) throw Error(ErrorCode::kFormat, "netpbm header value too large");
    }
    return static_cast<int>(v);
  }

  // Exactly one whitespace byte separates the header from the raster.
  std::size_t RasterStart() {
    if (pos_ >= bytes_.size() || !std::isspace(static_cast<unsigned char>(bytes_[pos_]))) {
      throw Error(ErrorCode::kFormat, "malformed netpbm header");
    }
    return pos_ + 1;
  }

 private:
  void SkipSpaceAndComments() {
    while (pos_ < bytes_.size()) {
      const char c = bytes_[pos_];
      if (c == '#') {
        while (pos_ < bytes_.size() && bytes_[pos_] != '\n') ++pos_;
      } else if (std::isspace(static_cast<unsigned char>(c))) {
        ++pos_;
      } else {
        break;
      }
    }
  }

  const std::string& bytes_;
  std::size_t pos_ = 2;
};

}  // namespace

Image DecodeNetpbm(const std::string& bytes) {
  if (bytes.size() < 2 || bytes[0] != 'P' || (bytes[1] != '5' && bytes[1] != '6')) {
    throw Error(ErrorCode::kFormat, "not a binary PGM/PPM file");
  }
  const bool color = bytes[1] == '6';
  HeaderReader header(bytes);
  const int width = header.NextInt();
  const int height = header.NextInt();
  const int maxval = header.NextInt();
  if (width <= 0 || height <= 0) throw Error(ErrorCode::kFormat, "empty image");
  if (maxval != 255) {
    throw Error(ErrorCode::kFormat, "unsupported maxval " + std::to_string(maxval));
  }
  const std::size_t start = header.RasterStart();
  const std::size_t channels = color ? 3 : 1;
  const std::size_t need = static_cast<std::size_t>(width) * height * channels;
  if (bytes.size() - start < need) throw Error(ErrorCode::kFormat, "truncated raster");

  Image image(width, height);
  const auto* raster = reinterpret_cast<const unsigned char*>(bytes.data() + start);
  for (std::size_t i = 0; i < image.pixels.size(); ++i) {
    if (color) {
      const unsigned char* px = raster + 3 * i;
      image.pixels[i] = static_cast<float>((0.299 * px[0] + 0.587 * px[1] + 0.114 * px[2]) / 255.0);
    } else {
      image.pixels[i] = static_cast<float>(raster[i] / 255.0);
    }
  }
  return PadToMultiple(image, kPadMultiple);
}

Image LoadImage(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot open '" + path + "'");
  const std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return DecodeNetpbm(bytes);
}

void SavePgm(const std::string& path, const Image& image) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIo, "cannot write '" + path + "'");
  out << "P5\n" << image.original_width << " " << image.original_height << "\n255\n";
  for (int y = 0; y < image.original_height; ++y) {
    for (int x = 0; x < image.original_width; ++x) {
      const float v = std::clamp(image.at(x, y), 0.0f, 1.0f);
      out.put(static_cast<char>(static_cast<unsigned char>(std::lround(v * 255.0f))));
    }
  }
  if (!out) throw Error(ErrorCode::kIo, "short write to '" + path + "'");
}

Image PadToMultiple(const Image& image, int multiple) {
  const int w = (image.original_width + multiple - 1) / multiple * multiple;
  const int h = (image.original_height + multiple - 1) / multiple * multiple;
  Image out(w, h, 0.0f);
  out.original_width = image.original_width;
  out.original_height = image.original_height;
  for (int y = 0; y < image.original_height; ++y) {
    for (int x = 0; x < image.original_width; ++x) out.at(x, y) = image.at(x, y);
  }
  return out;
}

bool SampleBilinear(const Image& image, double x, double y, float* value) {
  const int w = image.original_width, h = image.original_height;
  if (!(x >= 0.0 && y >= 0.0 && x <= w - 1 && y <= h - 1)) return false;
  const int x0 = std::min(static_cast<int>(x), std::max(w - 2, 0));
  const int y0 = std::min(static_cast<int>(y), std::max(h - 2, 0));
  const int x1 = std::min(x0 + 1, w - 1), y1 = std::min(y0 + 1, h - 1);
  const double fx = x - x0, fy = y - y0;
  const double top = image.at(x0, y0) * (1 - fx) + image.at(x1, y0) * fx;
  const double bottom = image.at(x0, y1) * (1 - fx) + image.at(x1, y1) * fx;
  *value = static_cast<float>(top * (1 - fy) + bottom * fy);
  return true;
}

Image ResizeImage(const Image& image, int width, int height) {
  if (width <= 0 || height <= 0) throw Error(ErrorCode::kDimension, "resize to empty image");
  Image out(width, height);
  const double sx = static_cast<double>(image.original_width) / width;
  const double sy = static_cast<double>(image.original_height) / height;
  for (int y = 0; y < height; ++y) {
    const double src_y = std::clamp((y + 0.5) * sy - 0.5, 0.0, image.original_height - 1.0);
    for (int x = 0; x < width; ++x) {
      const double src_x = std::clamp((x + 0.5) * sx - 0.5, 0.0, image.original_width - 1.0);
      float v = 0.0f;
      SampleBilinear(image, src_x, src_y, &v);
      out.at(x, y) = v;
    }
  }
  return out;
}

}  // namespace semmatch
