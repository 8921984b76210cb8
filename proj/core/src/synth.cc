#include "semmatch/synth.h"

#include <algorithm>
#include <array>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>

#include "semmatch/dlt.h"
#include "semmatch/error.h"
#include "semmatch/random.h"

namespace semmatch {
namespace {

constexpr int kMaxSampleAttempts = 100;

bool IsConvexQuad(const std::array<Point2, 4>& q) {
  double sign = 0.0;
  for (int k = 0; k < 4; ++k) {
    const Point2 e0 = q[(k + 1) % 4] - q[k];
    const Point2 e1 = q[(k + 2) % 4] - q[(k + 1) % 4];
    const double cross = e0.x() * e1.y() - e0.y() * e1.x();
    if (std::abs(cross) < 1e-6) return false;
    if (sign == 0.0) sign = cross;
    if (sign * cross < 0.0) return false;
  }
  return true;
}

float SampleClamped(const Image& image, double x, double y) {
  x = std::clamp(x, 0.0, image.original_width - 1.0);
  y = std::clamp(y, 0.0, image.original_height - 1.0);
  float v = 0.0f;
  SampleBilinear(image, x, y, &v);
  return v;
}

double Smoothstep(double t) { return t * t * (3.0 - 2.0 * t); }

// Value noise on a lattice with `spacing` pixels between nodes.
void AddValueNoise(Rng& rng, double spacing, double amplitude, std::vector<double>& canvas,
                   int width, int height) {
  const int gw = static_cast<int>(std::ceil(width / spacing)) + 2;
  const int gh = static_cast<int>(std::ceil(height / spacing)) + 2;
  std::vector<double> lattice(static_cast<std::size_t>(gw) * gh);
  for (double& v : lattice) v = rng.Uniform(-1.0, 1.0);
  for (int y = 0; y < height; ++y) {
    const double fy = y / spacing;
    const int y0 = static_cast<int>(fy);
    const double ty = Smoothstep(fy - y0);
    for (int x = 0; x < width; ++x) {
      const double fx = x / spacing;
      const int x0 = static_cast<int>(fx);
      const double tx = Smoothstep(fx - x0);
      auto node = [&](int gx, int gy) { return lattice[static_cast<std::size_t>(gy) * gw + gx]; };
      const double top = node(x0, y0) * (1 - tx) + node(x0 + 1, y0) * tx;
      const double bottom = node(x0, y0 + 1) * (1 - tx) + node(x0 + 1, y0 + 1) * tx;
      canvas[static_cast<std::size_t>(y) * width + x] += amplitude * (top * (1 - ty) + bottom * ty);
    }
  }
}

std::size_t PixelIndex(int x, int y, int width) {
  return static_cast<std::size_t>(y) * width + x;
}

}  // namespace

void HomographySamplerConfig::Validate() const {
  if (max_corner_perturbation < 0 || rotation_deg < 0 || translation < 0 || perspective < 0 ||
      scale_min <= 0 || scale_max < scale_min) {
    throw Error(ErrorCode::kConfig, "invalid homography sampler ranges");
  }
}

Homography SampleHomography(std::uint64_t seed, const HomographySamplerConfig& config,
                            int width, int height) {
  config.Validate();
  const std::array<Point2, 4> unit = {Point2(0, 0), Point2(1, 0), Point2(1, 1), Point2(0, 1)};
  const Point2 center(0.5, 0.5);
  for (int attempt = 0; attempt < kMaxSampleAttempts; ++attempt) {
    Rng rng(StreamSeed(seed, static_cast<std::uint64_t>(attempt)));
    const double log_lo = std::log(config.scale_min), log_hi = std::log(config.scale_max);
    const double scale = std::exp(rng.Uniform(log_lo, log_hi));
    const double angle = rng.Uniform(-config.rotation_deg, config.rotation_deg) *
                         std::numbers::pi / 180.0;
    const Point2 shift(rng.Uniform(-config.translation, config.translation),
                       rng.Uniform(-config.translation, config.translation));
    const Eigen::Matrix2d rot = Eigen::Rotation2Dd(angle).toRotationMatrix();

    std::array<Point2, 4> moved;
    double max_disp = 0.0;
    for (int k = 0; k < 4; ++k) {
      const Point2 jitter(rng.Uniform(-config.perspective, config.perspective),
                          rng.Uniform(-config.perspective, config.perspective));
      moved[k] = center + scale * (rot * (unit[k] - center)) + shift + jitter;
      max_disp = std::max(max_disp, (moved[k] - unit[k]).norm());
    }
    if (max_disp > config.max_corner_perturbation) {
      const double shrink = max_disp > 0 ? config.max_corner_perturbation / max_disp : 0.0;
      for (int k = 0; k < 4; ++k) moved[k] = unit[k] + shrink * (moved[k] - unit[k]);
    }
    if (!IsConvexQuad(moved)) continue;

    std::array<Correspondence, 4> corr;
    for (int k = 0; k < 4; ++k) {
      corr[k].p = Point2(unit[k].x() * width, unit[k].y() * height);
      corr[k].q = Point2(moved[k].x() * width, moved[k].y() * height);
    }
    try {
      return FitDlt(corr);
    } catch (const Error&) {
      continue;
    }
  }
  throw Error(ErrorCode::kEstimationFailure, "homography sampler found no valid corner set");
}

WarpResult WarpImage(const Image& image, const Homography& h) {
  const Homography inv = h.Inverse();
  WarpResult out;
  out.image = Image(image.width, image.height, 0.0f);
  out.image.original_width = image.original_width;
  out.image.original_height = image.original_height;
  out.mask.assign(static_cast<std::size_t>(image.width) * image.height, 0);
  for (int y = 0; y < image.original_height; ++y) {
    for (int x = 0; x < image.original_width; ++x) {
      const Eigen::Vector3d src = inv.matrix() * Eigen::Vector3d(x, y, 1.0);
      if (std::abs(src.z()) <= 1e-12) continue;
      float v = 0.0f;
      if (SampleBilinear(image, src.x() / src.z(), src.y() / src.z(), &v)) {
        out.image.at(x, y) = v;
        out.mask[PixelIndex(x, y, image.width)] = 1;
      }
    }
  }
  return out;
}

PhotometricParams SamplePhotometric(std::uint64_t seed, const PhotometricConfig& config) {
  Rng rng(seed);
  PhotometricParams p;
  p.brightness = rng.Uniform(-config.brightness, config.brightness);
  p.contrast = rng.Uniform(1.0 - config.contrast, 1.0 + config.contrast);
  p.blur_length =
      config.max_blur_length > 1 ? 1 + static_cast<int>(rng.Index(config.max_blur_length)) : 1;
  p.blur_angle = rng.Uniform(0.0, std::numbers::pi);
  p.noise_sigma = rng.Uniform(0.0, config.max_noise_sigma);
  p.noise_seed = rng.NextU64();
  return p;
}

Image ApplyPhotometric(const Image& image, const PhotometricParams& params) {
  Image out = image;
  const int w = image.original_width, h = image.original_height;
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const double v = out.at(x, y) + params.brightness;
      out.at(x, y) = static_cast<float>((v - 0.5) * params.contrast + 0.5);
    }
  }
  if (params.blur_length > 1) {
    const Image src = out;
    const double dx = std::cos(params.blur_angle), dy = std::sin(params.blur_angle);
    const double half = (params.blur_length - 1) / 2.0;
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        double sum = 0.0;
        for (int k = 0; k < params.blur_length; ++k) {
          const double t = k - half;
          sum += SampleClamped(src, x + t * dx, y + t * dy);
        }
        out.at(x, y) = static_cast<float>(sum / params.blur_length);
      }
    }
  }
  Rng noise(params.noise_seed);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      double v = out.at(x, y);
      if (params.noise_sigma > 0.0) v += params.noise_sigma * noise.Normal();
      out.at(x, y) = static_cast<float>(std::clamp(v, 0.0, 1.0));
    }
  }
  return out;
}

Image PhotometricDistort(const Image& image, std::uint64_t seed,
                         const PhotometricConfig& config) {
  return ApplyPhotometric(image, SamplePhotometric(seed, config));
}

Image ProceduralImage(std::uint64_t seed, int width, int height) {
  Rng rng(seed);
  std::vector<double> canvas(static_cast<std::size_t>(width) * height, 0.0);
  AddValueNoise(rng, 16.0, 0.5, canvas, width, height);
  AddValueNoise(rng, 8.0, 0.3, canvas, width, height);
  AddValueNoise(rng, 4.0, 0.15, canvas, width, height);

  const double gx = rng.Uniform(-1, 1) / width, gy = rng.Uniform(-1, 1) / height;
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) canvas[PixelIndex(x, y, width)] += 0.4 * (gx * x + gy * y);
  }

  const int blobs = 6 + static_cast<int>(rng.Index(7));
  for (int b = 0; b < blobs; ++b) {
    const double cx = rng.Uniform(0, width), cy = rng.Uniform(0, height);
    const double sigma = rng.Uniform(2.0, 8.0);
    const double amp = rng.Uniform(-0.8, 0.8);
    for (int y = 0; y < height; ++y) {
      for (int x = 0; x < width; ++x) {
        const double d2 = (x - cx) * (x - cx) + (y - cy) * (y - cy);
        canvas[PixelIndex(x, y, width)] += amp * std::exp(-d2 / (2 * sigma * sigma));
      }
    }
  }

  const int patches = 1 + static_cast<int>(rng.Index(3));
  for (int c = 0; c < patches; ++c) {
    const int x0 = static_cast<int>(rng.Index(width)), y0 = static_cast<int>(rng.Index(height));
    const int pw = 8 + static_cast<int>(rng.Index(width / 3 + 1));
    const int ph = 8 + static_cast<int>(rng.Index(height / 3 + 1));
    const int period = 3 + static_cast<int>(rng.Index(4));
    const double amp = rng.Uniform(0.3, 0.6);
    for (int y = y0; y < std::min(height, y0 + ph); ++y) {
      for (int x = x0; x < std::min(width, x0 + pw); ++x) {
        const bool on = ((x - x0) / period + (y - y0) / period) % 2 == 0;
        canvas[PixelIndex(x, y, width)] += on ? amp : -amp;
      }
    }
  }

  const int bars = 2 + static_cast<int>(rng.Index(4));
  for (int b = 0; b < bars; ++b) {
    const double angle = rng.Uniform(0.0, std::numbers::pi);
    const double nx = std::cos(angle), ny = std::sin(angle);
    const double offset = rng.Uniform(0, 1) * (std::abs(nx) * width + std::abs(ny) * height) +
                          std::min(0.0, nx * width) + std::min(0.0, ny * height);
    const double thickness = rng.Uniform(0.8, 2.5);
    const double amp = rng.Uniform(-0.7, 0.7);
    for (int y = 0; y < height; ++y) {
      for (int x = 0; x < width; ++x) {
        if (std::abs(nx * x + ny * y - offset) <= thickness) {
          canvas[PixelIndex(x, y, width)] += amp;
        }
      }
    }
  }

  const auto [lo, hi] = std::minmax_element(canvas.begin(), canvas.end());
  const double range = std::max(*hi - *lo, 1e-9);
  Image image(width, height);
  for (std::size_t k = 0; k < canvas.size(); ++k) {
    image.pixels[k] = static_cast<float>(std::clamp((canvas[k] - *lo) / range, 0.0, 1.0));
  }
  return image;
}

GroundTruth GtMatches(const Homography& h, const GtLayout& layout,
                      const std::vector<std::uint8_t>& mask1) {
  if (!mask1.empty() &&
      mask1.size() != static_cast<std::size_t>(layout.image1_width) * layout.image1_height) {
    throw Error(ErrorCode::kDimension, "gt mask does not match image 1 content");
  }
  if (layout.window <= 0 || layout.window % 2 == 0) {
    throw Error(ErrorCode::kContract, "window size must be odd");
  }
  // Nearest target cell at `stride`, or -1.
  auto assign = [&](const Point2& p, double stride, Grid target) -> int {
    if (p.x() >= layout.image0_width || p.y() >= layout.image0_height) return -1;
    Point2 q;
    try {
      q = h.Apply(p);
    } catch (const Error&) {
      return -1;
    }
    if (!(q.x() >= 0 && q.y() >= 0 && q.x() <= layout.image1_width - 1 &&
          q.y() <= layout.image1_height - 1)) {
      return -1;
    }
    if (!mask1.empty() &&
        !mask1[PixelIndex(static_cast<int>(std::lround(q.x())),
                          static_cast<int>(std::lround(q.y())), layout.image1_width)]) {
      return -1;
    }
    const int tx = static_cast<int>(std::lround(q.x() / stride));
    const int ty = static_cast<int>(std::lround(q.y() / stride));
    if (tx < 0 || ty < 0 || tx >= target.width || ty >= target.height) return -1;
    if ((q - Point2(tx * stride, ty * stride)).norm() > stride / 2) return -1;
    return ty * target.width + tx;
  };

  GroundTruth gt;
  for (int i = 0; i < layout.coarse0.cells(); ++i) {
    const int x = i % layout.coarse0.width, y = i / layout.coarse0.width;
    const int j = assign(Point2(8.0 * x, 8.0 * y), 8.0, layout.coarse1);
    if (j >= 0) gt.coarse.emplace_back(i, j);
  }

  const int w = layout.window, half = w / 2;
  for (std::size_t m = 0; m < gt.coarse.size(); ++m) {
    const auto [i, j] = gt.coarse[m];
    const int ox0 = 4 * (i % layout.coarse0.width) - half;
    const int oy0 = 4 * (i / layout.coarse0.width) - half;
    const int ox1 = 4 * (j % layout.coarse1.width) - half;
    const int oy1 = 4 * (j / layout.coarse1.width) - half;
    for (int a = 0; a < w * w; ++a) {
      const int fx = ox0 + a % w, fy = oy0 + a / w;
      if (fx < 0 || fy < 0 || fx >= layout.fine0.width || fy >= layout.fine0.height) continue;
      const int g = assign(Point2(2.0 * fx, 2.0 * fy), 2.0, layout.fine1);
      if (g < 0) continue;
      const int u = g % layout.fine1.width - ox1, v = g / layout.fine1.width - oy1;
      if (u < 0 || v < 0 || u >= w || v >= w) continue;
      gt.fine.push_back({static_cast<int>(m), a, v * w + u});
    }
  }
  return gt;
}

SyntheticPair MakeSyntheticPair(const Image& image0, std::uint64_t seed,
                                const HomographySamplerConfig& sampler,
                                const PhotometricConfig& photometric) {
  SyntheticPair pair;
  pair.image0 = image0;
  pair.h_gt = SampleHomography(StreamSeed(seed, 0), sampler, image0.original_width,
                               image0.original_height);
  WarpResult warped = WarpImage(image0, pair.h_gt);
  pair.image1 = PhotometricDistort(warped.image, StreamSeed(seed, 1), photometric);
  pair.mask = std::move(warped.mask);
  return pair;
}

std::vector<ManifestEntry> ProceduralManifest(int count, std::uint64_t master_seed) {
  std::vector<ManifestEntry> entries;
  entries.reserve(static_cast<std::size_t>(std::max(count, 0)));
  for (int i = 0; i < count; ++i) {
    entries.push_back({"", StreamSeed(master_seed, static_cast<std::uint64_t>(i))});
  }
  return entries;
}

std::vector<ManifestEntry> ParseManifest(const std::string& text, const std::string& base_dir) {
  std::vector<ManifestEntry> entries;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::istringstream fields(line);
    std::string first;
    if (!(fields >> first)) continue;
    auto fail = [&] {
      return Error(ErrorCode::kFormat, "manifest line " + std::to_string(line_no) +
                                           ": expected 'image_path seed' or "
                                           "'synthetic N master_seed'");
    };
    if (first == "synthetic") {
      long long count = 0;
      std::uint64_t master = 0;
      if (!(fields >> count >> master) || count < 0) throw fail();
      for (ManifestEntry& e : ProceduralManifest(static_cast<int>(count), master)) {
        entries.push_back(std::move(e));
      }
    } else {
      std::uint64_t seed = 0;
      if (!(fields >> seed)) throw fail();
      std::filesystem::path path(first);
      if (path.is_relative() && !base_dir.empty()) path = std::filesystem::path(base_dir) / path;
      entries.push_back({path.string(), seed});
    }
    std::string extra;
    if (fields >> extra) throw fail();
  }
  return entries;
}

std::vector<ManifestEntry> ReadManifest(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot open manifest '" + path + "'");
  std::stringstream buffer;
  buffer << in.rdbuf();
  return ParseManifest(buffer.str(), std::filesystem::path(path).parent_path().string());
}

Image LoadSourceImage(const ManifestEntry& entry, int size) {
  if (entry.image_path.empty()) return ProceduralImage(entry.seed, size, size);
  return ResizeImage(LoadImage(entry.image_path), size, size);
}

}  // namespace semmatch
