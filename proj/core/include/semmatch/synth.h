#ifndef SEMMATCH_SYNTH_H_
#define SEMMATCH_SYNTH_H_

#include <cstdint>
#include <string>
#include <vector>

#include "semmatch/feature_map.h"
#include "semmatch/homography.h"
#include "semmatch/image.h"

namespace semmatch {

// Ranges are fractions of the image side unless stated otherwise.
struct HomographySamplerConfig {
  double max_corner_perturbation = 0.2;  // bound on every corner's displacement
  double rotation_deg = 15.0;
  double scale_min = 0.8;
  double scale_max = 1.25;
  double translation = 0.1;
  double perspective = 0.1;  // independent per-corner jitter

  void Validate() const;
};

// Unit-square corners are moved by a random similarity (scale, rotation
// about the center, translation) plus per-corner jitter; the displacement
// field is shrunk uniformly when any corner moves farther than
// max_corner_perturbation. The corner map is solved by DLT and conjugated to
// pixel coordinates of a width x height image. Non-convex or degenerate
// corner sets are resampled up to 100 times, then kEstimationFailure.
Homography SampleHomography(std::uint64_t seed, const HomographySamplerConfig& config,
                            int width, int height);

// Inverse bilinear warp onto a canvas of the source size. `mask` marks target
// pixels whose preimage lies inside the source content.
struct WarpResult {
  Image image;
  std::vector<std::uint8_t> mask;  // [height * width]
};
WarpResult WarpImage(const Image& image, const Homography& h);

struct PhotometricConfig {
  double brightness = 0.1;       // offset in [-b, b]
  double contrast = 0.2;         // scale in [1 - c, 1 + c] about 0.5
  int max_blur_length = 5;       // motion blur length in pixels, <= 1 disables
  double max_noise_sigma = 0.02;

  static PhotometricConfig Zero() { return {0.0, 0.0, 0, 0.0}; }
};

struct PhotometricParams {
  double brightness = 0.0;
  double contrast = 1.0;
  int blur_length = 1;
  double blur_angle = 0.0;  // radians
  double noise_sigma = 0.0;
  std::uint64_t noise_seed = 0;
};

PhotometricParams SamplePhotometric(std::uint64_t seed, const PhotometricConfig& config);
// Brightness, contrast, motion blur, Gaussian noise, then clamp to [0, 1].
Image ApplyPhotometric(const Image& image, const PhotometricParams& params);
Image PhotometricDistort(const Image& image, std::uint64_t seed,
                         const PhotometricConfig& config);

// Procedural texture in [0, 1]: multi-octave value noise, smooth blobs,
// gradients, checkerboard patches and bars.
Image ProceduralImage(std::uint64_t seed, int width, int height);

struct FineGtMatch {
  int window = 0;  // index into GroundTruth::coarse
  int cell0 = 0;   // window cell in image 0
  int cell1 = 0;   // window cell in image 1
};

struct GroundTruth {
  std::vector<std::pair<int, int>> coarse;  // G_c as flat coarse indices
  std::vector<FineGtMatch> fine;            // G_f
};

struct GtLayout {
  Grid coarse0, coarse1;
  Grid fine0, fine1;
  int image0_width = 0, image0_height = 0;  // content of image 0
  int image1_width = 0, image1_height = 0;  // content of image 1
  int window = 5;
};

// Cell k at stride s represents pixel s * k. A source cell is assigned to
// the nearest target cell when its warped pixel lies in the target content,
// is unmasked, and is within half a cell (Euclidean) of that cell's pixel.
// Fine pairs are searched inside the windows of every coarse pair.
// `mask1` may be empty (no masking).
GroundTruth GtMatches(const Homography& h, const GtLayout& layout,
                      const std::vector<std::uint8_t>& mask1);

struct SyntheticPair {
  Image image0;
  Image image1;
  Homography h_gt;
  std::vector<std::uint8_t> mask;
};

// image1 = distort(warp(image0, H)); image0 is left untouched.
SyntheticPair MakeSyntheticPair(const Image& image0, std::uint64_t seed,
                                const HomographySamplerConfig& sampler,
                                const PhotometricConfig& photometric);

struct ManifestEntry {
  std::string image_path;  // empty for procedural sources
  std::uint64_t seed = 0;
};

// Lines of `image_path seed` or `synthetic N master_seed`; '#' starts a
// comment. Relative paths resolve against `base_dir`.
std::vector<ManifestEntry> ParseManifest(const std::string& text, const std::string& base_dir);
std::vector<ManifestEntry> ReadManifest(const std::string& path);
std::vector<ManifestEntry> ProceduralManifest(int count, std::uint64_t master_seed);

// Source image for an entry, resized to size x size when loaded from disk.
Image LoadSourceImage(const ManifestEntry& entry, int size);

}  // namespace semmatch

#endif  // SEMMATCH_SYNTH_H_
