#ifndef SEMMATCH_MATCHING_H_
#define SEMMATCH_MATCHING_H_

#include <optional>
#include <string>
#include <vector>

#include "semmatch/feature_map.h"
#include "semmatch/homography.h"
#include "semmatch/tensor.h"

namespace semmatch {

struct MatchingConfig {
  double temperature = 0.1;       // coarse similarity temperature
  double coarse_threshold = 0.2;  // theta_c
  int window = 5;                 // fine window side, odd
  double fine_temperature = 0.1;
  double fine_threshold = 0.2;    // theta_f
};

// Entries in [0, 1]; rows index image-0 tokens, columns image-1 tokens.
using ConfidenceMatrix = TensorF;

struct CoarseMatch {
  int index0 = 0;  // flat token index in image 0
  int index1 = 0;  // flat token index in image 1
  float confidence = 0.0f;

  bool operator==(const CoarseMatch&) const = default;
};

struct FineMatch {
  Point2 p0 = Point2::Zero();  // full-resolution pixels
  Point2 p1 = Point2::Zero();
  float confidence = 0.0f;
  int cell0 = -1;  // window cell indices
  int cell1 = -1;
};

// S(i, j) = <a_i, b_j> / temperature; rows/columns of invalid cells are -inf.
TensorF SimilarityMatrix(const FeatureMap& a, const FeatureMap& b, double temperature);

// Row softmax times column softmax. -inf entries get probability 0; a row or
// column with no finite entry is all zero, so an all-masked input yields an
// all-zero matrix and therefore no matches.
ConfidenceMatrix DualSoftmax(const TensorF& scores);

// Index of the first maximum of row r / column c (smallest index on ties).
int RowArgmax(const ConfidenceMatrix& p, int r);
int ColArgmax(const ConfidenceMatrix& p, int c);

// Pairs (i, j) with P(i, j) >= threshold and P(i, j) > 0 that are mutual
// argmaxes, in increasing i.
std::vector<CoarseMatch> MnnSelect(const ConfidenceMatrix& p, double threshold);

// w x w window of a fine map. Cell (u, v) of the window (row-major) is fine
// cell (origin_x + u, origin_y + v); out-of-map or invalid cells are zero and
// masked.
struct FeatureWindow {
  int size = 0;
  int channels = 0;
  int origin_x = 0;
  int origin_y = 0;
  double scale = 0.5;
  std::vector<float> values;
  std::vector<std::uint8_t> valid;

  int num_cells() const { return size * size; }
  const float* cell(int i) const { return values.data() + static_cast<std::size_t>(i) * channels; }
  // Full-resolution pixel represented by window cell i.
  Point2 PixelOf(int i) const;
};

// Window centered on fine cell (center_x, center_y). Throws kContract when
// `window` is even.
FeatureWindow CropWindow(const FeatureMap& fine, int center_x, int center_y, int window);

// Coarse token -> fine center at 4x the coarse cell coordinates.
FeatureWindow CropWindowAtCoarse(const FeatureMap& fine, int coarse_width, int coarse_index,
                                 int window);

// Pixel-to-pixel confidences of two windows: dual softmax of
// <w0[a], w1[b]> / temperature with masked cells at -inf.
ConfidenceMatrix WindowConfidence(const FeatureWindow& w0, const FeatureWindow& w1,
                                  double temperature);

// Overlap-based fine matching: thresholded mutual nearest neighbours over
// the window confidence matrix.
std::vector<FineMatch> FineMatchOverlap(const FeatureWindow& w0, const FeatureWindow& w1,
                                        double temperature, double threshold);
std::vector<FineMatch> FineMatchOverlap(const FeatureWindow& w0, const FeatureWindow& w1,
                                        const ConfidenceMatrix& p, double threshold);

// Center-only refinement: the window-0 center is matched to its best
// window-1 cell. Empty when the center is masked.
std::optional<FineMatch> FineMatchCenter(const FeatureWindow& w0, const FeatureWindow& w1,
                                         const ConfidenceMatrix& p);

// One line per match: "x0 y0 x1 y1 confidence", 6 decimals.
std::string FormatMatches(const std::vector<FineMatch>& matches);
void WriteMatchesFile(const std::string& path, const std::vector<FineMatch>& matches);
std::vector<FineMatch> ParseMatches(const std::string& text);

}  // namespace semmatch

#endif  // SEMMATCH_MATCHING_H_
