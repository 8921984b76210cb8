#ifndef SEMMATCH_RANSAC_H_
#define SEMMATCH_RANSAC_H_

#include <cstdint>
#include <span>
#include <vector>

#include "semmatch/homography.h"

namespace semmatch {

struct RansacOptions {
  double inlier_threshold = 3.0;  // px, symmetric transfer error
  int max_iterations = 2000;
  double confidence = 0.9999;
  std::uint64_t seed = 0;
  // Minimal samples with a (near-)collinear triple are rejected.
  double collinear_area_tolerance = 1e-6;
};

struct RansacResult {
  Homography model;
  // Inlier flags under `model`, parallel to the input correspondences.
  std::vector<char> inlier_mask;
  int num_inliers = 0;
  int iterations = 0;
};

// Mean of forward and backward reprojection distance. Returns +inf when
// either direction maps to infinity.
double SymmetricTransferError(const Homography& h, const Homography& h_inv,
                              const Correspondence& c);

// Hypothesis k is drawn from its own RNG stream derived from (seed, k), so
// the hypothesis sequence depends only on the seed.
//
// Throws kInsufficientData for fewer than 4 correspondences and
// kEstimationFailure when no model reaches 4 inliers.
RansacResult RansacHomography(std::span<const Correspondence> correspondences,
                              const RansacOptions& options);

}  // namespace semmatch

#endif  // SEMMATCH_RANSAC_H_
