#include "semmatch/ransac.h"

#include <algorithm>
#include <cmath>
#include <limits>

#include "semmatch/dlt.h"
#include "semmatch/error.h"
#include "semmatch/random.h"

namespace semmatch {
namespace {

struct Scored {
  std::vector<char> mask;
  int count = 0;
  double total_error = 0.0;
};

Scored Score(const Homography& h, std::span<const Correspondence> corrs,
             double threshold) {
  Scored s;
  s.mask.assign(corrs.size(), 0);
  Homography h_inv;
  try {
    h_inv = h.Inverse();
  } catch (const Error&) {
    return s;
  }
  for (std::size_t i = 0; i < corrs.size(); ++i) {
    const double e = SymmetricTransferError(h, h_inv, corrs[i]);
    if (e < threshold) {
      s.mask[i] = 1;
      ++s.count;
      s.total_error += e;
    }
  }
  return s;
}

bool Better(const Scored& a, const Scored& b) {
  return a.count > b.count || (a.count == b.count && a.total_error < b.total_error);
}

int AdaptiveIterationBound(double inlier_ratio, double confidence, int max_iterations) {
  const double w4 = std::pow(inlier_ratio, 4);
  if (w4 >= 1.0) return 1;
  if (w4 <= 0.0) return max_iterations;
  const double n = std::log(1.0 - confidence) / std::log(1.0 - w4);
  if (!std::isfinite(n) || n >= max_iterations) return max_iterations;
  return std::max(1, static_cast<int>(std::ceil(n)));
}

}  // namespace

double SymmetricTransferError(const Homography& h, const Homography& h_inv,
                              const Correspondence& c) {
  try {
    const double forward = (h.Apply(c.p) - c.q).norm();
    const double backward = (h_inv.Apply(c.q) - c.p).norm();
    return 0.5 * (forward + backward);
  } catch (const Error&) {
    return std::numeric_limits<double>::infinity();
  }
}

RansacResult RansacHomography(std::span<const Correspondence> corrs,
                              const RansacOptions& options) {
  const int n = static_cast<int>(corrs.size());
  if (n < 4) {
    throw Error(ErrorCode::kInsufficientData,
                "RANSAC needs at least 4 correspondences, got " + std::to_string(n));
  }
  if (options.max_iterations <= 0 || !(options.confidence > 0.0 && options.confidence < 1.0)) {
    throw Error(ErrorCode::kConfig, "invalid RANSAC options");
  }

  Scored best;
  Homography best_model;
  int bound = options.max_iterations;
  int iter = 0;
  for (; iter < bound; ++iter) {
    Rng rng(StreamSeed(options.seed, static_cast<std::uint64_t>(iter)));
    int idx[4];
    for (int k = 0; k < 4; ++k) {
      bool fresh = false;
      while (!fresh) {
        idx[k] = static_cast<int>(rng.Index(n));
        fresh = std::find(idx, idx + k, idx[k]) == idx + k;
      }
    }
    const Correspondence sample[4] = {corrs[idx[0]], corrs[idx[1]], corrs[idx[2]], corrs[idx[3]]};
    if (HasCollinearTriple(sample[0].p, sample[1].p, sample[2].p, sample[3].p,
                           options.collinear_area_tolerance) ||
        HasCollinearTriple(sample[0].q, sample[1].q, sample[2].q, sample[3].q,
                           options.collinear_area_tolerance)) {
      continue;
    }
    Homography model;
    try {
      model = FitDlt(sample);
    } catch (const Error&) {
      continue;
    }
    Scored scored = Score(model, corrs, options.inlier_threshold);
    if (Better(scored, best)) {
      best = std::move(scored);
      best_model = model;
      bound = std::min(bound, AdaptiveIterationBound(static_cast<double>(best.count) / n,
                                                     options.confidence,
                                                     options.max_iterations));
    }
  }
  if (best.count < 4) {
    throw Error(ErrorCode::kEstimationFailure, "no model with at least 4 inliers");
  }

  // Refit on the consensus set while it does not shrink.
  for (int round = 0; round < 3; ++round) {
    std::vector<Correspondence> inliers;
    inliers.reserve(best.count);
    for (int i = 0; i < n; ++i) {
      if (best.mask[i]) inliers.push_back(corrs[i]);
    }
    Homography refit;
    try {
      refit = FitDlt(inliers);
    } catch (const Error&) {
      break;
    }
    Scored scored = Score(refit, corrs, options.inlier_threshold);
    if (scored.count < best.count) break;
    const bool changed = scored.mask != best.mask;
    best = std::move(scored);
    best_model = refit;
    if (!changed) break;
  }

  RansacResult result;
  result.model = best_model;
  result.inlier_mask = std::move(best.mask);
  result.num_inliers = best.count;
  result.iterations = iter;
  return result;
}

}  // namespace semmatch
