#ifndef SEMMATCH_METRICS_H_
#define SEMMATCH_METRICS_H_

#include <optional>
#include <span>

#include "semmatch/homography.h"

namespace semmatch {

enum class CornerAggregation { kMean, kMax };

// Distance between the four image corners (0,0), (w-1,0), (0,h-1), (w-1,h-1)
// warped by the estimate and by the ground truth, aggregated over corners.
// A corner that maps to infinity under the estimate yields +inf.
double CornerError(const Homography& estimate, const Homography& ground_truth,
                   int width, int height,
                   CornerAggregation aggregation = CornerAggregation::kMean);

// Failed estimations (nullopt) count as +inf.
double CornerError(const std::optional<Homography>& estimate,
                   const Homography& ground_truth, int width, int height,
                   CornerAggregation aggregation = CornerAggregation::kMean);

// Normalized area under the empirical recall-vs-error staircase on
// [0, threshold]. Infinite errors are never recalled but count in the
// denominator. Result in [0, 1]; throws kUndefinedMetric on an empty list.
double Auc(std::span<const double> errors, double threshold);

// Fraction of errors <= e.
double RecallAt(std::span<const double> errors, double e);

}  // namespace semmatch

#endif  // SEMMATCH_METRICS_H_
