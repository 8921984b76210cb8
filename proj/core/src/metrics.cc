#include "semmatch/metrics.h"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <vector>

#include "semmatch/error.h"

namespace semmatch {

double CornerError(const Homography& estimate, const Homography& ground_truth,
                   int width, int height, CornerAggregation aggregation) {
  const std::array<Point2, 4> corners = {
      Point2(0, 0), Point2(width - 1, 0), Point2(0, height - 1),
      Point2(width - 1, height - 1)};
  double sum = 0.0, max_d = 0.0;
  for (const Point2& c : corners) {
    double d;
    try {
      d = (estimate.Apply(c) - ground_truth.Apply(c)).norm();
    } catch (const Error&) {
      d = std::numeric_limits<double>::infinity();
    }
    sum += d;
    max_d = std::max(max_d, d);
  }
  return aggregation == CornerAggregation::kMean ? sum / 4.0 : max_d;
}

double CornerError(const std::optional<Homography>& estimate,
                   const Homography& ground_truth, int width, int height,
                   CornerAggregation aggregation) {
  if (!estimate) return std::numeric_limits<double>::infinity();
  return CornerError(*estimate, ground_truth, width, height, aggregation);
}

double RecallAt(std::span<const double> errors, double e) {
  if (errors.empty()) throw Error(ErrorCode::kUndefinedMetric, "recall of empty list");
  const auto n = std::count_if(errors.begin(), errors.end(), [e](double x) { return x <= e; });
  return static_cast<double>(n) / static_cast<double>(errors.size());
}

double Auc(std::span<const double> errors, double threshold) {
  if (errors.empty()) throw Error(ErrorCode::kUndefinedMetric, "AUC of empty error list");
  if (!(threshold > 0.0)) throw Error(ErrorCode::kUndefinedMetric, "AUC threshold must be > 0");
  std::vector<double> sorted;
  sorted.reserve(errors.size());
  for (double e : errors) {
    if (std::isnan(e) || e < 0.0) {
      throw Error(ErrorCode::kContract, "corner errors must be non-negative");
    }
    if (e < threshold) sorted.push_back(e);
  }
  std::sort(sorted.begin(), sorted.end());
  // Trapezoids over the staircase vertices (e_k, r_{k-1}), (e_k, r_k); the
  // vertical risers contribute zero width.
  const double n = static_cast<double>(errors.size());
  double area = 0.0;
  double prev_e = 0.0, recall = 0.0;
  for (std::size_t k = 0; k < sorted.size(); ++k) {
    area += (sorted[k] - prev_e) * recall;
    prev_e = sorted[k];
    recall = static_cast<double>(k + 1) / n;
  }
  area += (threshold - prev_e) * recall;
  return area / threshold;
}

}  // namespace semmatch
