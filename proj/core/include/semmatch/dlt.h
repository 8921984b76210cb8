#ifndef SEMMATCH_DLT_H_
#define SEMMATCH_DLT_H_

#include <span>

#include "semmatch/homography.h"

namespace semmatch {

// Direct linear transform with Hartley normalization: both point sets are
// shifted to their centroid and scaled to mean distance sqrt(2), and the
// 2N x 9 system is solved by its right singular vector of least singular
// value.
//
// Throws kInsufficientData for fewer than 4 correspondences and
// kRankDeficient for degenerate configurations.
Homography FitDlt(std::span<const Correspondence> correspondences);

// Twice the signed triangle area.
double TriangleArea2(const Point2& a, const Point2& b, const Point2& c);

// True when any three of the four points are collinear within `area_tol`.
bool HasCollinearTriple(const Point2& a, const Point2& b, const Point2& c,
                        const Point2& d, double area_tol);

}  // namespace semmatch

#endif  // SEMMATCH_DLT_H_
