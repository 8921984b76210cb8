#include "semmatch/dlt.h"

#include <cmath>
#include <vector>

#include <Eigen/SVD>

#include "semmatch/error.h"

namespace semmatch {
namespace {

// Similarity transform moving the centroid to the origin with mean distance
// sqrt(2).
Eigen::Matrix3d HartleyNormalization(const std::vector<Point2>& points) {
  Point2 centroid = Point2::Zero();
  for (const Point2& p : points) centroid += p;
  centroid /= static_cast<double>(points.size());
  double mean_dist = 0.0;
  for (const Point2& p : points) mean_dist += (p - centroid).norm();
  mean_dist /= static_cast<double>(points.size());
  if (mean_dist <= 1e-12) {
    throw Error(ErrorCode::kRankDeficient, "all points coincide");
  }
  const double s = std::sqrt(2.0) / mean_dist;
  Eigen::Matrix3d t = Eigen::Matrix3d::Identity();
  t(0, 0) = s;
  t(1, 1) = s;
  t(0, 2) = -s * centroid.x();
  t(1, 2) = -s * centroid.y();
  return t;
}

}  // namespace

double TriangleArea2(const Point2& a, const Point2& b, const Point2& c) {
  return (b.x() - a.x()) * (c.y() - a.y()) - (b.y() - a.y()) * (c.x() - a.x());
}

bool HasCollinearTriple(const Point2& a, const Point2& b, const Point2& c,
                        const Point2& d, double area_tol) {
  const double tol2 = 2.0 * area_tol;
  return std::abs(TriangleArea2(a, b, c)) < tol2 || std::abs(TriangleArea2(a, b, d)) < tol2 ||
         std::abs(TriangleArea2(a, c, d)) < tol2 || std::abs(TriangleArea2(b, c, d)) < tol2;
}

Homography FitDlt(std::span<const Correspondence> correspondences) {
  const int n = static_cast<int>(correspondences.size());
  if (n < 4) {
    throw Error(ErrorCode::kInsufficientData,
                "DLT needs at least 4 correspondences, got " + std::to_string(n));
  }
  std::vector<Point2> src, dst;
  src.reserve(n);
  dst.reserve(n);
  for (const Correspondence& c : correspondences) {
    if (!c.p.allFinite() || !c.q.allFinite()) {
      throw Error(ErrorCode::kContract, "non-finite correspondence");
    }
    src.push_back(c.p);
    dst.push_back(c.q);
  }
  if (n == 4 && HasCollinearTriple(src[0], src[1], src[2], src[3], 1e-12)) {
    throw Error(ErrorCode::kRankDeficient, "collinear source points");
  }
  const Eigen::Matrix3d t_src = HartleyNormalization(src);
  const Eigen::Matrix3d t_dst = HartleyNormalization(dst);

  Eigen::MatrixXd a(2 * n, 9);
  for (int i = 0; i < n; ++i) {
    const Point2 p = (t_src * src[i].homogeneous()).hnormalized();
    const Point2 q = (t_dst * dst[i].homogeneous()).hnormalized();
    const double x = p.x(), y = p.y(), u = q.x(), v = q.y();
    a.row(2 * i) << -x, -y, -1, 0, 0, 0, u * x, u * y, u;
    a.row(2 * i + 1) << 0, 0, 0, -x, -y, -1, v * x, v * y, v;
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(a, Eigen::ComputeFullV);
  const Eigen::VectorXd& sv = svd.singularValues();
  // A non-degenerate configuration has a one-dimensional null space: the
  // eighth singular value must stay clear of zero.
  if (sv.size() < 8 || sv(7) <= 1e-9 * sv(0)) {
    throw Error(ErrorCode::kRankDeficient, "degenerate point configuration");
  }
  const Eigen::VectorXd h = svd.matrixV().col(8);
  Eigen::Matrix3d hn;
  hn << h(0), h(1), h(2), h(3), h(4), h(5), h(6), h(7), h(8);
  try {
    return Homography(t_dst.inverse() * hn * t_src);
  } catch (const Error&) {
    throw Error(ErrorCode::kRankDeficient, "DLT solution is singular");
  }
}

}  // namespace semmatch
