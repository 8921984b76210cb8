#ifndef SEMMATCH_HOMOGRAPHY_H_
#define SEMMATCH_HOMOGRAPHY_H_

#include <string>

#include <Eigen/Core>
#include <Eigen/Geometry>

namespace semmatch {

using Point2 = Eigen::Vector2d;

// Invertible 3x3 projective transform. The stored matrix is normalized so
// that H(2,2) == 1 whenever |H(2,2)| > 1e-9; otherwise it is scaled to unit
// Frobenius norm with a non-negative trace.
class Homography {
 public:
  Homography();
  // Throws kSingular when |det| <= 1e-12 after normalization.
  explicit Homography(const Eigen::Matrix3d& matrix);

  static Homography Identity() { return Homography(); }
  static Homography Translation(double tx, double ty);
  static Homography Scaling(double sx, double sy);

  const Eigen::Matrix3d& matrix() const { return matrix_; }
  double operator()(int r, int c) const { return matrix_(r, c); }

  // Throws kDegeneratePoint when the point maps to infinity.
  Point2 Apply(const Point2& p) const;
  Homography Inverse() const;

 private:
  Eigen::Matrix3d matrix_;
};

// a * b: applies `b` first, then `a`.
Homography Compose(const Homography& a, const Homography& b);

Eigen::Matrix3d NormalizeHomographyMatrix(const Eigen::Matrix3d& m);

// Nine whitespace-separated floats, row-major (HPatches H_1_x layout).
Homography ParseHomography(const std::string& text);
Homography ReadHomographyFile(const std::string& path);
std::string FormatHomography(const Homography& h);
void WriteHomographyFile(const std::string& path, const Homography& h);

struct Correspondence {
  Point2 p = Point2::Zero();  // source image, pixels
  Point2 q = Point2::Zero();  // target image, pixels
  double weight = 1.0;
};

}  // namespace semmatch

#endif  // SEMMATCH_HOMOGRAPHY_H_
