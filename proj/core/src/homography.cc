#include "semmatch/homography.h"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <Eigen/LU>

#include "semmatch/error.h"

namespace semmatch {

Eigen::Matrix3d NormalizeHomographyMatrix(const Eigen::Matrix3d& m) {
  if (!m.allFinite()) throw Error(ErrorCode::kSingular, "homography has non-finite entries");
  if (std::abs(m(2, 2)) > 1e-9) return m / m(2, 2);
  const double norm = m.norm();
  if (norm == 0.0) throw Error(ErrorCode::kSingular, "zero homography");
  Eigen::Matrix3d out = m / norm;
  if (out.trace() < 0.0) out = -out;
  return out;
}

Homography::Homography() : matrix_(Eigen::Matrix3d::Identity()) {}

Homography::Homography(const Eigen::Matrix3d& matrix)
    : matrix_(NormalizeHomographyMatrix(matrix)) {
  if (std::abs(matrix_.determinant()) <= 1e-12) {
    throw Error(ErrorCode::kSingular, "homography is not invertible");
  }
}

Homography Homography::Translation(double tx, double ty) {
  Eigen::Matrix3d m = Eigen::Matrix3d::Identity();
  m(0, 2) = tx;
  m(1, 2) = ty;
  return Homography(m);
}

Homography Homography::Scaling(double sx, double sy) {
  Eigen::Matrix3d m = Eigen::Matrix3d::Identity();
  m(0, 0) = sx;
  m(1, 1) = sy;
  return Homography(m);
}

Point2 Homography::Apply(const Point2& p) const {
  const Eigen::Vector3d x = matrix_ * p.homogeneous();
  if (std::abs(x.z()) <= 1e-12) {
    throw Error(ErrorCode::kDegeneratePoint, "point maps to infinity");
  }
  return x.hnormalized();
}

Homography Homography::Inverse() const { return Homography(matrix_.inverse()); }

Homography Compose(const Homography& a, const Homography& b) {
  return Homography(a.matrix() * b.matrix());
}

Homography ParseHomography(const std::string& text) {
  std::istringstream in(text);
  Eigen::Matrix3d m;
  for (int i = 0; i < 9; ++i) {
    if (!(in >> m(i / 3, i % 3))) {
      throw Error(ErrorCode::kFormat, "homography text needs 9 numbers");
    }
  }
  std::string extra;
  if (in >> extra) throw Error(ErrorCode::kFormat, "trailing data after homography");
  return Homography(m);
}

Homography ReadHomographyFile(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot open '" + path + "'");
  std::stringstream buffer;
  buffer << in.rdbuf();
  return ParseHomography(buffer.str());
}

std::string FormatHomography(const Homography& h) {
  std::string out;
  char buf[64];
  for (int r = 0; r < 3; ++r) {
    for (int c = 0; c < 3; ++c) {
      std::snprintf(buf, sizeof(buf), "%.17g", h(r, c));
      out += buf;
      out += (c == 2) ? "\n" : " ";
    }
  }
  return out;
}

void WriteHomographyFile(const std::string& path, const Homography& h) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIo, "cannot write '" + path + "'");
  out << FormatHomography(h);
}

}  // namespace semmatch
