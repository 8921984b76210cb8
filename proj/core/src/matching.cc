#include "semmatch/matching.h"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

#include "semmatch/error.h"

namespace semmatch {
namespace {

constexpr float kNegInf = -std::numeric_limits<float>::infinity();

}  // namespace

TensorF SimilarityMatrix(const FeatureMap& a, const FeatureMap& b, double temperature) {
  if (a.channels != b.channels) {
    throw Error(ErrorCode::kDimension, "similarity: channel mismatch");
  }
  const int n0 = a.num_cells(), n1 = b.num_cells(), c = a.channels;
  const float inv_t = static_cast<float>(1.0 / temperature);
  TensorF s({n0, n1});
  for (int i = 0; i < n0; ++i) {
    const bool valid_i = a.valid.empty() || a.valid[i];
    const float* ai = a.cell(i);
    for (int j = 0; j < n1; ++j) {
      if (!valid_i || !(b.valid.empty() || b.valid[j])) {
        s.at(i, j) = kNegInf;
        continue;
      }
      const float* bj = b.cell(j);
      float dot = 0.0f;
      for (int k = 0; k < c; ++k) dot += ai[k] * bj[k];
      s.at(i, j) = dot * inv_t;
    }
  }
  return s;
}

ConfidenceMatrix DualSoftmax(const TensorF& scores) {
  const int n0 = scores.rows(), n1 = scores.cols();
  TensorF row(scores.shape(), 0.0f), col(scores.shape(), 0.0f);
  for (int i = 0; i < n0; ++i) {
    float m = kNegInf;
    for (int j = 0; j < n1; ++j) m = std::max(m, scores.at(i, j));
    if (m == kNegInf) continue;
    double sum = 0.0;
    for (int j = 0; j < n1; ++j) sum += std::exp(static_cast<double>(scores.at(i, j)) - m);
    for (int j = 0; j < n1; ++j) {
      row.at(i, j) = static_cast<float>(std::exp(static_cast<double>(scores.at(i, j)) - m) / sum);
    }
  }
  for (int j = 0; j < n1; ++j) {
    float m = kNegInf;
    for (int i = 0; i < n0; ++i) m = std::max(m, scores.at(i, j));
    if (m == kNegInf) continue;
    double sum = 0.0;
    for (int i = 0; i < n0; ++i) sum += std::exp(static_cast<double>(scores.at(i, j)) - m);
    for (int i = 0; i < n0; ++i) {
      col.at(i, j) = static_cast<float>(std::exp(static_cast<double>(scores.at(i, j)) - m) / sum);
    }
  }
  TensorF p(scores.shape());
  for (std::size_t k = 0; k < p.size(); ++k) p[k] = row[k] * col[k];
  return p;
}

int RowArgmax(const ConfidenceMatrix& p, int r) {
  int best = 0;
  for (int j = 1; j < p.cols(); ++j) {
    if (p.at(r, j) > p.at(r, best)) best = j;
  }
  return best;
}

int ColArgmax(const ConfidenceMatrix& p, int c) {
  int best = 0;
  for (int i = 1; i < p.rows(); ++i) {
    if (p.at(i, c) > p.at(best, c)) best = i;
  }
  return best;
}

std::vector<CoarseMatch> MnnSelect(const ConfidenceMatrix& p, double threshold) {
  std::vector<CoarseMatch> out;
  if (p.rows() == 0 || p.cols() == 0) return out;
  std::vector<int> col_best(p.cols());
  for (int j = 0; j < p.cols(); ++j) col_best[j] = ColArgmax(p, j);
  for (int i = 0; i < p.rows(); ++i) {
    const int j = RowArgmax(p, i);
    // Zero confidence means masked or underflowed; never a match.
    if (col_best[j] == i && p.at(i, j) >= threshold && p.at(i, j) > 0.0f) {
      out.push_back({i, j, p.at(i, j)});
    }
  }
  return out;
}

Point2 FeatureWindow::PixelOf(int i) const {
  const int u = i % size, v = i / size;
  return Point2((origin_x + u) / scale, (origin_y + v) / scale);
}

FeatureWindow CropWindow(const FeatureMap& fine, int center_x, int center_y, int window) {
  if (window <= 0 || window % 2 == 0) {
    throw Error(ErrorCode::kContract, "window size must be odd, got " + std::to_string(window));
  }
  FeatureWindow w;
  w.size = window;
  w.channels = fine.channels;
  w.scale = fine.scale;
  w.origin_x = center_x - window / 2;
  w.origin_y = center_y - window / 2;
  w.values.assign(static_cast<std::size_t>(window) * window * fine.channels, 0.0f);
  w.valid.assign(static_cast<std::size_t>(window) * window, 0);
  for (int v = 0; v < window; ++v) {
    const int y = w.origin_y + v;
    if (y < 0 || y >= fine.height) continue;
    for (int u = 0; u < window; ++u) {
      const int x = w.origin_x + u;
      if (x < 0 || x >= fine.width) continue;
      const int src = y * fine.width + x;
      if (!fine.valid.empty() && !fine.valid[src]) continue;
      const int dst = v * window + u;
      std::copy_n(fine.cell(src), fine.channels,
                  w.values.data() + static_cast<std::size_t>(dst) * fine.channels);
      w.valid[dst] = 1;
    }
  }
  return w;
}

FeatureWindow CropWindowAtCoarse(const FeatureMap& fine, int coarse_width, int coarse_index,
                                 int window) {
  const int cx = coarse_index % coarse_width, cy = coarse_index / coarse_width;
  return CropWindow(fine, 4 * cx, 4 * cy, window);
}

ConfidenceMatrix WindowConfidence(const FeatureWindow& w0, const FeatureWindow& w1,
                                  double temperature) {
  if (w0.size != w1.size || w0.channels != w1.channels) {
    throw Error(ErrorCode::kDimension, "fine windows differ in size");
  }
  const int n = w0.num_cells(), c = w0.channels;
  const float inv_t = static_cast<float>(1.0 / temperature);
  TensorF s({n, n});
  for (int a = 0; a < n; ++a) {
    for (int b = 0; b < n; ++b) {
      if (!w0.valid[a] || !w1.valid[b]) {
        s.at(a, b) = kNegInf;
        continue;
      }
      float dot = 0.0f;
      for (int k = 0; k < c; ++k) dot += w0.cell(a)[k] * w1.cell(b)[k];
      s.at(a, b) = dot * inv_t;
    }
  }
  return DualSoftmax(s);
}

std::vector<FineMatch> FineMatchOverlap(const FeatureWindow& w0, const FeatureWindow& w1,
                                        const ConfidenceMatrix& p, double threshold) {
  std::vector<FineMatch> out;
  for (const CoarseMatch& m : MnnSelect(p, threshold)) {
    if (!w0.valid[m.index0] || !w1.valid[m.index1]) continue;
    FineMatch f;
    f.p0 = w0.PixelOf(m.index0);
    f.p1 = w1.PixelOf(m.index1);
    f.confidence = m.confidence;
    f.cell0 = m.index0;
    f.cell1 = m.index1;
    out.push_back(f);
  }
  return out;
}

std::vector<FineMatch> FineMatchOverlap(const FeatureWindow& w0, const FeatureWindow& w1,
                                        double temperature, double threshold) {
  return FineMatchOverlap(w0, w1, WindowConfidence(w0, w1, temperature), threshold);
}

std::optional<FineMatch> FineMatchCenter(const FeatureWindow& w0, const FeatureWindow& w1,
                                         const ConfidenceMatrix& p) {
  const int center = w0.num_cells() / 2;
  if (!w0.valid[center]) return std::nullopt;
  int best = -1;
  for (int b = 0; b < w1.num_cells(); ++b) {
    if (!w1.valid[b]) continue;
    if (best < 0 || p.at(center, b) > p.at(center, best)) best = b;
  }
  if (best < 0) return std::nullopt;
  FineMatch f;
  f.p0 = w0.PixelOf(center);
  f.p1 = w1.PixelOf(best);
  f.confidence = p.at(center, best);
  f.cell0 = center;
  f.cell1 = best;
  return f;
}

std::string FormatMatches(const std::vector<FineMatch>& matches) {
  std::string out;
  char line[160];
  for (const FineMatch& m : matches) {
    std::snprintf(line, sizeof(line), "%.6f %.6f %.6f %.6f %.6f\n", m.p0.x(), m.p0.y(),
                  m.p1.x(), m.p1.y(), static_cast<double>(m.confidence));
    out += line;
  }
  return out;
}

void WriteMatchesFile(const std::string& path, const std::vector<FineMatch>& matches) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIo, "cannot write '" + path + "'");
  out << FormatMatches(matches);
}

std::vector<FineMatch> ParseMatches(const std::string& text) {
  std::vector<FineMatch> out;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream fields(line);
    FineMatch m;
    double x0, y0, x1, y1, conf;
    if (!(fields >> x0 >> y0 >> x1 >> y1 >> conf)) {
      throw Error(ErrorCode::kFormat, "bad match line '" + line + "'");
    }
    m.p0 = Point2(x0, y0);
    m.p1 = Point2(x1, y1);
    m.confidence = static_cast<float>(conf);
    out.push_back(m);
  }
  return out;
}

}  // namespace semmatch
