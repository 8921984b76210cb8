#include "semmatch/autodiff.h"

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/Core>

namespace semmatch {
namespace {

template <typename T>
using MatR = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

template <typename T>
Eigen::Map<const MatR<T>> AsMat(const Tensor<T>& t) {
  return Eigen::Map<const MatR<T>>(t.data(), t.rows(), t.cols());
}

template <typename T>
Eigen::Map<MatR<T>> AsMat(Tensor<T>& t) {
  return Eigen::Map<MatR<T>>(t.data(), t.rows(), t.cols());
}

template <typename T>
void RequireRank2(const Tensor<T>& t, const char* op) {
  if (t.rank() != 2) {
    throw Error(ErrorCode::kDimension, std::string(op) + " expects a matrix, got " +
                                           ShapeToString(t.shape()));
  }
}

template <typename T>
void RequireSameShape(const Tensor<T>& a, const Tensor<T>& b, const char* op) {
  if (a.shape() != b.shape()) {
    throw Error(ErrorCode::kDimension, std::string(op) + ": " +
                                           ShapeToString(a.shape()) + " vs " +
                                           ShapeToString(b.shape()));
  }
}

template <typename T>
bool Needs(const Tape<T>& tape, int id) {
  return tape.requires_grad(id);
}

// Elementwise unary op with derivative expressed in terms of (x, y).
template <typename T, typename Fwd, typename Deriv>
Var<T> Unary(Var<T> a, Fwd fwd, Deriv deriv) {
  const Tensor<T>& x = a.value();
  Tensor<T> y(x.shape());
  for (std::size_t i = 0; i < x.size(); ++i) y[i] = fwd(x[i]);
  const int ia = a.id;
  return a.tape->Record(std::move(y), {ia}, [ia, deriv](Tape<T>& tape, int self) {
    const Tensor<T>& x = tape.value(ia);
    const Tensor<T>& y = tape.value(self);
    const Tensor<T>& gy = tape.OutputGrad(self);
    Tensor<T>& gx = tape.MutableGrad(ia);
    for (std::size_t i = 0; i < x.size(); ++i) gx[i] += gy[i] * deriv(x[i], y[i]);
  });
}

}  // namespace

// ---------------------------------------------------------------------------
// Tape

template <typename T>
Var<T> Tape<T>::Leaf(Tensor<T> value) {
  if (!value.AllFinite()) {
    throw Error(ErrorCode::kNonFinite, "leaf contains NaN/Inf");
  }
  Node node;
  node.value = std::move(value);
  node.requires_grad = true;
  nodes_.push_back(std::move(node));
  return Var<T>{this, static_cast<int>(nodes_.size()) - 1};
}

template <typename T>
Var<T> Tape<T>::Constant(Tensor<T> value) {
  if (!value.AllFinite()) {
    throw Error(ErrorCode::kNonFinite, "constant contains NaN/Inf");
  }
  Node node;
  node.value = std::move(value);
  nodes_.push_back(std::move(node));
  return Var<T>{this, static_cast<int>(nodes_.size()) - 1};
}

template <typename T>
Var<T> Tape<T>::Record(Tensor<T> value, std::vector<int> inputs,
                       BackwardFn backward) {
  if (!value.AllFinite()) {
    throw Error(ErrorCode::kNonFinite, "op produced NaN/Inf");
  }
  Node node;
  node.value = std::move(value);
  for (int in : inputs) {
    if (in < 0 || in >= num_nodes()) {
      throw Error(ErrorCode::kContract, "op input is not on this tape");
    }
    node.requires_grad = node.requires_grad || nodes_[in].requires_grad;
  }
  node.inputs = std::move(inputs);
  if (node.requires_grad) node.backward = std::move(backward);
  nodes_.push_back(std::move(node));
  return Var<T>{this, static_cast<int>(nodes_.size()) - 1};
}

template <typename T>
Tensor<T>& Tape<T>::MutableGrad(int id) {
  Node& node = nodes_[id];
  if (!node.has_grad) {
    node.grad = Tensor<T>(node.value.shape(), T(0));
    node.has_grad = true;
  }
  return node.grad;
}

template <typename T>
Tensor<T> Tape<T>::grad(int id) const {
  const Node& node = nodes_[id];
  if (node.has_grad) return node.grad;
  return Tensor<T>(node.value.shape(), T(0));
}

template <typename T>
void Tape<T>::Backward(Var<T> loss) {
  if (loss.tape != this) {
    throw Error(ErrorCode::kContract, "loss node belongs to another tape");
  }
  if (nodes_[loss.id].value.size() != 1) {
    throw Error(ErrorCode::kContract,
                "backward requires a scalar loss, got " +
                    ShapeToString(nodes_[loss.id].value.shape()));
  }
  for (Node& node : nodes_) {
    node.has_grad = false;
    node.grad = Tensor<T>();
  }
  MutableGrad(loss.id).Fill(T(1));
  for (int id = loss.id; id >= 0; --id) {
    Node& node = nodes_[id];
    if (!node.has_grad || !node.requires_grad || !node.backward) continue;
    // Inputs that do not require a gradient are skipped inside the op, so
    // MutableGrad is only ever called on trainable ancestors.
    node.backward(*this, id);
  }
}

// ---------------------------------------------------------------------------
// Primitive ops

template <typename T>
Var<T> MatMul(Var<T> a, Var<T> b) {
  const Tensor<T>& av = a.value();
  const Tensor<T>& bv = b.value();
  RequireRank2(av, "MatMul");
  RequireRank2(bv, "MatMul");
  if (av.cols() != bv.rows()) {
    throw Error(ErrorCode::kDimension, "MatMul inner dimensions " +
                                           ShapeToString(av.shape()) + " * " +
                                           ShapeToString(bv.shape()));
  }
  Tensor<T> y({av.rows(), bv.cols()});
  AsMat(y).noalias() = AsMat(av) * AsMat(bv);
  const int ia = a.id, ib = b.id;
  return a.tape->Record(std::move(y), {ia, ib}, [ia, ib](Tape<T>& tape, int self) {
    const auto gy = AsMat(tape.OutputGrad(self));
    if (Needs(tape, ia)) {
      AsMat(tape.MutableGrad(ia)).noalias() += gy * AsMat(tape.value(ib)).transpose();
    }
    if (Needs(tape, ib)) {
      AsMat(tape.MutableGrad(ib)).noalias() += AsMat(tape.value(ia)).transpose() * gy;
    }
  });
}

template <typename T>
Var<T> Transpose(Var<T> a) {
  const Tensor<T>& av = a.value();
  RequireRank2(av, "Transpose");
  Tensor<T> y({av.cols(), av.rows()});
  AsMat(y) = AsMat(av).transpose();
  const int ia = a.id;
  return a.tape->Record(std::move(y), {ia}, [ia](Tape<T>& tape, int self) {
    AsMat(tape.MutableGrad(ia)) += AsMat(tape.OutputGrad(self)).transpose();
  });
}

template <typename T>
Var<T> Add(Var<T> a, Var<T> b) {
  RequireSameShape(a.value(), b.value(), "Add");
  Tensor<T> y = a.value();
  const Tensor<T>& bv = b.value();
  for (std::size_t i = 0; i < y.size(); ++i) y[i] += bv[i];
  const int ia = a.id, ib = b.id;
  return a.tape->Record(std::move(y), {ia, ib}, [ia, ib](Tape<T>& tape, int self) {
    const Tensor<T>& gy = tape.OutputGrad(self);
    for (int in : {ia, ib}) {
      if (!Needs(tape, in)) continue;
      Tensor<T>& g = tape.MutableGrad(in);
      for (std::size_t i = 0; i < g.size(); ++i) g[i] += gy[i];
    }
  });
}

template <typename T>
Var<T> Sub(Var<T> a, Var<T> b) {
  RequireSameShape(a.value(), b.value(), "Sub");
  Tensor<T> y = a.value();
  const Tensor<T>& bv = b.value();
  for (std::size_t i = 0; i < y.size(); ++i) y[i] -= bv[i];
  const int ia = a.id, ib = b.id;
  return a.tape->Record(std::move(y), {ia, ib}, [ia, ib](Tape<T>& tape, int self) {
    const Tensor<T>& gy = tape.OutputGrad(self);
    if (Needs(tape, ia)) {
      Tensor<T>& g = tape.MutableGrad(ia);
      for (std::size_t i = 0; i < g.size(); ++i) g[i] += gy[i];
    }
    if (Needs(tape, ib)) {
      Tensor<T>& g = tape.MutableGrad(ib);
      for (std::size_t i = 0; i < g.size(); ++i) g[i] -= gy[i];
    }
  });
}

template <typename T>
Var<T> Mul(Var<T> a, Var<T> b) {
  RequireSameShape(a.value(), b.value(), "Mul");
  Tensor<T> y = a.value();
  const Tensor<T>& bv = b.value();
  for (std::size_t i = 0; i < y.size(); ++i) y[i] *= bv[i];
  const int ia = a.id, ib = b.id;
  return a.tape->Record(std::move(y), {ia, ib}, [ia, ib](Tape<T>& tape, int self) {
    const Tensor<T>& gy = tape.OutputGrad(self);
    const Tensor<T>& av = tape.value(ia);
    const Tensor<T>& bv = tape.value(ib);
    if (Needs(tape, ia)) {
      Tensor<T>& g = tape.MutableGrad(ia);
      for (std::size_t i = 0; i < g.size(); ++i) g[i] += gy[i] * bv[i];
    }
    if (Needs(tape, ib)) {
      Tensor<T>& g = tape.MutableGrad(ib);
      for (std::size_t i = 0; i < g.size(); ++i) g[i] += gy[i] * av[i];
    }
  });
}

template <typename T>
Var<T> Scale(Var<T> a, T factor) {
  Tensor<T> y = a.value();
  for (T& v : y.values()) v *= factor;
  const int ia = a.id;
  return a.tape->Record(std::move(y), {ia}, [ia, factor](Tape<T>& tape, int self) {
    const Tensor<T>& gy = tape.OutputGrad(self);
    Tensor<T>& g = tape.MutableGrad(ia);
    for (std::size_t i = 0; i < g.size(); ++i) g[i] += factor * gy[i];
  });
}

template <typename T>
Var<T> AddBias(Var<T> a, Var<T> bias) {
  const Tensor<T>& av = a.value();
  const Tensor<T>& bv = bias.value();
  RequireRank2(av, "AddBias");
  if (bv.size() != static_cast<std::size_t>(av.cols())) {
    throw Error(ErrorCode::kDimension, "AddBias: bias " + ShapeToString(bv.shape()) +
                                           " for input " + ShapeToString(av.shape()));
  }
  Tensor<T> y = av;
  const int n = av.rows(), c = av.cols();
  for (int r = 0; r < n; ++r) {
    for (int j = 0; j < c; ++j) y.at(r, j) += bv[j];
  }
  const int ia = a.id, ib = bias.id;
  return a.tape->Record(std::move(y), {ia, ib}, [ia, ib](Tape<T>& tape, int self) {
    const Tensor<T>& gy = tape.OutputGrad(self);
    if (Needs(tape, ia)) {
      Tensor<T>& g = tape.MutableGrad(ia);
      for (std::size_t i = 0; i < g.size(); ++i) g[i] += gy[i];
    }
    if (Needs(tape, ib)) {
      Tensor<T>& g = tape.MutableGrad(ib);
      const int c = static_cast<int>(g.size());
      const int n = static_cast<int>(gy.size()) / std::max(c, 1);
      for (int r = 0; r < n; ++r) {
        for (int j = 0; j < c; ++j) g[j] += gy[static_cast<std::size_t>(r) * c + j];
      }
    }
  });
}

template <typename T>
Var<T> AddConstant(Var<T> a, const Tensor<T>& c) {
  RequireSameShape(a.value(), c, "AddConstant");
  Tensor<T> y = a.value();
  for (std::size_t i = 0; i < y.size(); ++i) y[i] += c[i];
  const int ia = a.id;
  return a.tape->Record(std::move(y), {ia}, [ia](Tape<T>& tape, int self) {
    const Tensor<T>& gy = tape.OutputGrad(self);
    Tensor<T>& g = tape.MutableGrad(ia);
    for (std::size_t i = 0; i < g.size(); ++i) g[i] += gy[i];
  });
}

template <typename T>
Var<T> Relu(Var<T> a) {
  return Unary(
      a, [](T x) { return x > T(0) ? x : T(0); },
      [](T x, T) { return x > T(0) ? T(1) : T(0); });
}

template <typename T>
Var<T> EluPlusOne(Var<T> a) {
  return Unary(
      a, [](T x) { return x > T(0) ? x + T(1) : std::exp(x); },
      [](T x, T y) { return x > T(0) ? T(1) : y; });
}

template <typename T>
Var<T> Log(Var<T> a) {
  for (T v : a.value().values()) {
    if (!(v > T(0))) throw Error(ErrorCode::kNonFinite, "Log of non-positive value");
  }
  return Unary(a, [](T x) { return std::log(x); }, [](T x, T) { return T(1) / x; });
}

template <typename T>
Var<T> Clamp(Var<T> a, T lo, T hi) {
  return Unary(
      a, [lo, hi](T x) { return std::clamp(x, lo, hi); },
      [lo, hi](T x, T) { return (x >= lo && x <= hi) ? T(1) : T(0); });
}

template <typename T>
Var<T> Softmax(Var<T> a, int axis) {
  const Tensor<T>& x = a.value();
  if (axis < 0) axis += x.rank();
  if (axis < 0 || axis >= x.rank()) {
    throw Error(ErrorCode::kDimension, "Softmax axis out of range for " +
                                           ShapeToString(x.shape()));
  }
  std::size_t outer = 1, inner = 1;
  for (int d = 0; d < axis; ++d) outer *= x.shape()[d];
  for (int d = axis + 1; d < x.rank(); ++d) inner *= x.shape()[d];
  const std::size_t n = x.shape()[axis];
  Tensor<T> y(x.shape());
  for (std::size_t o = 0; o < outer; ++o) {
    for (std::size_t in = 0; in < inner; ++in) {
      const std::size_t base = o * n * inner + in;
      T max_v = -std::numeric_limits<T>::infinity();
      for (std::size_t k = 0; k < n; ++k) max_v = std::max(max_v, x[base + k * inner]);
      T sum = 0;
      for (std::size_t k = 0; k < n; ++k) {
        const T e = std::exp(x[base + k * inner] - max_v);
        y[base + k * inner] = e;
        sum += e;
      }
      for (std::size_t k = 0; k < n; ++k) y[base + k * inner] /= sum;
    }
  }
  const int ia = a.id;
  return a.tape->Record(
      std::move(y), {ia}, [ia, outer, inner, n](Tape<T>& tape, int self) {
        const Tensor<T>& y = tape.value(self);
        const Tensor<T>& gy = tape.OutputGrad(self);
        Tensor<T>& gx = tape.MutableGrad(ia);
        for (std::size_t o = 0; o < outer; ++o) {
          for (std::size_t in = 0; in < inner; ++in) {
            const std::size_t base = o * n * inner + in;
            T dot = 0;
            for (std::size_t k = 0; k < n; ++k) {
              dot += gy[base + k * inner] * y[base + k * inner];
            }
            for (std::size_t k = 0; k < n; ++k) {
              const std::size_t i = base + k * inner;
              gx[i] += y[i] * (gy[i] - dot);
            }
          }
        }
      });
}

template <typename T>
Var<T> ConcatChannels(Var<T> a, Var<T> b) {
  const Tensor<T>& av = a.value();
  const Tensor<T>& bv = b.value();
  RequireRank2(av, "ConcatChannels");
  RequireRank2(bv, "ConcatChannels");
  if (av.rows() != bv.rows()) {
    throw Error(ErrorCode::kDimension, "ConcatChannels leading dims " +
                                           ShapeToString(av.shape()) + " vs " +
                                           ShapeToString(bv.shape()));
  }
  const int n = av.rows(), ca = av.cols(), cb = bv.cols();
  Tensor<T> y({n, ca + cb});
  for (int r = 0; r < n; ++r) {
    std::copy_n(av.data() + static_cast<std::size_t>(r) * ca, ca,
                y.data() + static_cast<std::size_t>(r) * (ca + cb));
    std::copy_n(bv.data() + static_cast<std::size_t>(r) * cb, cb,
                y.data() + static_cast<std::size_t>(r) * (ca + cb) + ca);
  }
  const int ia = a.id, ib = b.id;
  return a.tape->Record(
      std::move(y), {ia, ib}, [ia, ib, n, ca, cb](Tape<T>& tape, int self) {
        const Tensor<T>& gy = tape.OutputGrad(self);
        const std::size_t stride = ca + cb;
        if (Needs(tape, ia) && ca > 0) {
          Tensor<T>& g = tape.MutableGrad(ia);
          for (int r = 0; r < n; ++r) {
            for (int j = 0; j < ca; ++j) g[static_cast<std::size_t>(r) * ca + j] += gy[r * stride + j];
          }
        }
        if (Needs(tape, ib) && cb > 0) {
          Tensor<T>& g = tape.MutableGrad(ib);
          for (int r = 0; r < n; ++r) {
            for (int j = 0; j < cb; ++j) g[static_cast<std::size_t>(r) * cb + j] += gy[r * stride + ca + j];
          }
        }
      });
}

template <typename T>
Var<T> SumAll(Var<T> a) {
  T sum = 0;
  for (T v : a.value().values()) sum += v;
  const int ia = a.id;
  return a.tape->Record(Tensor<T>::Scalar1(sum), {ia}, [ia](Tape<T>& tape, int self) {
    const T gy = tape.OutputGrad(self)[0];
    for (T& g : tape.MutableGrad(ia).values()) g += gy;
  });
}

template <typename T>
Var<T> MeanAll(Var<T> a) {
  const std::size_t n = a.value().size();
  if (n == 0) throw Error(ErrorCode::kDimension, "MeanAll of empty tensor");
  return Scale(SumAll(a), T(1) / static_cast<T>(n));
}

template <typename T>
Var<T> SumRows(Var<T> a) {
  const Tensor<T>& av = a.value();
  RequireRank2(av, "SumRows");
  Tensor<T> y({1, av.cols()});
  AsMat(y) = AsMat(av).colwise().sum();
  const int ia = a.id;
  return a.tape->Record(std::move(y), {ia}, [ia](Tape<T>& tape, int self) {
    auto g = AsMat(tape.MutableGrad(ia));
    g.rowwise() += AsMat(tape.OutputGrad(self)).row(0);
  });
}

template <typename T>
Var<T> DivRows(Var<T> a, Var<T> d) {
  const Tensor<T>& av = a.value();
  const Tensor<T>& dv = d.value();
  RequireRank2(av, "DivRows");
  if (dv.size() != static_cast<std::size_t>(av.rows())) {
    throw Error(ErrorCode::kDimension, "DivRows: divisor " + ShapeToString(dv.shape()) +
                                           " for " + ShapeToString(av.shape()));
  }
  Tensor<T> y = av;
  const int n = av.rows(), c = av.cols();
  for (int r = 0; r < n; ++r) {
    for (int j = 0; j < c; ++j) y.at(r, j) /= dv[r];
  }
  const int ia = a.id, id = d.id;
  return a.tape->Record(std::move(y), {ia, id}, [ia, id, n, c](Tape<T>& tape, int self) {
    const Tensor<T>& gy = tape.OutputGrad(self);
    const Tensor<T>& y = tape.value(self);
    const Tensor<T>& dv = tape.value(id);
    if (Needs(tape, ia)) {
      Tensor<T>& g = tape.MutableGrad(ia);
      for (int r = 0; r < n; ++r) {
        for (int j = 0; j < c; ++j) g.at(r, j) += gy.at(r, j) / dv[r];
      }
    }
    if (Needs(tape, id)) {
      Tensor<T>& g = tape.MutableGrad(id);
      for (int r = 0; r < n; ++r) {
        T acc = 0;
        for (int j = 0; j < c; ++j) acc += gy.at(r, j) * y.at(r, j);
        g[r] -= acc / dv[r];
      }
    }
  });
}

template <typename T>
Var<T> L2NormalizeRows(Var<T> a) {
  const Tensor<T>& av = a.value();
  RequireRank2(av, "L2NormalizeRows");
  const int n = av.rows(), c = av.cols();
  Tensor<T> y = av;
  std::vector<T> inv_norm(n, T(0));
  for (int r = 0; r < n; ++r) {
    T sq = 0;
    for (int j = 0; j < c; ++j) sq += av.at(r, j) * av.at(r, j);
    const T norm = std::sqrt(sq);
    inv_norm[r] = norm > T(1e-12) ? T(1) / norm : T(0);
    for (int j = 0; j < c; ++j) y.at(r, j) *= inv_norm[r];
  }
  const int ia = a.id;
  return a.tape->Record(
      std::move(y), {ia}, [ia, n, c, inv_norm = std::move(inv_norm)](Tape<T>& tape, int self) {
        const Tensor<T>& y = tape.value(self);
        const Tensor<T>& gy = tape.OutputGrad(self);
        Tensor<T>& g = tape.MutableGrad(ia);
        for (int r = 0; r < n; ++r) {
          if (inv_norm[r] == T(0)) continue;
          T dot = 0;
          for (int j = 0; j < c; ++j) dot += y.at(r, j) * gy.at(r, j);
          for (int j = 0; j < c; ++j) g.at(r, j) += (gy.at(r, j) - y.at(r, j) * dot) * inv_norm[r];
        }
      });
}

template <typename T>
Var<T> GatherRows(Var<T> a, std::vector<int> rows) {
  const Tensor<T>& av = a.value();
  RequireRank2(av, "GatherRows");
  const int c = av.cols();
  Tensor<T> y({static_cast<int>(rows.size()), c});
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (rows[r] < -1 || rows[r] >= av.rows()) {
      throw Error(ErrorCode::kDimension, "GatherRows index out of range");
    }
    if (rows[r] >= 0) {
      std::copy_n(av.data() + static_cast<std::size_t>(rows[r]) * c, c,
                  y.data() + r * c);
    }
  }
  const int ia = a.id;
  return a.tape->Record(
      std::move(y), {ia}, [ia, rows = std::move(rows), c](Tape<T>& tape, int self) {
        const Tensor<T>& gy = tape.OutputGrad(self);
        Tensor<T>& g = tape.MutableGrad(ia);
        for (std::size_t r = 0; r < rows.size(); ++r) {
          if (rows[r] < 0) continue;
          T* dst = g.data() + static_cast<std::size_t>(rows[r]) * c;
          const T* src = gy.data() + r * c;
          for (int j = 0; j < c; ++j) dst[j] += src[j];
        }
      });
}

template <typename T>
Var<T> GatherElements(Var<T> a, std::vector<std::pair<int, int>> entries) {
  const Tensor<T>& av = a.value();
  RequireRank2(av, "GatherElements");
  Tensor<T> y({static_cast<int>(entries.size())});
  for (std::size_t k = 0; k < entries.size(); ++k) {
    const auto [r, c] = entries[k];
    if (r < 0 || r >= av.rows() || c < 0 || c >= av.cols()) {
      throw Error(ErrorCode::kDimension, "GatherElements index out of range");
    }
    y[k] = av.at(r, c);
  }
  const int ia = a.id;
  return a.tape->Record(
      std::move(y), {ia}, [ia, entries = std::move(entries)](Tape<T>& tape, int self) {
        const Tensor<T>& gy = tape.OutputGrad(self);
        Tensor<T>& g = tape.MutableGrad(ia);
        for (std::size_t k = 0; k < entries.size(); ++k) {
          g.at(entries[k].first, entries[k].second) += gy[k];
        }
      });
}

template <typename T>
Var<T> Im2Col(Var<T> x, int height, int width, int kernel, int stride, int pad) {
  const Tensor<T>& xv = x.value();
  RequireRank2(xv, "Im2Col");
  if (xv.rows() != height * width || kernel <= 0 || stride <= 0 || pad < 0) {
    throw Error(ErrorCode::kDimension, "Im2Col geometry does not match input " +
                                           ShapeToString(xv.shape()));
  }
  const int c = xv.cols();
  const int out_h = (height + 2 * pad - kernel) / stride + 1;
  const int out_w = (width + 2 * pad - kernel) / stride + 1;
  const int patch = kernel * kernel * c;
  // For every output element, the source offset or -1 for padding.
  std::vector<int> source(static_cast<std::size_t>(out_h) * out_w * patch, -1);
  for (int oy = 0; oy < out_h; ++oy) {
    for (int ox = 0; ox < out_w; ++ox) {
      int* dst = source.data() + (static_cast<std::size_t>(oy) * out_w + ox) * patch;
      for (int ky = 0; ky < kernel; ++ky) {
        const int iy = oy * stride - pad + ky;
        for (int kx = 0; kx < kernel; ++kx) {
          const int ix = ox * stride - pad + kx;
          if (iy < 0 || iy >= height || ix < 0 || ix >= width) continue;
          const int cell = iy * width + ix;
          for (int ch = 0; ch < c; ++ch) {
            dst[(ky * kernel + kx) * c + ch] = cell * c + ch;
          }
        }
      }
    }
  }
  Tensor<T> y({out_h * out_w, patch});
  for (std::size_t i = 0; i < source.size(); ++i) {
    if (source[i] >= 0) y[i] = xv[source[i]];
  }
  const int ix = x.id;
  return x.tape->Record(
      std::move(y), {ix}, [ix, source = std::move(source)](Tape<T>& tape, int self) {
        const Tensor<T>& gy = tape.OutputGrad(self);
        Tensor<T>& g = tape.MutableGrad(ix);
        for (std::size_t i = 0; i < source.size(); ++i) {
          if (source[i] >= 0) g[source[i]] += gy[i];
        }
      });
}

// ---------------------------------------------------------------------------
// Composite ops

template <typename T>
Var<T> Linear(Var<T> x, Var<T> weight, Var<T> bias) {
  return AddBias(MatMul(x, weight), bias);
}

template <typename T>
Var<T> ScaledDotAttention(Var<T> q, Var<T> k, Var<T> v) {
  if (q.cols() != k.cols()) {
    throw Error(ErrorCode::kDimension, "attention: query/key channels differ");
  }
  if (k.rows() != v.rows()) {
    throw Error(ErrorCode::kDimension, "attention: key/value rows differ");
  }
  const T scale = T(1) / std::sqrt(static_cast<T>(q.cols()));
  Var<T> scores = Scale(MatMul(q, Transpose(k)), scale);
  return MatMul(Softmax(scores, 1), v);
}

template <typename T>
Var<T> LinearAttention(Var<T> q, Var<T> k, Var<T> v) {
  if (q.cols() != k.cols()) {
    throw Error(ErrorCode::kDimension, "linear attention: query/key channels differ");
  }
  if (k.rows() != v.rows()) {
    throw Error(ErrorCode::kDimension, "linear attention: key/value rows differ");
  }
  Var<T> pq = EluPlusOne(q);
  Var<T> pk = EluPlusOne(k);
  Var<T> kv = MatMul(Transpose(pk), v);                 // [C x Cv]
  Var<T> numerator = MatMul(pq, kv);                    // [Nq x Cv]
  Var<T> denominator = MatMul(pq, Transpose(SumRows(pk)));  // [Nq x 1]
  return DivRows(numerator, denominator);
}

template <typename T>
Var<T> DualSoftmax(Var<T> scores) {
  return Mul(Softmax(scores, 1), Softmax(scores, 0));
}

// ---------------------------------------------------------------------------

#define SEMMATCH_INSTANTIATE_AUTODIFF(T)                                      \
  template class Tape<T>;                                                     \
  template Var<T> MatMul(Var<T>, Var<T>);                                     \
  template Var<T> Transpose(Var<T>);                                          \
  template Var<T> Add(Var<T>, Var<T>);                                        \
  template Var<T> Sub(Var<T>, Var<T>);                                        \
  template Var<T> Mul(Var<T>, Var<T>);                                        \
  template Var<T> Scale(Var<T>, T);                                           \
  template Var<T> AddBias(Var<T>, Var<T>);                                    \
  template Var<T> AddConstant(Var<T>, const Tensor<T>&);                      \
  template Var<T> Relu(Var<T>);                                               \
  template Var<T> EluPlusOne(Var<T>);                                         \
  template Var<T> Log(Var<T>);                                                \
  template Var<T> Clamp(Var<T>, T, T);                                        \
  template Var<T> Softmax(Var<T>, int);                                       \
  template Var<T> ConcatChannels(Var<T>, Var<T>);                             \
  template Var<T> SumAll(Var<T>);                                             \
  template Var<T> MeanAll(Var<T>);                                            \
  template Var<T> SumRows(Var<T>);                                            \
  template Var<T> DivRows(Var<T>, Var<T>);                                    \
  template Var<T> L2NormalizeRows(Var<T>);                                     \
  template Var<T> GatherRows(Var<T>, std::vector<int>);                       \
  template Var<T> GatherElements(Var<T>, std::vector<std::pair<int, int>>);   \
  template Var<T> Im2Col(Var<T>, int, int, int, int, int);                    \
  template Var<T> Linear(Var<T>, Var<T>, Var<T>);                             \
  template Var<T> ScaledDotAttention(Var<T>, Var<T>, Var<T>);                 \
  template Var<T> LinearAttention(Var<T>, Var<T>, Var<T>);                    \
  template Var<T> DualSoftmax(Var<T>);

SEMMATCH_INSTANTIATE_AUTODIFF(float)
SEMMATCH_INSTANTIATE_AUTODIFF(double)

#undef SEMMATCH_INSTANTIATE_AUTODIFF

}  // namespace semmatch
