#ifndef SEMMATCH_AUTODIFF_H_
#define SEMMATCH_AUTODIFF_H_

#include <deque>
#include <functional>
#include <utility>
#include <vector>

#include "semmatch/tensor.h"

namespace semmatch {

template <typename T>
class Tape;

// Handle to a node recorded on a Tape. Cheap to copy; only valid while the
// owning tape is alive.
template <typename T>
struct Var {
  Tape<T>* tape = nullptr;
  int id = -1;

  const Tensor<T>& value() const;
  const std::vector<int>& shape() const { return value().shape(); }
  int rows() const { return value().rows(); }
  int cols() const { return value().cols(); }
};

// Reverse-mode tape. Nodes are appended in execution order, so every node's
// inputs precede it and a single reverse sweep visits each node once.
//
// A tape has a single writer. Independent tapes may be used concurrently.
template <typename T>
class Tape {
 public:
  // Accumulates the gradient of this node into the gradients of its inputs.
  using BackwardFn = std::function<void(Tape& tape, int node)>;

  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  // A leaf that receives a gradient.
  Var<T> Leaf(Tensor<T> value);
  // A leaf that never receives a gradient.
  Var<T> Constant(Tensor<T> value);
  Var<T> Record(Tensor<T> value, std::vector<int> inputs, BackwardFn backward);

  // Runs the reverse sweep from a scalar node. Gradients from a previous
  // sweep are cleared first.
  void Backward(Var<T> loss);

  const Tensor<T>& value(int id) const { return nodes_[id].value; }
  // Gradient of the last Backward() w.r.t. node `id`; zeros if the node does
  // not depend on anything trainable.
  Tensor<T> grad(int id) const;
  Tensor<T> grad(Var<T> v) const { return grad(v.id); }
  bool requires_grad(int id) const { return nodes_[id].requires_grad; }
  const std::vector<int>& inputs(int id) const { return nodes_[id].inputs; }
  int num_nodes() const { return static_cast<int>(nodes_.size()); }

  // Used by backward functions. Allocates a zero buffer on first access.
  Tensor<T>& MutableGrad(int id);
  const Tensor<T>& OutputGrad(int id) const { return nodes_[id].grad; }

 private:
  struct Node {
    Tensor<T> value;
    Tensor<T> grad;
    bool requires_grad = false;
    bool has_grad = false;
    std::vector<int> inputs;
    BackwardFn backward;
  };

  // A deque keeps value() references valid while the tape grows.
  std::deque<Node> nodes_;
};

template <typename T>
const Tensor<T>& Var<T>::value() const {
  return tape->value(id);
}

// ---------------------------------------------------------------------------
// Primitive ops. All operate on rank-2 tensors unless stated otherwise; a
// rank-1 tensor of length C is accepted wherever a bias row is expected.

template <typename T> Var<T> MatMul(Var<T> a, Var<T> b);
template <typename T> Var<T> Transpose(Var<T> a);
template <typename T> Var<T> Add(Var<T> a, Var<T> b);
template <typename T> Var<T> Sub(Var<T> a, Var<T> b);
template <typename T> Var<T> Mul(Var<T> a, Var<T> b);
template <typename T> Var<T> Scale(Var<T> a, T factor);
// a[N x C] + bias[C] broadcast over rows.
template <typename T> Var<T> AddBias(Var<T> a, Var<T> bias);
// a + c where c carries no gradient (masks, positional encodings).
template <typename T> Var<T> AddConstant(Var<T> a, const Tensor<T>& c);
template <typename T> Var<T> Relu(Var<T> a);
// elu(x) + 1, the positive feature map of linear attention.
template <typename T> Var<T> EluPlusOne(Var<T> a);
template <typename T> Var<T> Log(Var<T> a);
template <typename T> Var<T> Clamp(Var<T> a, T lo, T hi);
// Max-subtracted softmax along `axis` of a tensor of any rank.
template <typename T> Var<T> Softmax(Var<T> a, int axis);
template <typename T> Var<T> ConcatChannels(Var<T> a, Var<T> b);
template <typename T> Var<T> SumAll(Var<T> a);
template <typename T> Var<T> MeanAll(Var<T> a);
// Column sums: [N x C] -> [1 x C].
template <typename T> Var<T> SumRows(Var<T> a);
// Row-wise division: a[N x C] / d[N x 1].
template <typename T> Var<T> DivRows(Var<T> a, Var<T> d);
// Scales each row to unit L2 norm; rows with norm below 1e-12 become zero.
template <typename T> Var<T> L2NormalizeRows(Var<T> a);
// Selects rows; index -1 yields a zero row.
template <typename T> Var<T> GatherRows(Var<T> a, std::vector<int> rows);
// Selects entries (r, c) of a matrix into a length-K vector.
template <typename T>
Var<T> GatherElements(Var<T> a, std::vector<std::pair<int, int>> entries);
// Patch extraction for convolution. `x` holds a height x width grid of
// C-channel cells as [height*width x C]; output row (oy*out_w + ox) holds the
// zero-padded kernel x kernel neighbourhood in (ky, kx, c) order.
template <typename T>
Var<T> Im2Col(Var<T> x, int height, int width, int kernel, int stride,
              int pad);

// ---------------------------------------------------------------------------
// Composite ops.

// x[N x Cin] * weight[Cin x Cout] + bias[Cout].
template <typename T> Var<T> Linear(Var<T> x, Var<T> weight, Var<T> bias);
// softmax(q k^T / sqrt(C)) v.
template <typename T>
Var<T> ScaledDotAttention(Var<T> q, Var<T> k, Var<T> v);
// Kernelized attention with feature map elu(x) + 1:
//   out_i = phi(q_i) (phi(K)^T V) / (phi(q_i) . sum_j phi(k_j)).
template <typename T> Var<T> LinearAttention(Var<T> q, Var<T> k, Var<T> v);
// softmax over each row times softmax over each column.
template <typename T> Var<T> DualSoftmax(Var<T> scores);

}  // namespace semmatch

#endif  // SEMMATCH_AUTODIFF_H_
