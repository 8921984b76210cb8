#ifndef SEMMATCH_TENSOR_H_
#define SEMMATCH_TENSOR_H_

#include <cstddef>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

#include "semmatch/error.h"

namespace semmatch {

// Dense row-major tensor. Shape may be empty (a scalar holding one value).
template <typename T>
class Tensor {
 public:
  using Scalar = T;

  Tensor() = default;
  explicit Tensor(std::vector<int> shape, T fill = T(0));
  Tensor(std::vector<int> shape, std::vector<T> data);

  static Tensor Scalar1(T value) { return Tensor({}, std::vector<T>{value}); }
  static Tensor Matrix(int rows, int cols,
                       std::initializer_list<std::initializer_list<T>> rows_init);

  const std::vector<int>& shape() const { return shape_; }
  int rank() const { return static_cast<int>(shape_.size()); }
  int dim(int axis) const;
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  // 2-D helpers; a rank-1 tensor is treated as a single row.
  int rows() const;
  int cols() const;

  T* data() { return data_.data(); }
  const T* data() const { return data_.data(); }
  std::span<T> values() { return data_; }
  std::span<const T> values() const { return data_; }

  T& operator[](std::size_t i) { return data_[i]; }
  const T& operator[](std::size_t i) const { return data_[i]; }
  T& at(int r, int c) { return data_[static_cast<std::size_t>(r) * cols() + c]; }
  const T& at(int r, int c) const {
    return data_[static_cast<std::size_t>(r) * cols() + c];
  }

  bool AllFinite() const;
  void Fill(T value);

  template <typename U>
  Tensor<U> Cast() const {
    std::vector<U> out(data_.begin(), data_.end());
    return Tensor<U>(shape_, std::move(out));
  }

  bool operator==(const Tensor& other) const = default;

 private:
  std::vector<int> shape_;
  std::vector<T> data_;
};

std::size_t ShapeProduct(const std::vector<int>& shape);
std::string ShapeToString(const std::vector<int>& shape);

using TensorF = Tensor<float>;
using TensorD = Tensor<double>;

extern template class Tensor<float>;
extern template class Tensor<double>;

}  // namespace semmatch

#endif  // SEMMATCH_TENSOR_H_
