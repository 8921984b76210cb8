#include "semmatch/tensor.h"

#include <cmath>
#include <sstream>

namespace semmatch {

std::size_t ShapeProduct(const std::vector<int>& shape) {
  std::size_t n = 1;
  for (int d : shape) {
    if (d < 0) {
      throw Error(ErrorCode::kDimension, "negative dimension");
    }
    n *= static_cast<std::size_t>(d);
  }
  return n;
}

std::string ShapeToString(const std::vector<int>& shape) {
  std::ostringstream os;
  os << "[";
  for (std::size_t i = 0; i < shape.size(); ++i) {
    os << (i ? "x" : "") << shape[i];
  }
  os << "]";
  return os.str();
}

template <typename T>
Tensor<T>::Tensor(std::vector<int> shape, T fill)
    : shape_(std::move(shape)), data_(ShapeProduct(shape_), fill) {}

template <typename T>
Tensor<T>::Tensor(std::vector<int> shape, std::vector<T> data)
    : shape_(std::move(shape)), data_(std::move(data)) {
  if (ShapeProduct(shape_) != data_.size()) {
    throw Error(ErrorCode::kDimension,
                "shape " + ShapeToString(shape_) + " does not match " +
                    std::to_string(data_.size()) + " values");
  }
}

template <typename T>
Tensor<T> Tensor<T>::Matrix(
    int rows, int cols,
    std::initializer_list<std::initializer_list<T>> rows_init) {
  std::vector<T> data;
  data.reserve(static_cast<std::size_t>(rows) * cols);
  for (const auto& row : rows_init) {
    if (static_cast<int>(row.size()) != cols) {
      throw Error(ErrorCode::kDimension, "ragged matrix initializer");
    }
    data.insert(data.end(), row.begin(), row.end());
  }
  return Tensor({rows, cols}, std::move(data));
}

template <typename T>
int Tensor<T>::dim(int axis) const {
  if (axis < 0) axis += rank();
  if (axis < 0 || axis >= rank()) {
    throw Error(ErrorCode::kDimension, "axis out of range");
  }
  return shape_[axis];
}

template <typename T>
int Tensor<T>::rows() const {
  if (rank() == 2) return shape_[0];
  if (rank() <= 1) return 1;
  throw Error(ErrorCode::kDimension,
              "rows() on tensor of shape " + ShapeToString(shape_));
}

template <typename T>
int Tensor<T>::cols() const {
  if (rank() == 2) return shape_[1];
  if (rank() == 1) return shape_[0];
  if (rank() == 0) return 1;
  throw Error(ErrorCode::kDimension,
              "cols() on tensor of shape " + ShapeToString(shape_));
}

template <typename T>
bool Tensor<T>::AllFinite() const {
  for (T v : data_) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

template <typename T>
void Tensor<T>::Fill(T value) {
  std::fill(data_.begin(), data_.end(), value);
}

template class Tensor<float>;
template class Tensor<double>;

}  // namespace semmatch
