#ifndef SEMMATCH_PARAM_STORE_H_
#define SEMMATCH_PARAM_STORE_H_

#include <cstdint>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "semmatch/autodiff.h"
#include "semmatch/tensor.h"

namespace semmatch {

// Ordered collection of named parameter tensors. Order is insertion order and
// defines checkpoint layout and optimizer state layout.
template <typename T>
class ParamStore {
 public:
  void Add(const std::string& name, Tensor<T> value);
  bool Contains(const std::string& name) const { return index_.count(name) > 0; }
  const Tensor<T>& Get(const std::string& name) const;
  Tensor<T>& GetMutable(const std::string& name);

  int size() const { return static_cast<int>(entries_.size()); }
  const std::string& name(int i) const { return entries_[i].first; }
  const Tensor<T>& value(int i) const { return entries_[i].second; }
  Tensor<T>& mutable_value(int i) { return entries_[i].second; }
  std::size_t NumScalars() const;

  template <typename U>
  ParamStore<U> Cast() const {
    ParamStore<U> out;
    for (const auto& [name, value] : entries_) out.Add(name, value.template Cast<U>());
    return out;
  }

  bool operator==(const ParamStore& other) const { return entries_ == other.entries_; }

 private:
  std::vector<std::pair<std::string, Tensor<T>>> entries_;
  std::unordered_map<std::string, int> index_;
};

// Parameters placed on a tape for one forward pass.
template <typename T>
class BoundParams {
 public:
  // Trainable binding records every parameter as a gradient leaf; otherwise
  // parameters are constants and no backward closures are kept.
  BoundParams(Tape<T>& tape, const ParamStore<T>& store, bool trainable);

  Var<T> operator()(const std::string& name) const;
  // Gradients of the last backward pass, parallel to the store entries.
  std::vector<Tensor<T>> Gradients() const;
  Tape<T>& tape() const { return *tape_; }

 private:
  Tape<T>* tape_;
  const ParamStore<T>* store_;
  std::vector<Var<T>> vars_;
};

// Uniform in [-1/sqrt(fan_in), 1/sqrt(fan_in)].
TensorF UniformInit(std::vector<int> shape, int fan_in, std::uint64_t seed);

extern template class ParamStore<float>;
extern template class ParamStore<double>;
extern template class BoundParams<float>;
extern template class BoundParams<double>;

}  // namespace semmatch

#endif  // SEMMATCH_PARAM_STORE_H_
