#include "semmatch/param_store.h"

#include <cmath>

#include "semmatch/random.h"

namespace semmatch {

template <typename T>
void ParamStore<T>::Add(const std::string& name, Tensor<T> value) {
  if (Contains(name)) {
    throw Error(ErrorCode::kContract, "duplicate parameter '" + name + "'");
  }
  index_.emplace(name, static_cast<int>(entries_.size()));
  entries_.emplace_back(name, std::move(value));
}

template <typename T>
const Tensor<T>& ParamStore<T>::Get(const std::string& name) const {
  auto it = index_.find(name);
  if (it == index_.end()) {
    throw Error(ErrorCode::kContract, "unknown parameter '" + name + "'");
  }
  return entries_[it->second].second;
}

template <typename T>
Tensor<T>& ParamStore<T>::GetMutable(const std::string& name) {
  return const_cast<Tensor<T>&>(std::as_const(*this).Get(name));
}

template <typename T>
std::size_t ParamStore<T>::NumScalars() const {
  std::size_t n = 0;
  for (const auto& entry : entries_) n += entry.second.size();
  return n;
}

template <typename T>
BoundParams<T>::BoundParams(Tape<T>& tape, const ParamStore<T>& store, bool trainable)
    : tape_(&tape), store_(&store) {
  vars_.reserve(store.size());
  for (int i = 0; i < store.size(); ++i) {
    vars_.push_back(trainable ? tape.Leaf(store.value(i)) : tape.Constant(store.value(i)));
  }
}

template <typename T>
Var<T> BoundParams<T>::operator()(const std::string& name) const {
  // Linear lookup over a few dozen names is negligible next to the math.
  for (int i = 0; i < store_->size(); ++i) {
    if (store_->name(i) == name) return vars_[i];
  }
  throw Error(ErrorCode::kContract, "parameter '" + name + "' not bound");
}

template <typename T>
std::vector<Tensor<T>> BoundParams<T>::Gradients() const {
  std::vector<Tensor<T>> grads;
  grads.reserve(vars_.size());
  for (const Var<T>& v : vars_) grads.push_back(tape_->grad(v));
  return grads;
}

TensorF UniformInit(std::vector<int> shape, int fan_in, std::uint64_t seed) {
  TensorF t(std::move(shape));
  Rng rng(seed);
  const double bound = 1.0 / std::sqrt(static_cast<double>(std::max(fan_in, 1)));
  for (float& v : t.values()) v = static_cast<float>(rng.Uniform(-bound, bound));
  return t;
}

template class ParamStore<float>;
template class ParamStore<double>;
template class BoundParams<float>;
template class BoundParams<double>;

}  // namespace semmatch
