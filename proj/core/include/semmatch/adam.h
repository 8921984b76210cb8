#ifndef SEMMATCH_ADAM_H_
#define SEMMATCH_ADAM_H_

#include <cstdint>
#include <vector>

#include "semmatch/param_store.h"
#include "semmatch/tensor.h"

namespace semmatch {

struct AdamOptions {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

template <typename T>
struct AdamState {
  std::vector<Tensor<T>> first_moment;
  std::vector<Tensor<T>> second_moment;
  std::int64_t step = 0;
};

// One bias-corrected Adam update. `grads` is parallel to `params` entries.
// The state is lazily sized on the first call.
template <typename T>
void AdamStep(ParamStore<T>& params, const std::vector<Tensor<T>>& grads,
              AdamState<T>& state, const AdamOptions& options);

}  // namespace semmatch

#endif  // SEMMATCH_ADAM_H_
