#include "semmatch/adam.h"

#include <cmath>

namespace semmatch {

template <typename T>
void AdamStep(ParamStore<T>& params, const std::vector<Tensor<T>>& grads,
              AdamState<T>& state, const AdamOptions& options) {
  if (static_cast<int>(grads.size()) != params.size()) {
    throw Error(ErrorCode::kDimension, "Adam: gradient count does not match parameters");
  }
  if (state.first_moment.empty()) {
    for (int i = 0; i < params.size(); ++i) {
      state.first_moment.emplace_back(params.value(i).shape(), T(0));
      state.second_moment.emplace_back(params.value(i).shape(), T(0));
    }
  }
  if (static_cast<int>(state.first_moment.size()) != params.size()) {
    throw Error(ErrorCode::kDimension, "Adam: state does not match parameters");
  }
  for (int i = 0; i < params.size(); ++i) {
    if (grads[i].shape() != params.value(i).shape() ||
        state.first_moment[i].shape() != params.value(i).shape()) {
      throw Error(ErrorCode::kDimension, "Adam: shape mismatch for '" + params.name(i) + "'");
    }
  }

  ++state.step;
  const double b1 = options.beta1, b2 = options.beta2;
  const double correction1 = 1.0 - std::pow(b1, static_cast<double>(state.step));
  const double correction2 = 1.0 - std::pow(b2, static_cast<double>(state.step));
  for (int i = 0; i < params.size(); ++i) {
    Tensor<T>& p = params.mutable_value(i);
    Tensor<T>& m = state.first_moment[i];
    Tensor<T>& v = state.second_moment[i];
    const Tensor<T>& g = grads[i];
    for (std::size_t k = 0; k < p.size(); ++k) {
      m[k] = static_cast<T>(b1 * m[k] + (1.0 - b1) * g[k]);
      v[k] = static_cast<T>(b2 * v[k] + (1.0 - b2) * g[k] * g[k]);
      const double m_hat = m[k] / correction1;
      const double v_hat = v[k] / correction2;
      p[k] = static_cast<T>(p[k] - options.learning_rate * m_hat /
                                       (std::sqrt(v_hat) + options.epsilon));
    }
  }
}

template void AdamStep(ParamStore<float>&, const std::vector<TensorF>&, AdamState<float>&,
                       const AdamOptions&);
template void AdamStep(ParamStore<double>&, const std::vector<TensorD>&, AdamState<double>&,
                       const AdamOptions&);

}  // namespace semmatch
