#ifndef SEMMATCH_GRADCHECK_H_
#define SEMMATCH_GRADCHECK_H_

#include <functional>
#include <span>
#include <vector>

#include "semmatch/autodiff.h"

namespace semmatch {

// Builds a scalar-valued graph from leaf inputs.
using GraphFn =
    std::function<Var<double>(Tape<double>& tape, std::span<const Var<double>> inputs)>;

struct GradCheckOptions {
  double epsilon = 1e-5;
  // When positive, only this many randomly chosen coordinates per input are
  // perturbed; otherwise every coordinate is checked.
  int max_coords_per_input = 0;
  std::uint64_t seed = 0;
};

// Compares reverse-mode gradients against central differences in double
// precision. Returns the max over checked coordinates of
//   |analytic - numeric| / max(1, |analytic|, |numeric|).
double FiniteDiffCheck(const GraphFn& graph, const std::vector<TensorD>& inputs,
                       const GradCheckOptions& options = {});

}  // namespace semmatch

#endif  // SEMMATCH_GRADCHECK_H_
