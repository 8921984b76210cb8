#include "semmatch/gradcheck.h"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "semmatch/random.h"

namespace semmatch {
namespace {

double Evaluate(const GraphFn& graph, const std::vector<TensorD>& inputs) {
  Tape<double> tape;
  std::vector<Var<double>> vars;
  vars.reserve(inputs.size());
  for (const TensorD& t : inputs) vars.push_back(tape.Constant(t));
  return graph(tape, vars).value()[0];
}

}  // namespace

double FiniteDiffCheck(const GraphFn& graph, const std::vector<TensorD>& inputs,
                       const GradCheckOptions& options) {
  Tape<double> tape;
  std::vector<Var<double>> vars;
  vars.reserve(inputs.size());
  for (const TensorD& t : inputs) vars.push_back(tape.Leaf(t));
  Var<double> out = graph(tape, vars);
  tape.Backward(out);

  Rng rng(options.seed);
  std::vector<TensorD> perturbed = inputs;
  double max_err = 0.0;
  for (std::size_t k = 0; k < inputs.size(); ++k) {
    const TensorD analytic = tape.grad(vars[k]);
    std::vector<std::size_t> coords(inputs[k].size());
    std::iota(coords.begin(), coords.end(), 0);
    if (options.max_coords_per_input > 0 &&
        coords.size() > static_cast<std::size_t>(options.max_coords_per_input)) {
      for (std::size_t i = 0; i < static_cast<std::size_t>(options.max_coords_per_input); ++i) {
        std::swap(coords[i], coords[i + rng.Index(coords.size() - i)]);
      }
      coords.resize(options.max_coords_per_input);
    }
    for (std::size_t c : coords) {
      const double original = inputs[k][c];
      perturbed[k][c] = original + options.epsilon;
      const double plus = Evaluate(graph, perturbed);
      perturbed[k][c] = original - options.epsilon;
      const double minus = Evaluate(graph, perturbed);
      perturbed[k][c] = original;
      const double numeric = (plus - minus) / (2.0 * options.epsilon);
      const double a = analytic[c];
      const double denom = std::max({1.0, std::abs(a), std::abs(numeric)});
      max_err = std::max(max_err, std::abs(a - numeric) / denom);
    }
  }
  return max_err;
}

}  // namespace semmatch
