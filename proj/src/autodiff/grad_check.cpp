#include "bioie/autodiff/grad_check.hpp"

#include <algorithm>
#include <cmath>
#include <utility>
#include <vector>

#include "bioie/autodiff/rng.hpp"
#include "bioie/error.hpp"

namespace bioie {

namespace {

double evaluate(const LossFn& f) {
  Tape tape;
  tape.set_recording(false);
  return f(tape).item();
}

}  // namespace

GradCheckResult grad_check(const LossFn& f, std::span<Tensor> inputs, const GradCheckOptions& options) {
  for (Tensor& x : inputs) {
    x.set_requires_grad(true);
    x.zero_grad();
  }
  {
    Tape tape;
    Tensor loss = f(tape);
    tape.backward(loss);
  }

  const double base = evaluate(f);
  if (evaluate(f) != base) throw Error("grad_check: loss is not deterministic");

  std::vector<std::pair<std::size_t, std::size_t>> coords;
  for (std::size_t t = 0; t < inputs.size(); ++t) {
    for (std::size_t i = 0; i < inputs[t].size(); ++i) coords.emplace_back(t, i);
  }
  if (options.max_coordinates != 0 && coords.size() > options.max_coordinates) {
    Rng rng(options.seed);
    rng.shuffle(coords);
    coords.resize(options.max_coordinates);
  }

  GradCheckResult result;
  const double eps = options.epsilon;
  for (auto [t, i] : coords) {
    Tensor& x = inputs[t];
    const double analytic = x.grad()[i];
    const double original = x.values()[i];
    x.mutable_values()[i] = original + eps;
    const double up = evaluate(f);
    x.mutable_values()[i] = original - eps;
    const double down = evaluate(f);
    x.mutable_values()[i] = original;
    const double numeric = (up - down) / (2.0 * eps);
    const double denom = std::max({std::abs(analytic), std::abs(numeric), 1e-8});
    const double rel = std::abs(analytic - numeric) / denom;
    result.max_relative_error = std::max(result.max_relative_error, rel);
    result.samples.push_back({t, i, analytic, numeric, rel});
    ++result.coordinates;
  }
  return result;
}

}  // namespace bioie
