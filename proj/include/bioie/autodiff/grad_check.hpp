#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "bioie/autodiff/tensor.hpp"

namespace bioie {

struct GradCheckOptions {
  double epsilon = 1e-5;
  // Coordinates sampled across all checked tensors; 0 checks every one.
  std::size_t max_coordinates = 0;
  std::uint64_t seed = 0;
};

struct GradCheckSample {
  std::size_t tensor = 0;  // position in the inputs span
  std::size_t index = 0;
  double analytic = 0.0;
  double numeric = 0.0;
  double relative_error = 0.0;
};

struct GradCheckResult {
  double max_relative_error = 0.0;
  std::size_t coordinates = 0;
  std::vector<GradCheckSample> samples;
};

// Builds a scalar loss on the given tape.
using LossFn = std::function<Tensor(Tape&)>;

// Compares tape gradients against central differences at the sampled
// coordinates. Relative error is |analytic − numeric| / max(|analytic|,
// |numeric|, 1e-8). Throws Error if two evaluations at the same point differ.
GradCheckResult grad_check(const LossFn& f, std::span<Tensor> inputs,
                           const GradCheckOptions& options = {});

inline double grad_check(const LossFn& f, Tensor x, double epsilon = 1e-5) {
  Tensor inputs[] = {x};
  return grad_check(f, inputs, {.epsilon = epsilon}).max_relative_error;
}

}  // namespace bioie
