#pragma once

#include <cstdint>
#include <vector>

#include "bioie/autodiff/tensor.hpp"

namespace bioie {

struct AdamConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

// First and second moments per parameter plus the shared step counter.
struct AdamState {
  AdamConfig config;
  std::vector<std::vector<double>> m;
  std::vector<std::vector<double>> v;
  std::uint64_t t = 0;
};

// Adam with bias correction. Owns handles to the parameters it updates.
class Adam {
 public:
  Adam() = default;
  Adam(std::vector<Tensor> params, AdamConfig config = {});

  // Applies one update from the current grads, then zeroes them.
  // Throws Error when a listed parameter carries no gradient.
  void step();
  void zero_grad();

  const std::vector<Tensor>& params() const { return params_; }
  const AdamState& state() const { return state_; }
  // Replaces moments and counter; shapes must match the parameters.
  void load_state(AdamState state);
  void set_lr(double lr) { state_.config.lr = lr; }

 private:
  std::vector<Tensor> params_;
  AdamState state_;
};

}  // namespace bioie
