#include "bioie/autodiff/adam.hpp"

#include <cmath>

#include "bioie/error.hpp"

namespace bioie {

Adam::Adam(std::vector<Tensor> params, AdamConfig config) : params_(std::move(params)) {
  state_.config = config;
  for (const Tensor& p : params_) {
    state_.m.emplace_back(p.size(), 0.0);
    state_.v.emplace_back(p.size(), 0.0);
  }
}

void Adam::step() {
  for (std::size_t k = 0; k < params_.size(); ++k) {
    if (!params_[k].requires_grad() || !params_[k].has_grad()) {
      throw Error("adam: parameter " + std::to_string(k) + " has no gradient");
    }
  }
  ++state_.t;
  const AdamConfig& c = state_.config;
  const double t = static_cast<double>(state_.t);
  const double correction1 = 1.0 - std::pow(c.beta1, t);
  const double correction2 = 1.0 - std::pow(c.beta2, t);
  for (std::size_t k = 0; k < params_.size(); ++k) {
    auto values = params_[k].mutable_values();
    auto grad = params_[k].grad();
    auto& m = state_.m[k];
    auto& v = state_.v[k];
    for (std::size_t i = 0; i < values.size(); ++i) {
      const double g = grad[i];
      m[i] = c.beta1 * m[i] + (1.0 - c.beta1) * g;
      v[i] = c.beta2 * v[i] + (1.0 - c.beta2) * g * g;
      const double m_hat = m[i] / correction1;
      const double v_hat = v[i] / correction2;
      values[i] -= c.lr * m_hat / (std::sqrt(v_hat) + c.epsilon);
    }
  }
  zero_grad();
}

void Adam::zero_grad() {
  for (Tensor& p : params_) p.zero_grad();
}

void Adam::load_state(AdamState state) {
  if (state.m.size() != params_.size() || state.v.size() != params_.size()) {
    throw DimensionError("adam: state holds " + std::to_string(state.m.size()) + " moments for " +
                         std::to_string(params_.size()) + " parameters");
  }
  for (std::size_t k = 0; k < params_.size(); ++k) {
    if (state.m[k].size() != params_[k].size() || state.v[k].size() != params_[k].size()) {
      throw DimensionError("adam: moment shape mismatch for parameter " + std::to_string(k));
    }
  }
  state_ = std::move(state);
}

}  // namespace bioie
