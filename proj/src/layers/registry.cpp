#include "bioie/layers/registry.hpp"

#include <cmath>

#include "bioie/error.hpp"

namespace bioie {

bool name_has_prefix(std::string_view name, std::string_view prefix) {
  if (prefix.empty()) return true;
  if (name.substr(0, prefix.size()) != prefix) return false;
  return name.size() == prefix.size() || prefix.back() == '.' || name[prefix.size()] == '.';
}

Tensor ParameterRegistry::add(std::string name, Tensor value) {
  if (index_.count(name)) throw Error("duplicate parameter name " + name);
  value.set_requires_grad(true);
  index_.emplace(name, entries_.size());
  entries_.push_back({std::move(name), value, false});
  return value;
}

Tensor ParameterRegistry::get(std::string_view name) const {
  auto it = index_.find(name);
  if (it == index_.end()) throw Error("no parameter named " + std::string(name));
  return entries_[it->second].value;
}

bool ParameterRegistry::contains(std::string_view name) const { return index_.find(name) != index_.end(); }

std::vector<Tensor> ParameterRegistry::tensors() const {
  std::vector<Tensor> out;
  for (const auto& p : entries_) out.push_back(p.value);
  return out;
}

std::vector<Tensor> ParameterRegistry::trainable() const {
  std::vector<Tensor> out;
  for (const auto& p : entries_) {
    if (!p.frozen) out.push_back(p.value);
  }
  return out;
}

std::size_t ParameterRegistry::freeze(const std::vector<std::string>& prefixes) {
  std::size_t frozen = 0;
  for (const auto& prefix : prefixes) {
    bool matched = false;
    for (auto& p : entries_) {
      if (!name_has_prefix(p.name, prefix)) continue;
      matched = true;
      if (!p.frozen) ++frozen;
      p.frozen = true;
    }
    if (!matched) throw ConfigError("freeze prefix '" + prefix + "' matches no parameter");
  }
  return frozen;
}

void ParameterRegistry::unfreeze_all() {
  for (auto& p : entries_) p.frozen = false;
}

std::size_t ParameterRegistry::element_count() const {
  std::size_t n = 0;
  for (const auto& p : entries_) n += p.value.size();
  return n;
}

std::map<std::string, std::size_t> ParameterRegistry::group_counts() const {
  std::map<std::string, std::size_t> out;
  for (const auto& p : entries_) out[p.name.substr(0, p.name.find('.'))] += p.value.size();
  return out;
}

Tensor xavier_uniform(std::size_t fan_in, std::size_t fan_out, Rng& rng) {
  const double bound = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
  Tensor t(Shape{fan_in, fan_out});
  for (double& v : t.mutable_values()) v = rng.uniform(-bound, bound);
  return t;
}

}  // namespace bioie
