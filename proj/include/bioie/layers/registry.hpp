#pragma once

#include <cstddef>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "bioie/autodiff/rng.hpp"
#include "bioie/autodiff/tensor.hpp"

namespace bioie {

struct Parameter {
  std::string name;  // dotted, e.g. "lstm.fwd.w_x"
  Tensor value;
  bool frozen = false;
};

// Ordered name → tensor registry. Registration order is the order of
// initialization, serialization and optimizer state.
class ParameterRegistry {
 public:
  Tensor add(std::string name, Tensor value);
  Tensor get(std::string_view name) const;
  bool contains(std::string_view name) const;

  const std::vector<Parameter>& entries() const { return entries_; }
  std::size_t size() const { return entries_.size(); }

  std::vector<Tensor> tensors() const;
  std::vector<Tensor> trainable() const;

  // Freezes every parameter whose name starts with one of the prefixes (a
  // prefix matches whole dotted components). Throws when a prefix matches
  // nothing. Returns the number of frozen tensors.
  std::size_t freeze(const std::vector<std::string>& prefixes);
  void unfreeze_all();

  std::size_t element_count() const;
  // Element counts keyed by the first dotted component.
  std::map<std::string, std::size_t> group_counts() const;

 private:
  std::vector<Parameter> entries_;
  std::map<std::string, std::size_t, std::less<>> index_;
};

// Uniform in ±√(6/(fan_in+fan_out)) for a [fan_in×fan_out] matrix.
Tensor xavier_uniform(std::size_t fan_in, std::size_t fan_out, Rng& rng);

bool name_has_prefix(std::string_view name, std::string_view prefix);

}  // namespace bioie
