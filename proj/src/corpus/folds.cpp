#include "bioie/corpus/folds.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "bioie/autodiff/rng.hpp"
#include "bioie/error.hpp"

namespace bioie {

FoldPlan make_folds(std::size_t instance_count, std::size_t k, std::uint64_t seed) {
  if (k < 2) throw Error("make_folds: k must be at least 2");
  if (k > instance_count) {
    throw Error("make_folds: k = " + std::to_string(k) + " exceeds instance count " +
                std::to_string(instance_count));
  }
  std::vector<std::size_t> order(instance_count);
  std::iota(order.begin(), order.end(), 0);
  Rng rng(seed);
  rng.shuffle(order);
  FoldPlan plan;
  plan.k = k;
  plan.seed = seed;
  plan.assignment.resize(instance_count);
  for (std::size_t pos = 0; pos < order.size(); ++pos) plan.assignment[order[pos]] = pos % k;
  return plan;
}

std::vector<std::size_t> FoldPlan::members(std::size_t fold) const {
  if (fold >= k) throw Error("fold " + std::to_string(fold) + " out of range");
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < assignment.size(); ++i) {
    if (assignment[i] == fold) out.push_back(i);
  }
  return out;
}

FoldSplit FoldPlan::split(std::size_t fold, double dev_fraction) const {
  if (dev_fraction < 0.0 || dev_fraction >= 1.0) throw Error("dev fraction must lie in [0, 1)");
  FoldSplit out;
  out.test = members(fold);
  std::vector<std::size_t> rest;
  for (std::size_t i = 0; i < assignment.size(); ++i) {
    if (assignment[i] != fold) rest.push_back(i);
  }
  Rng rng(seed ^ (0x9E3779B97F4A7C15ULL * (fold + 1)));
  rng.shuffle(rest);
  std::size_t dev = 0;
  if (dev_fraction > 0.0 && rest.size() > 1) {
    dev = std::max<std::size_t>(1, static_cast<std::size_t>(std::round(dev_fraction * rest.size())));
    dev = std::min(dev, rest.size() - 1);
  }
  out.dev.assign(rest.begin(), rest.begin() + static_cast<std::ptrdiff_t>(dev));
  out.train.assign(rest.begin() + static_cast<std::ptrdiff_t>(dev), rest.end());
  std::sort(out.dev.begin(), out.dev.end());
  std::sort(out.train.begin(), out.train.end());
  return out;
}

}  // namespace bioie
