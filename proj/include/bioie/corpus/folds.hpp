#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

namespace bioie {

struct FoldSplit {
  std::vector<std::size_t> train;
  std::vector<std::size_t> dev;
  std::vector<std::size_t> test;
};

struct FoldPlan {
  std::size_t k = 0;
  std::uint64_t seed = 0;
  std::vector<std::size_t> assignment;  // instance index → fold id

  std::size_t instance_count() const { return assignment.size(); }
  std::vector<std::size_t> members(std::size_t fold) const;

  // Fold `fold` is the test set; the remaining instances are shuffled with a
  // fold-specific seed and dev_fraction of them (at least one) become dev.
  FoldSplit split(std::size_t fold, double dev_fraction = 0.1) const;
};

// Seeded shuffle, then round-robin assignment to k folds.
FoldPlan make_folds(std::size_t instance_count, std::size_t k, std::uint64_t seed);

}  // namespace bioie
