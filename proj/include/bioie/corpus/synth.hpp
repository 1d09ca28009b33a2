#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <string>

#include "bioie/corpus/document.hpp"

namespace bioie {

// Per-variable counts in pathology_variables() order.
using VariableCounts = std::array<std::size_t, 7>;

std::size_t& count_for(VariableCounts& counts, EntityKind kind);
std::size_t count_for(const VariableCounts& counts, EntityKind kind);

struct SynthSpec {
  VariableCounts positives{};  // value mentions linked to the report's diagnosis
  VariableCounts decoys{};     // same-kind mentions under an unrelated cue, unlinked
  std::size_t documents = 0;   // 0: as many as the largest positive count (at least 1)
  // Every planted item gets a report of its own; `documents` is ignored.
  bool one_item_per_document = false;
  std::size_t min_tokens = 30;  // filler target range per report
  std::size_t max_tokens = 120;
  Source source = Source::kSynthetic;
  std::uint64_t seed = 0;
};

struct SynthReport {
  std::size_t documents = 0;
  VariableCounts positives{};
  VariableCounts decoys{};
};

struct SynthCorpus {
  Dataset dataset;       // parsed back from `records`
  std::string records;   // canonical record lines
  SynthReport report;    // what the generator planted
};

SynthCorpus synth_corpus(const SynthSpec& spec);

// Report-count shapes of the two pathology collections.
SynthSpec tfah_shape(std::uint64_t seed = 0);
SynthSpec tcga_shape(std::uint64_t seed = 0);

}  // namespace bioie
