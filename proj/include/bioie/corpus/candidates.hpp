#pragma once

#include <cstddef>
#include <utility>
#include <vector>

#include "bioie/autodiff/rng.hpp"
#include "bioie/corpus/document.hpp"

namespace bioie {

// Typed candidate pairs for one document in canonical (head, tail) mention
// order, labelled from the document's gold relations.
//   CDR:        every (Chemical, Disease) pair; positive iff the normalized id
//               pair is a gold CID relation.
//   ChemProt:   every (Chemical, Gene/Protein) pair inside one sentence.
//   Pathology:  every (Disease anchor, variable mention) pair; the label is the
//               variable when the record links the two.
std::vector<RelationInstance> generate_candidates(const Document& doc, std::size_t doc_index,
                                                  TaskKind task);

// Keeps every positive and at most ratio × positives negatives (ratio ≤ 0 keeps
// everything). Survivors keep their original order.
std::vector<RelationInstance> subsample_negatives(const std::vector<RelationInstance>& instances,
                                                  double ratio, Rng& rng);

// One binary dataset per pathology variable, labels {None, <variable>},
// holding the candidates whose tail mention has that kind.
std::vector<std::pair<EntityKind, Dataset>> split_subtasks(const Dataset& pathology);

struct LengthLimits {
  std::size_t min_tokens = 50;
  std::size_t max_tokens = 150;
};

// Truncates to max_tokens (dropping mentions that start past the cut, clipping
// ones that straddle it) and pads with PAD tokens up to min_tokens.
Document normalize_length(const Document& doc, LengthLimits limits = {});

// normalize_length over every document, dropping instances whose mentions
// were cut and remapping mention indices in the rest.
Dataset normalize_dataset(const Dataset& dataset, LengthLimits limits = {});

}  // namespace bioie
