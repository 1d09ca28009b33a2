#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "bioie/corpus/document.hpp"
#include "bioie/corpus/folds.hpp"
#include "bioie/corpus/vocabulary.hpp"
#include "bioie/pipeline/model.hpp"
#include "bioie/textgraph/graphs.hpp"
#include "bioie/training/checkpoint.hpp"
#include "bioie/training/trainer.hpp"

namespace bioie {

// A model for `labels` warm-started from a checkpoint. Every parameter is
// copied except the classifier head when the label lists differ; then head
// columns are copied for labels present under the same name in the source
// and the rest keep their fresh initialization.
struct WarmStart {
  Model model;
  std::size_t copied_labels = 0;  // classifier columns taken from the source
};

WarmStart warm_start(const Checkpoint& source, const LabelSet& labels, std::uint64_t seed);

struct TransferResult {
  FitResult fit;
  Evaluation test;
  std::size_t copied_labels = 0;
};

// Warm-starts from the checkpoint, freezes plan.frozen_prefixes, trains on
// split.train with early stopping on split.dev and scores split.test. The
// target data must be encoded with the checkpoint's vocabulary.
TransferResult transfer_finetune(const Checkpoint& source, const PreparedData& target, const FoldSplit& split,
                                 const TrainPlan& plan, MetricsLog* log = nullptr);

struct NamedCorpus {
  std::string name;
  const Dataset* dataset = nullptr;
};

struct TransferDirection {
  std::string name;  // "<source>-<target>"
  FitResult source_fit;
  TransferResult result;
};

struct TransferProtocolOptions {
  ModelConfig model;
  TrainPlan source_plan;
  TrainPlan target_plan;  // frozen_prefixes here control fine-tuning
  GraphConfig graphs;
  std::size_t test_folds = 10;  // held-out share is 1/test_folds
};

// Runs a→b and b→a. Both corpora are encoded with one joint vocabulary and
// table; graphs are built per corpus. Each corpus is split once, with the
// same seed, into train/dev/test.
std::vector<TransferDirection> transfer_protocol(const NamedCorpus& a, const NamedCorpus& b,
                                                 const Vocabulary& joint_vocab, const EmbeddingTable& table,
                                                 const TransferProtocolOptions& options);

}  // namespace bioie
