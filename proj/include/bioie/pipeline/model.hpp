#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "bioie/autodiff/ops.hpp"
#include "bioie/corpus/document.hpp"
#include "bioie/corpus/vocabulary.hpp"
#include "bioie/layers/config.hpp"
#include "bioie/layers/layers.hpp"
#include "bioie/layers/registry.hpp"
#include "bioie/textgraph/graphs.hpp"

namespace bioie {

// ---- prepared inputs

struct GraphEdge {
  std::size_t i = 0, j = 0;  // i < j, both content tokens
  double weight = 0.0;
};

struct EncodedDocument {
  std::vector<std::size_t> word_ids;
  std::vector<std::uint8_t> valid;  // 0 at padding
  std::size_t length = 0;           // content tokens
  std::array<std::vector<GraphEdge>, 3> edges;  // off-diagonal entries per graph kind

  std::size_t size() const { return word_ids.size(); }
  // D⁻¹A over all positions, self-loops included.
  Tensor normalized_adjacency(GraphKind kind) const;
};

struct Example {
  std::size_t doc = 0;
  std::size_t head_start = 0;
  std::size_t tail_start = 0;
  std::size_t label = 0;
};

struct PreparedData {
  std::vector<EncodedDocument> docs;
  std::vector<Example> examples;
  std::shared_ptr<const LabelSet> labels;

  std::vector<std::size_t> labels_of(std::span<const std::size_t> indices) const;
};

// Encodes every document and instance of a (length-normalized) dataset. With
// no graphs, GCN adjacency reduces to self-loops.
PreparedData prepare_data(const Dataset& dataset, const Vocabulary& vocab, const CorpusGraphs* graphs);

// ---- ablation variants

enum class AblationVariant {
  kFull,
  kNoPretrained,
  kNoPosition,
  kNoPretrainedNoPosition,
  kNoAttention,
  kSingleHead,
  kNoGcn,
};

std::span<const AblationVariant> all_variants();
std::string_view to_string(AblationVariant variant);
AblationVariant parse_variant(std::string_view name);  // throws ConfigError
std::string_view table_row_label(AblationVariant variant);

ModelConfig make_variant(ModelConfig base, AblationVariant variant);

// ---- model

class Model {
 public:
  // With use_pretrained the word table is a frozen copy of `embeddings`;
  // otherwise it is the trainable parameter "embed.word", drawn from the seed.
  Model(const ModelConfig& config, const Vocabulary& vocab, const EmbeddingTable& embeddings, std::uint64_t seed);

  const ModelConfig& config() const { return config_; }
  ParameterRegistry& parameters() { return params_; }
  const ParameterRegistry& parameters() const { return params_; }
  const Tensor& word_table() const { return word_table_; }

  // Logits [b × C], one row per example index, in order.
  Tensor forward(Tape& tape, const PreparedData& data, std::span<const std::size_t> examples, ops::Mode mode,
                 Rng& dropout_rng) const;

  // Mean cross entropy of forward() against the gold labels.
  Tensor loss(Tape& tape, const PreparedData& data, std::span<const std::size_t> examples, ops::Mode mode,
              Rng& dropout_rng) const;

  // Logits [1 × C] of one example.
  Tensor forward_one(Tape& tape, const EncodedDocument& doc, const Example& example, ops::Mode mode,
                     Rng& dropout_rng) const;

  std::size_t count_parameters() const { return params_.element_count(); }
  std::map<std::string, std::size_t> parameter_groups() const { return params_.group_counts(); }

 private:
  ModelConfig config_;
  ParameterRegistry params_;
  Tensor word_table_;
  std::optional<Tensor> position_;
  LstmParams lstm_fwd_, lstm_bwd_;
  std::optional<AttentionParams> attention_;
  std::vector<std::array<GcnParams, 3>> gcn_;
  Tensor cls_w_, cls_b_;
};

// Softmax probabilities of a logits matrix, row by row.
std::vector<std::vector<double>> probabilities(const Tensor& logits);

}  // namespace bioie
