#include "bioie/training/transfer.hpp"

#include <algorithm>

#include "bioie/error.hpp"

namespace bioie {

namespace {

void copy_values(const std::vector<double>& from, Tensor to) {
  std::copy(from.begin(), from.end(), to.mutable_values().begin());
}

}  // namespace

WarmStart warm_start(const Checkpoint& source, const LabelSet& labels, std::uint64_t seed) {
  ModelConfig config = source.config();
  const bool same_labels = source.labels == labels.labels;
  config.label_count = labels.size();
  WarmStart ws{Model(config, source.vocabulary(), source.embeddings(), seed)};
  auto& registry = ws.model.parameters();

  for (const auto& block : source.parameters) {
    if (!registry.contains(block.name)) {
      throw CheckpointError(CheckpointErrorKind::kCorrupt, "checkpoint parameter " + block.name + " has no target");
    }
    Tensor target = registry.get(block.name);
    const bool head = block.name == "cls.w" || block.name == "cls.b";
    if (head && !same_labels) continue;
    if (block.shape != target.shape()) {
      throw CheckpointError(CheckpointErrorKind::kCorrupt, "shape mismatch for " + block.name);
    }
    copy_values(block.values, target);
  }
  {
    Tensor table = ws.model.word_table();
    if (source.word_table.shape != table.shape()) {
      throw CheckpointError(CheckpointErrorKind::kCorrupt, "word table shape mismatch");
    }
    copy_values(source.word_table.values, table);
  }
  if (same_labels) {
    ws.copied_labels = labels.size();
    return ws;
  }

  const auto find_block = [&](const std::string& name) -> const TensorBlock& {
    for (const auto& b : source.parameters) {
      if (b.name == name) return b;
    }
    throw CheckpointError(CheckpointErrorKind::kCorrupt, "checkpoint lacks " + name);
  };
  const TensorBlock& src_w = find_block("cls.w");
  const TensorBlock& src_b = find_block("cls.b");
  Tensor w = registry.get("cls.w");
  Tensor b = registry.get("cls.b");
  const std::size_t rows = w.rows(), c_new = labels.size(), c_old = source.labels.size();
  for (std::size_t j = 0; j < c_new; ++j) {
    const auto it = std::find(source.labels.begin(), source.labels.end(), labels.labels[j]);
    if (it == source.labels.end()) continue;
    const auto old = static_cast<std::size_t>(it - source.labels.begin());
    for (std::size_t r = 0; r < rows; ++r) w.mutable_values()[r * c_new + j] = src_w.values[r * c_old + old];
    b.mutable_values()[j] = src_b.values[old];
    ++ws.copied_labels;
  }
  return ws;
}

TransferResult transfer_finetune(const Checkpoint& source, const PreparedData& target, const FoldSplit& split,
                                 const TrainPlan& plan, MetricsLog* log) {
  if (split.train.empty() || split.test.empty()) throw ConfigError("transfer_finetune: empty train or test split");
  WarmStart ws = warm_start(source, *target.labels, plan.seed);
  TransferResult result;
  result.copied_labels = ws.copied_labels;
  result.fit = fit(ws.model, target, split.train, split.dev, plan, log);
  result.test = evaluate(ws.model, target, split.test);
  return result;
}

std::vector<TransferDirection> transfer_protocol(const NamedCorpus& a, const NamedCorpus& b,
                                                 const Vocabulary& joint_vocab, const EmbeddingTable& table,
                                                 const TransferProtocolOptions& options) {
  struct Prepared {
    CorpusGraphs graphs;
    PreparedData data;
    FoldSplit split;
  };
  auto prepare = [&](const NamedCorpus& c) {
    if (!c.dataset) throw ConfigError("transfer_protocol: corpus " + c.name + " is missing");
    Prepared p;
    p.graphs = build_corpus_graphs(c.dataset->documents, joint_vocab, table, options.graphs);
    p.data = prepare_data(*c.dataset, joint_vocab, &p.graphs);
    p.split = make_folds(p.data.examples.size(), options.test_folds, options.source_plan.seed)
                  .split(0, options.source_plan.dev_fraction);
    return p;
  };
  const Prepared pa = prepare(a), pb = prepare(b);

  std::vector<TransferDirection> out;
  for (int dir = 0; dir < 2; ++dir) {
    const NamedCorpus& src = dir == 0 ? a : b;
    const NamedCorpus& dst = dir == 0 ? b : a;
    const Prepared& ps = dir == 0 ? pa : pb;
    const Prepared& pt = dir == 0 ? pb : pa;
    ModelConfig config = options.model;
    config.label_count = ps.data.labels->size();
    Model model(config, joint_vocab, table, options.source_plan.seed);
    TransferDirection d;
    d.name = src.name + "-" + dst.name;
    d.source_fit = fit(model, ps.data, ps.split.train, ps.split.dev, options.source_plan);
    model.parameters().unfreeze_all();
    const Checkpoint checkpoint = capture_checkpoint(model, joint_vocab, *ps.data.labels);
    d.result = transfer_finetune(checkpoint, pt.data, pt.split, options.target_plan);
    out.push_back(std::move(d));
  }
  return out;
}

}  // namespace bioie
