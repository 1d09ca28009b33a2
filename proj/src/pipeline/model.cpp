#include "bioie/pipeline/model.hpp"

#include <array>
#include <string>

#include "bioie/error.hpp"

namespace bioie {

namespace {

constexpr std::array<AblationVariant, 7> kVariants = {
    AblationVariant::kFull,        AblationVariant::kNoPretrained, AblationVariant::kNoPosition,
    AblationVariant::kNoPretrainedNoPosition, AblationVariant::kNoAttention, AblationVariant::kSingleHead,
    AblationVariant::kNoGcn,
};

std::size_t kind_index(GraphKind kind) { return static_cast<std::size_t>(kind); }

}  // namespace

// ------------------------------------------------------------ prepared data

Tensor EncodedDocument::normalized_adjacency(GraphKind kind) const {
  const std::size_t n = size();
  std::vector<double> a(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) a[i * n + i] = 1.0;
  for (const auto& e : edges[kind_index(kind)]) {
    a[e.i * n + e.j] = e.weight;
    a[e.j * n + e.i] = e.weight;
  }
  return normalize_adjacency(a, n);
}

std::vector<std::size_t> PreparedData::labels_of(std::span<const std::size_t> indices) const {
  std::vector<std::size_t> out;
  out.reserve(indices.size());
  for (auto i : indices) out.push_back(examples.at(i).label);
  return out;
}

PreparedData prepare_data(const Dataset& dataset, const Vocabulary& vocab, const CorpusGraphs* graphs) {
  PreparedData out;
  out.labels = dataset.labels;
  for (const auto& doc : dataset.documents) {
    EncodedDocument enc;
    enc.word_ids = vocab.encode(doc);
    for (const auto& t : doc.tokens) enc.valid.push_back(t.pad ? 0 : 1);
    enc.length = doc.content_length();
    if (enc.size() == 0) throw Error("document " + doc.id + " has no tokens");
    if (graphs) {
      const DocumentAdjacency adj = project_adjacency(doc, vocab, *graphs);
      for (GraphKind kind : kGraphKinds) {
        const Adjacency& a = adj[kind];
        for (std::size_t i = 0; i < a.n; ++i) {
          for (std::size_t j = i + 1; j < a.n; ++j) {
            if (a.at(i, j) != 0.0) enc.edges[kind_index(kind)].push_back({i, j, a.at(i, j)});
          }
        }
      }
    }
    out.docs.push_back(std::move(enc));
  }
  for (const auto& inst : dataset.instances) {
    const Document& doc = dataset.documents.at(inst.doc_index);
    Example ex;
    ex.doc = inst.doc_index;
    ex.head_start = doc.mentions.at(inst.head).first_token;
    ex.tail_start = doc.mentions.at(inst.tail).first_token;
    ex.label = inst.label;
    out.examples.push_back(ex);
  }
  return out;
}

// ------------------------------------------------------------ variants

std::span<const AblationVariant> all_variants() { return kVariants; }

std::string_view to_string(AblationVariant variant) {
  switch (variant) {
    case AblationVariant::kFull: return "full";
    case AblationVariant::kNoPretrained: return "no_pretrained";
    case AblationVariant::kNoPosition: return "no_position";
    case AblationVariant::kNoPretrainedNoPosition: return "no_pretrained_no_position";
    case AblationVariant::kNoAttention: return "no_attention";
    case AblationVariant::kSingleHead: return "single_head";
    case AblationVariant::kNoGcn: return "no_gcn";
  }
  return "?";
}

AblationVariant parse_variant(std::string_view name) {
  for (AblationVariant v : kVariants) {
    if (to_string(v) == name) return v;
  }
  std::string legal;
  for (AblationVariant v : kVariants) legal += (legal.empty() ? "" : ", ") + std::string(to_string(v));
  throw ConfigError("unknown variant '" + std::string(name) + "'; expected one of " + legal);
}

std::string_view table_row_label(AblationVariant variant) {
  switch (variant) {
    case AblationVariant::kFull: return "Proposed Method";
    case AblationVariant::kNoPretrained: return "- BioBert";
    case AblationVariant::kNoPosition: return "- position";
    case AblationVariant::kNoPretrainedNoPosition: return "- position - BioBert";
    case AblationVariant::kNoAttention: return "- Multi-head Attention";
    case AblationVariant::kSingleHead: return "- Multi-head Attention + Single-head attention";
    case AblationVariant::kNoGcn: return "- GCN";
  }
  return "?";
}

ModelConfig make_variant(ModelConfig base, AblationVariant variant) {
  switch (variant) {
    case AblationVariant::kFull: break;
    case AblationVariant::kNoPretrained: base.use_pretrained = false; break;
    case AblationVariant::kNoPosition: base.use_position = false; break;
    case AblationVariant::kNoPretrainedNoPosition:
      base.use_pretrained = false;
      base.use_position = false;
      break;
    case AblationVariant::kNoAttention: base.attention = AttentionMode::kNone; break;
    case AblationVariant::kSingleHead:
      base.attention = AttentionMode::kSingle;
      base.heads = 1;
      break;
    case AblationVariant::kNoGcn: base.use_gcn = false; break;
  }
  return base;
}

// ------------------------------------------------------------ model

Model::Model(const ModelConfig& config, const Vocabulary& vocab, const EmbeddingTable& embeddings, std::uint64_t seed)
    : config_(config) {
  config_.validate();
  Rng rng(seed);
  if (config_.use_pretrained) {
    if (embeddings.dim != config_.d_w || embeddings.size() != vocab.size()) {
      throw ConfigError("embedding table is " + std::to_string(embeddings.size()) + "×" +
                        std::to_string(embeddings.dim) + ", model expects " + std::to_string(vocab.size()) + "×" +
                        std::to_string(config_.d_w));
    }
    word_table_ = Tensor(Shape{vocab.size(), config_.d_w}, embeddings.rows);
  } else {
    const EmbeddingTable random = random_embeddings(vocab, config_.d_w, rng.next());
    word_table_ = params_.add("embed.word", Tensor(Shape{vocab.size(), config_.d_w}, random.rows));
  }
  if (config_.use_position) {
    Tensor table(Shape{config_.position_rows(), config_.d_p});
    for (double& v : table.mutable_values()) v = rng.uniform(-0.25, 0.25);
    position_ = params_.add("embed.position", table);
  }

  const std::size_t d = config_.d_model();
  auto register_lstm = [&](const std::string& dir) {
    LstmParams p = init_lstm(config_.input_width(), config_.hidden, rng);
    p.w_x = params_.add("lstm." + dir + ".w_x", p.w_x);
    p.w_h = params_.add("lstm." + dir + ".w_h", p.w_h);
    p.b = params_.add("lstm." + dir + ".b", p.b);
    return p;
  };
  lstm_fwd_ = register_lstm("fwd");
  lstm_bwd_ = register_lstm("bwd");

  if (config_.attention != AttentionMode::kNone) {
    const bool multi = config_.attention == AttentionMode::kMulti;
    AttentionParams p = init_attention(d, multi ? config_.heads : 1, multi, rng);
    for (std::size_t i = 0; i < p.heads(); ++i) {
      const std::string prefix = "attn.head" + std::to_string(i);
      p.w_q[i] = params_.add(prefix + ".w_q", p.w_q[i]);
      p.w_k[i] = params_.add(prefix + ".w_k", p.w_k[i]);
      p.w_v[i] = params_.add(prefix + ".w_v", p.w_v[i]);
    }
    if (p.w_out) p.w_out = params_.add("attn.w_out", *p.w_out);
    attention_ = std::move(p);
  }

  if (config_.use_gcn) {
    for (std::size_t l = 0; l < config_.gcn_layers; ++l) {
      std::array<GcnParams, 3> layer;
      for (GraphKind kind : kGraphKinds) {
        const std::string prefix = "gcn.l" + std::to_string(l) + "." + std::string(to_string(kind));
        GcnParams& p = layer[kind_index(kind)];
        p.w = params_.add(prefix + ".w", xavier_uniform(d, d, rng));
        p.b = params_.add(prefix + ".b", Tensor(Shape{d}));
      }
      gcn_.push_back(std::move(layer));
    }
  }

  cls_w_ = params_.add("cls.w", xavier_uniform(config_.classifier_width(), config_.label_count, rng));
  cls_b_ = params_.add("cls.b", Tensor(Shape{config_.label_count}));
}

Tensor Model::forward_one(Tape& tape, const EncodedDocument& doc, const Example& example, ops::Mode mode,
                          Rng& dropout_rng) const {
  for (std::size_t id : doc.word_ids) {
    if (id >= word_table_.rows()) {
      throw Error("token id " + std::to_string(id) + " outside the vocabulary of " +
                  std::to_string(word_table_.rows()));
    }
  }
  Tensor omega = embed_sequence(tape, doc.word_ids, example.head_start, example.tail_start, word_table_, position_,
                                config_.max_dist);
  Tensor h = bilstm(tape, omega, lstm_fwd_, lstm_bwd_, doc.length);
  h = ops::dropout(tape, h, config_.dropout, mode, dropout_rng);

  std::vector<Tensor> pooled;
  Tensor context = attention_ ? multi_head_attention(tape, h, *attention_, doc.valid) : h;
  pooled.push_back(ops::max_pool_over_time(tape, context, doc.valid));

  if (config_.use_gcn) {
    std::array<Tensor, 3> adj;
    for (GraphKind kind : kGraphKinds) adj[kind_index(kind)] = doc.normalized_adjacency(kind);
    std::vector<Tensor> states(3, h);
    for (const auto& layer : gcn_) {
      std::vector<Tensor> next;
      for (std::size_t g = 0; g < 3; ++g) {
        next.push_back(gcn_propagate(tape, states[g], adj[g], layer[g], config_.gcn_activation));
      }
      states = inter_graph_mix(tape, next);
    }
    Tensor total = ops::add(tape, ops::add(tape, states[0], states[1]), states[2]);
    pooled.push_back(ops::max_pool_over_time(tape, ops::scale(tape, total, 1.0 / 3.0), doc.valid));
  }

  Tensor features = pooled.size() == 1 ? pooled[0] : ops::concat(tape, pooled, 0);
  features = ops::reshape(tape, features, {1, features.size()});
  return ops::add_bias(tape, ops::matmul(tape, features, cls_w_), cls_b_);
}

Tensor Model::forward(Tape& tape, const PreparedData& data, std::span<const std::size_t> examples, ops::Mode mode,
                      Rng& dropout_rng) const {
  if (examples.empty()) throw Error("forward: empty batch");
  std::vector<Tensor> rows;
  rows.reserve(examples.size());
  for (std::size_t index : examples) {
    const Example& ex = data.examples.at(index);
    rows.push_back(forward_one(tape, data.docs.at(ex.doc), ex, mode, dropout_rng));
  }
  return rows.size() == 1 ? rows[0] : ops::concat(tape, rows, 0);
}

Tensor Model::loss(Tape& tape, const PreparedData& data, std::span<const std::size_t> examples, ops::Mode mode,
                   Rng& dropout_rng) const {
  Tensor logits = forward(tape, data, examples, mode, dropout_rng);
  const auto targets = data.labels_of(examples);
  return ops::cross_entropy(tape, logits, targets);
}

std::vector<std::vector<double>> probabilities(const Tensor& logits) {
  std::vector<std::vector<double>> out;
  const std::size_t c = logits.cols();
  for (std::size_t r = 0; r < logits.rows(); ++r) out.push_back(ops::softmax_values(logits.values().subspan(r * c, c)));
  return out;
}

}  // namespace bioie
