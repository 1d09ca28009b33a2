#include "bioie/textgraph/graphs.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <sstream>
#include <string>
#include <unordered_map>

#include "bioie/error.hpp"
#include "bioie/log.hpp"

namespace bioie {

namespace {

struct KeyHash {
  std::size_t operator()(const WordPairStats::Key& k) const {
    return std::hash<std::size_t>()(k.first * 0x9E3779B97F4A7C15ULL ^ k.second);
  }
};

using PairCounts = std::unordered_map<WordPairStats::Key, double, KeyHash>;

bool is_word(std::size_t id) { return id != Vocabulary::kPad && id != Vocabulary::kUnk; }

std::vector<std::size_t> content_ids(const Document& doc, const Vocabulary& vocab) {
  std::vector<std::size_t> ids;
  for (const auto& t : doc.tokens) {
    if (!t.pad) ids.push_back(vocab.id(t.surface));
  }
  return ids;
}

std::vector<std::size_t> distinct_words(std::vector<std::size_t> ids) {
  std::sort(ids.begin(), ids.end());
  ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
  ids.erase(std::remove_if(ids.begin(), ids.end(), [](std::size_t id) { return !is_word(id); }), ids.end());
  return ids;
}

// Documents holding both words, for every key of `counts`.
PairCounts cooccurring_documents(std::span<const Document> docs, const Vocabulary& vocab,
                                 const PairCounts& counts) {
  PairCounts docs_with;
  for (const auto& doc : docs) {
    const auto words = distinct_words(content_ids(doc, vocab));
    for (std::size_t x = 0; x < words.size(); ++x) {
      for (std::size_t y = x + 1; y < words.size(); ++y) {
        const auto k = WordPairStats::key(words[x], words[y]);
        if (counts.count(k)) docs_with[k] += 1.0;
      }
    }
  }
  return docs_with;
}

}  // namespace

std::string_view to_string(GraphKind kind) {
  switch (kind) {
    case GraphKind::kSemantic: return "semantic";
    case GraphKind::kSyntactic: return "syntactic";
    case GraphKind::kSequence: return "sequence";
  }
  return "?";
}

void WordPairStats::set(std::size_t a, std::size_t b, PairStat stat) {
  if (a == b) throw Error("word pair graphs exclude self pairs");
  pairs_[key(a, b)] = stat;
}

const PairStat* WordPairStats::find(std::size_t a, std::size_t b) const {
  auto it = pairs_.find(key(a, b));
  return it == pairs_.end() ? nullptr : &it->second;
}

double WordPairStats::weight(std::size_t a, std::size_t b) const {
  const PairStat* s = find(a, b);
  return s ? s->weight : 0.0;
}

WordPairStats build_semantic_graph(std::span<const Document> docs, const Vocabulary& vocab, std::size_t dim,
                                   const TokenFeatureFn& features, double theta) {
  if (!(theta > 0.0 && theta < 1.0)) throw ConfigError("semantic threshold must lie in (0, 1)");
  if (dim == 0) throw Error("semantic graph: feature dimension must be positive");
  WordPairStats out;
  out.total = static_cast<double>(docs.size());
  PairCounts counts, together;
  std::vector<char> zero_norm(vocab.size(), 0);

  for (std::size_t d = 0; d < docs.size(); ++d) {
    const Document& doc = docs[d];
    const std::vector<double> rows = features(doc, d);
    if (rows.size() != doc.tokens.size() * dim) {
      throw DimensionError("semantic graph: feature rows for " + doc.id + " do not match its tokens");
    }
    // Mean feature vector per word type in this document.
    std::map<std::size_t, std::pair<std::vector<double>, double>> mean;
    for (std::size_t i = 0; i < doc.tokens.size(); ++i) {
      if (doc.tokens[i].pad) continue;
      const std::size_t id = vocab.id(doc.tokens[i].surface);
      if (!is_word(id)) continue;
      auto& [sum, n] = mean[id];
      sum.resize(dim, 0.0);
      for (std::size_t c = 0; c < dim; ++c) sum[c] += rows[i * dim + c];
      n += 1.0;
    }
    std::vector<std::size_t> ids;
    std::vector<std::vector<double>> unit;
    for (auto& [id, acc] : mean) {
      double norm = 0.0;
      for (double& v : acc.first) {
        v /= acc.second;
        norm += v * v;
      }
      norm = std::sqrt(norm);
      if (norm == 0.0) {
        zero_norm[id] = 1;
        unit.emplace_back();
      } else {
        for (double& v : acc.first) v /= norm;
        unit.push_back(std::move(acc.first));
      }
      ids.push_back(id);
    }
    for (std::size_t x = 0; x < ids.size(); ++x) {
      for (std::size_t y = x + 1; y < ids.size(); ++y) {
        const auto k = WordPairStats::key(ids[x], ids[y]);
        together[k] += 1.0;
        if (unit[x].empty() || unit[y].empty()) continue;
        double cosine = 0.0;
        for (std::size_t c = 0; c < dim; ++c) cosine += unit[x][c] * unit[y][c];
        if (cosine >= theta) counts[k] += 1.0;
      }
    }
  }
  for (const auto& [k, c] : counts) out.set(k.first, k.second, {c, c / together.at(k)});
  out.zero_norm_words = static_cast<std::size_t>(std::count(zero_norm.begin(), zero_norm.end(), 1));
  if (out.zero_norm_words > 0) {
    warn("semantic graph: " + std::to_string(out.zero_norm_words) + " word type(s) with a zero feature vector form no edges");
  }
  return out;
}

WordPairStats build_semantic_graph(std::span<const Document> docs, const Vocabulary& vocab,
                                   const EmbeddingTable& embeddings, double theta) {
  if (embeddings.size() != vocab.size()) throw DimensionError("embedding rows do not match the vocabulary");
  const std::size_t dim = embeddings.dim;
  auto rows = [&](const Document& doc, std::size_t) {
    std::vector<double> out(doc.tokens.size() * dim, 0.0);
    for (std::size_t i = 0; i < doc.tokens.size(); ++i) {
      if (doc.tokens[i].pad) continue;
      auto r = embeddings.row(vocab.id(doc.tokens[i].surface));
      std::copy(r.begin(), r.end(), out.begin() + i * dim);
    }
    return out;
  };
  return build_semantic_graph(docs, vocab, dim, rows, theta);
}

WordPairStats build_syntactic_graph(std::span<const Document> docs, const Vocabulary& vocab) {
  WordPairStats out;
  out.total = static_cast<double>(docs.size());
  PairCounts counts;
  for (const auto& doc : docs) {
    for (const auto& e : doc.dep_edges) {
      if (e.child >= doc.tokens.size() || e.head >= doc.tokens.size()) {
        throw Error("dependency edge outside document " + doc.id);
      }
      const std::size_t a = vocab.id(doc.tokens[e.child].surface);
      const std::size_t b = vocab.id(doc.tokens[e.head].surface);
      if (!is_word(a) || !is_word(b) || a == b) continue;
      counts[WordPairStats::key(a, b)] += 1.0;
    }
  }
  const PairCounts together = cooccurring_documents(docs, vocab, counts);
  for (const auto& [k, c] : counts) out.set(k.first, k.second, {c, c / together.at(k)});
  return out;
}

WordPairStats build_sequence_graph(std::span<const Document> docs, const Vocabulary& vocab, std::size_t window) {
  if (window < 2) throw ConfigError("sequence window must be at least 2");
  WordPairStats out;
  std::unordered_map<std::size_t, double> word_windows;
  PairCounts pair_windows;
  double windows = 0.0;
  for (const auto& doc : docs) {
    const auto ids = content_ids(doc, vocab);
    if (ids.empty()) continue;
    const std::size_t starts = ids.size() <= window ? 1 : ids.size() - window + 1;
    const std::size_t width = std::min(window, ids.size());
    for (std::size_t s = 0; s < starts; ++s) {
      const auto words = distinct_words({ids.begin() + s, ids.begin() + s + width});
      windows += 1.0;
      for (std::size_t x = 0; x < words.size(); ++x) {
        word_windows[words[x]] += 1.0;
        for (std::size_t y = x + 1; y < words.size(); ++y) pair_windows[WordPairStats::key(words[x], words[y])] += 1.0;
      }
    }
  }
  out.total = windows;
  for (const auto& [k, c] : pair_windows) {
    const double p_ij = c / windows;
    const double p_i = word_windows.at(k.first) / windows;
    const double p_j = word_windows.at(k.second) / windows;
    out.set(k.first, k.second, {c, std::max(0.0, std::log(p_ij / (p_i * p_j)))});
  }
  return out;
}

const WordPairStats& CorpusGraphs::operator[](GraphKind kind) const {
  switch (kind) {
    case GraphKind::kSemantic: return semantic;
    case GraphKind::kSyntactic: return syntactic;
    case GraphKind::kSequence: return sequence;
  }
  return sequence;
}

CorpusGraphs build_corpus_graphs(std::span<const Document> docs, const Vocabulary& vocab,
                                 const EmbeddingTable& embeddings, GraphConfig config) {
  CorpusGraphs g;
  g.config = config;
  g.semantic = build_semantic_graph(docs, vocab, embeddings, config.theta);
  g.syntactic = build_syntactic_graph(docs, vocab);
  g.sequence = build_sequence_graph(docs, vocab, config.window);
  return g;
}

std::vector<double> Adjacency::row_normalized() const {
  std::vector<double> out(a.size());
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) out[i * n + j] = a[i * n + j] / degree[i];
  }
  return out;
}

DocumentAdjacency project_adjacency(const Document& doc, const Vocabulary& vocab, const CorpusGraphs& graphs) {
  const std::size_t n = doc.tokens.size();
  std::vector<std::size_t> ids(n);
  for (std::size_t i = 0; i < n; ++i) ids[i] = doc.tokens[i].pad ? Vocabulary::kPad : vocab.id(doc.tokens[i].surface);
  DocumentAdjacency out;
  for (GraphKind kind : kGraphKinds) {
    const WordPairStats& stats = graphs[kind];
    Adjacency& adj = out.graphs[static_cast<std::size_t>(kind)];
    adj.n = n;
    adj.a.assign(n * n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      adj.a[i * n + i] = 1.0;
      if (!is_word(ids[i])) continue;
      for (std::size_t j = i + 1; j < n; ++j) {
        if (!is_word(ids[j]) || ids[i] == ids[j]) continue;
        const double w = stats.weight(ids[i], ids[j]);
        adj.a[i * n + j] = w;
        adj.a[j * n + i] = w;
      }
    }
    adj.degree.assign(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) adj.degree[i] += adj.a[i * n + j];
    }
  }
  return out;
}

void write_graph_dump(std::ostream& out, const CorpusGraphs& graphs, const Vocabulary& vocab) {
  std::vector<std::string> lines;
  for (GraphKind kind : kGraphKinds) {
    for (const auto& [k, stat] : graphs[kind].pairs()) {
      std::string a = vocab.token(k.first), b = vocab.token(k.second);
      if (b < a) std::swap(a, b);
      std::ostringstream line;
      line << to_string(kind) << '\t' << a << '\t' << b << '\t' << std::setprecision(17) << stat.weight;
      lines.push_back(line.str());
    }
  }
  std::sort(lines.begin(), lines.end());
  for (const auto& l : lines) out << l << '\n';
}

}  // namespace bioie
