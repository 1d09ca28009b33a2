#pragma once

#include <array>
#include <cstddef>
#include <functional>
#include <map>
#include <ostream>
#include <span>
#include <string_view>
#include <utility>
#include <vector>

#include "bioie/corpus/document.hpp"
#include "bioie/corpus/vocabulary.hpp"

namespace bioie {

enum class GraphKind { kSemantic, kSyntactic, kSequence };

inline constexpr std::array<GraphKind, 3> kGraphKinds = {GraphKind::kSemantic, GraphKind::kSyntactic,
                                                         GraphKind::kSequence};

std::string_view to_string(GraphKind kind);

struct PairStat {
  double count = 0.0;   // co-relation occurrences
  double weight = 0.0;  // final edge weight
};

// Unordered word-id pairs, keyed with the smaller id first. Pairs (a, a) are
// never stored.
class WordPairStats {
 public:
  using Key = std::pair<std::size_t, std::size_t>;

  static Key key(std::size_t a, std::size_t b) { return a < b ? Key{a, b} : Key{b, a}; }

  void set(std::size_t a, std::size_t b, PairStat stat);
  const PairStat* find(std::size_t a, std::size_t b) const;
  double weight(std::size_t a, std::size_t b) const;  // 0 when absent

  std::size_t size() const { return pairs_.size(); }
  bool empty() const { return pairs_.empty(); }
  const std::map<Key, PairStat>& pairs() const { return pairs_; }

  double total = 0.0;           // documents, or windows for the sequence graph
  std::size_t zero_norm_words = 0;  // semantic only: word types skipped for a zero vector

 private:
  std::map<Key, PairStat> pairs_;
};

// Per-token feature rows of one document (token count × dim, row-major).
using TokenFeatureFn = std::function<std::vector<double>(const Document& doc, std::size_t doc_index)>;

// Word types are vocabulary ids; PAD and UNK tokens never form edges.

// Cosine similarity ≥ theta between the (per-document mean) feature vectors
// of two word types in one document counts once for that document. Weight is
// count / documents holding both words.
WordPairStats build_semantic_graph(std::span<const Document> docs, const Vocabulary& vocab, std::size_t dim,
                                   const TokenFeatureFn& features, double theta);
WordPairStats build_semantic_graph(std::span<const Document> docs, const Vocabulary& vocab,
                                   const EmbeddingTable& embeddings, double theta);

// Every dependency edge counts its word-type pair; weight is count /
// documents holding both words.
WordPairStats build_syntactic_graph(std::span<const Document> docs, const Vocabulary& vocab);

// Positive PMI over sliding windows of width `window`. A sequence no longer
// than the window is one window.
WordPairStats build_sequence_graph(std::span<const Document> docs, const Vocabulary& vocab, std::size_t window);

struct GraphConfig {
  double theta = 0.9;
  std::size_t window = 20;
};

struct CorpusGraphs {
  WordPairStats semantic;
  WordPairStats syntactic;
  WordPairStats sequence;
  GraphConfig config;

  const WordPairStats& operator[](GraphKind kind) const;
};

CorpusGraphs build_corpus_graphs(std::span<const Document> docs, const Vocabulary& vocab,
                                 const EmbeddingTable& embeddings, GraphConfig config = {});

struct Adjacency {
  std::size_t n = 0;
  std::vector<double> a;       // n × n, row-major
  std::vector<double> degree;  // row sums

  double at(std::size_t i, std::size_t j) const { return a[i * n + j]; }
  std::vector<double> row_normalized() const;  // D⁻¹A
};

struct DocumentAdjacency {
  std::array<Adjacency, 3> graphs;

  const Adjacency& operator[](GraphKind kind) const { return graphs[static_cast<std::size_t>(kind)]; }
};

// A_ij is the corpus weight of the word types of tokens i and j, the
// diagonal is 1, and PAD tokens keep only their self-loop.
DocumentAdjacency project_adjacency(const Document& doc, const Vocabulary& vocab, const CorpusGraphs& graphs);

// `kind<TAB>word_a<TAB>word_b<TAB>weight` lines, sorted.
void write_graph_dump(std::ostream& out, const CorpusGraphs& graphs, const Vocabulary& vocab);

}  // namespace bioie
