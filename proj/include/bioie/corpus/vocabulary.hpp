#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "bioie/corpus/document.hpp"

namespace bioie {

// Token → id map with PAD = 0 and UNK = 1 reserved. Ids follow descending
// frequency, then lexicographic order, so equal multisets give equal maps.
class Vocabulary {
 public:
  static constexpr std::size_t kPad = 0;
  static constexpr std::size_t kUnk = 1;
  static constexpr std::string_view kPadToken = "<pad>";
  static constexpr std::string_view kUnkToken = "<unk>";

  Vocabulary();

  static Vocabulary build(std::span<const Document> docs, std::size_t min_count = 1);

  // Rebuilds a vocabulary from its id-ordered entries; the first two must be
  // the reserved tokens.
  static Vocabulary from_entries(std::span<const std::string> tokens, std::span<const std::size_t> counts);

  std::size_t size() const { return tokens_.size(); }
  std::size_t id(std::string_view token) const;  // kUnk when absent
  bool contains(std::string_view token) const;
  const std::string& token(std::size_t id) const { return tokens_.at(id); }
  std::size_t frequency(std::size_t id) const { return counts_.at(id); }

  // Ids for a document's tokens, padding mapped to kPad.
  std::vector<std::size_t> encode(const Document& doc) const;

  // One `token<TAB>count` line per id, reserved entries included.
  void save(const std::filesystem::path& path) const;
  static Vocabulary load(const std::filesystem::path& path);

  bool operator==(const Vocabulary& other) const { return tokens_ == other.tokens_; }

 private:
  void add(std::string token, std::size_t count);

  std::vector<std::string> tokens_;
  std::vector<std::size_t> counts_;
  std::unordered_map<std::string, std::size_t> ids_;
};

struct EmbeddingTable {
  std::size_t dim = 0;
  std::vector<double> rows;  // vocabulary size × dim, row-major
  std::size_t covered = 0;   // non-reserved rows copied from the vector file
  double coverage = 0.0;     // covered / non-reserved vocabulary entries

  std::size_t size() const { return dim == 0 ? 0 : rows.size() / dim; }
  std::span<const double> row(std::size_t id) const { return {rows.data() + id * dim, dim}; }
};

// Uniform(−0.25, 0.25) rows from the seed; the PAD row is zero.
EmbeddingTable random_embeddings(const Vocabulary& vocab, std::size_t dim, std::uint64_t seed);

// word2vec text format: header `count dim`, then `token v1 … v_dim` lines.
// Rows for vocabulary tokens found in the file are copied exactly; the rest
// are random as above. An empty file yields coverage 0. Throws FormatError
// when a line's width disagrees with the header or the requested dim.
EmbeddingTable load_pretrained_vectors(const std::filesystem::path& path, const Vocabulary& vocab,
                                       std::size_t dim, std::uint64_t seed);

}  // namespace bioie
