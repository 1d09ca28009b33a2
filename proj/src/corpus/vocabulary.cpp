#include "bioie/corpus/vocabulary.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <map>
#include <sstream>

#include "bioie/autodiff/rng.hpp"
#include "bioie/error.hpp"

namespace bioie {

Vocabulary::Vocabulary() {
  add(std::string(kPadToken), 0);
  add(std::string(kUnkToken), 0);
}

void Vocabulary::add(std::string token, std::size_t count) {
  ids_.emplace(token, tokens_.size());
  tokens_.push_back(std::move(token));
  counts_.push_back(count);
}

Vocabulary Vocabulary::build(std::span<const Document> docs, std::size_t min_count) {
  if (min_count < 1) throw Error("build_vocabulary: min_count must be at least 1");
  std::map<std::string, std::size_t> freq;
  for (const auto& doc : docs) {
    for (const auto& t : doc.tokens) {
      if (!t.pad) ++freq[t.surface];
    }
  }
  std::vector<std::pair<std::string, std::size_t>> entries(freq.begin(), freq.end());
  std::stable_sort(entries.begin(), entries.end(),
                   [](const auto& a, const auto& b) { return a.second > b.second; });
  Vocabulary vocab;
  for (auto& [token, count] : entries) {
    if (count < min_count) continue;
    if (token == kPadToken || token == kUnkToken) continue;
    vocab.add(std::move(token), count);
  }
  return vocab;
}

std::size_t Vocabulary::id(std::string_view token) const {
  auto it = ids_.find(std::string(token));
  return it == ids_.end() ? kUnk : it->second;
}

bool Vocabulary::contains(std::string_view token) const { return ids_.count(std::string(token)) > 0; }

std::vector<std::size_t> Vocabulary::encode(const Document& doc) const {
  std::vector<std::size_t> ids;
  ids.reserve(doc.tokens.size());
  for (const auto& t : doc.tokens) ids.push_back(t.pad ? kPad : id(t.surface));
  return ids;
}

void Vocabulary::save(const std::filesystem::path& path) const {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  for (std::size_t i = 0; i < tokens_.size(); ++i) out << tokens_[i] << '\t' << counts_[i] << '\n';
}

Vocabulary Vocabulary::from_entries(std::span<const std::string> tokens, std::span<const std::size_t> counts) {
  if (tokens.size() != counts.size()) throw Error("vocabulary: token and count lists differ in length");
  if (tokens.size() < 2 || tokens[kPad] != kPadToken || tokens[kUnk] != kUnkToken) {
    throw FormatError("vocabulary must start with the reserved PAD and UNK entries");
  }
  Vocabulary vocab;
  vocab.tokens_.clear();
  vocab.counts_.clear();
  vocab.ids_.clear();
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (vocab.ids_.count(tokens[i])) throw FormatError("vocabulary repeats token '" + tokens[i] + "'");
    vocab.add(tokens[i], counts[i]);
  }
  return vocab;
}

Vocabulary Vocabulary::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path.string());
  std::vector<std::string> tokens;
  std::vector<std::size_t> counts;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto tab = line.rfind('\t');
    if (tab == std::string::npos) throw FormatError("vocabulary line needs token and count", line_no);
    tokens.push_back(line.substr(0, tab));
    counts.push_back(std::stoull(line.substr(tab + 1)));
  }
  return from_entries(tokens, counts);
}

EmbeddingTable random_embeddings(const Vocabulary& vocab, std::size_t dim, std::uint64_t seed) {
  if (dim == 0) throw Error("embedding dimension must be positive");
  EmbeddingTable table;
  table.dim = dim;
  table.rows.resize(vocab.size() * dim);
  Rng rng(seed);
  for (std::size_t i = 0; i < table.rows.size(); ++i) table.rows[i] = rng.uniform(-0.25, 0.25);
  std::fill_n(table.rows.begin() + Vocabulary::kPad * dim, dim, 0.0);
  return table;
}

EmbeddingTable load_pretrained_vectors(const std::filesystem::path& path, const Vocabulary& vocab,
                                       std::size_t dim, std::uint64_t seed) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path.string());
  EmbeddingTable table = random_embeddings(vocab, dim, seed);
  std::string line;
  std::size_t line_no = 0;
  std::vector<char> seen(vocab.size(), 0);
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::istringstream ss(line);
    if (line_no == 1) {
      std::size_t count = 0, file_dim = 0;
      if (!(ss >> count >> file_dim)) throw FormatError("vector header must be `count dim`", line_no);
      if (file_dim != dim) {
        throw FormatError("vector file has dim " + std::to_string(file_dim) + ", expected " +
                              std::to_string(dim),
                          line_no);
      }
      continue;
    }
    std::string token;
    ss >> token;
    std::vector<double> values;
    std::string field;
    while (ss >> field) {
      double v = 0.0;
      auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
      if (ec != std::errc() || ptr != field.data() + field.size()) {
        throw FormatError("bad vector component '" + field + "'", line_no);
      }
      values.push_back(v);
    }
    if (values.size() != dim) {
      throw FormatError("vector for '" + token + "' has " + std::to_string(values.size()) +
                            " components, expected " + std::to_string(dim),
                        line_no);
    }
    if (!vocab.contains(token)) continue;
    const std::size_t id = vocab.id(token);
    if (id == Vocabulary::kPad || id == Vocabulary::kUnk) continue;
    std::copy(values.begin(), values.end(), table.rows.begin() + id * dim);
    if (!seen[id]) {
      seen[id] = 1;
      ++table.covered;
    }
  }
  const std::size_t regular = vocab.size() - 2;
  table.coverage = regular == 0 ? 0.0 : static_cast<double>(table.covered) / static_cast<double>(regular);
  return table;
}

}  // namespace bioie
