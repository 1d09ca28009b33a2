#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "bioie/autodiff/adam.hpp"
#include "bioie/autodiff/rng.hpp"
#include "bioie/corpus/document.hpp"
#include "bioie/corpus/vocabulary.hpp"
#include "bioie/error.hpp"
#include "bioie/layers/config.hpp"
#include "bioie/pipeline/model.hpp"

namespace bioie {

enum class CheckpointErrorKind { kIo, kBadMagic, kVersionMismatch, kDigestMismatch, kTruncated, kCorrupt };

std::string_view to_string(CheckpointErrorKind kind);

class CheckpointError : public Error {
 public:
  CheckpointError(CheckpointErrorKind kind, const std::string& what) : Error(what), kind_(kind) {}
  CheckpointErrorKind kind() const { return kind_; }

 private:
  CheckpointErrorKind kind_;
};

inline constexpr std::uint32_t kCheckpointVersion = 1;

// 64-bit FNV-1a.
std::uint64_t fnv1a64(std::string_view bytes);
std::uint64_t config_digest(const ModelConfig& config);

struct TensorBlock {
  std::string name;
  Shape shape;
  bool frozen = false;
  std::vector<double> values;

  bool operator==(const TensorBlock&) const = default;
};

struct OptimizerBlock {
  AdamState state;
  std::vector<std::string> names;  // parameter name per moment pair
};

// Everything needed to rebuild a model and resume its training.
//
// Layout on disk, all integers and floats little-endian:
//   "BIOIE" u32 version u64 digest
//   string config_text
//   u32 n, n × block                      parameters in registry order
//   block                                 word table
//   u32 n, n × string                     labels
//   u64 n, n × (string, u64)              vocabulary
//   u8 has_optimizer [u64 t, 4 × f64, u32 n, n × (string, u64 size, m, v)]
//   u8 has_rng [string]
//   u64 epoch
// with string = u64 length + bytes and block = string name, u8 frozen,
// u32 rank, rank × u64 extent, extent-product × f64.
struct Checkpoint {
  std::string config_text;
  std::uint64_t digest = 0;
  std::vector<TensorBlock> parameters;
  TensorBlock word_table;
  std::vector<std::string> labels;
  std::vector<std::string> vocab_tokens;
  std::vector<std::size_t> vocab_counts;
  std::optional<OptimizerBlock> optimizer;
  std::optional<std::string> rng_state;
  std::uint64_t epoch = 0;

  ModelConfig config() const;
  Vocabulary vocabulary() const;
  EmbeddingTable embeddings() const;  // the stored word table
  LabelSet label_set() const;
};

Checkpoint capture_checkpoint(const Model& model, const Vocabulary& vocab, const LabelSet& labels,
                              const Adam* optimizer = nullptr, const Rng* rng = nullptr, std::uint64_t epoch = 0);

void write_checkpoint(std::ostream& out, const Checkpoint& checkpoint);
Checkpoint read_checkpoint(std::istream& in);
void save_checkpoint(const std::filesystem::path& path, const Checkpoint& checkpoint);
Checkpoint load_checkpoint(const std::filesystem::path& path);

// Copies stored values into a model built from the same config, and into the
// optimizer and rng when given. Everything is validated before anything is
// written, so a failed restore leaves the targets untouched.
void restore_checkpoint(const Checkpoint& checkpoint, Model& model, Adam* optimizer = nullptr, Rng* rng = nullptr);

// A fresh model carrying the checkpoint's parameters.
Model model_from_checkpoint(const Checkpoint& checkpoint);

// Registry names of the optimizer's parameters, in optimizer order.
std::vector<std::string> optimizer_parameter_names(const Model& model, const Adam& optimizer);

}  // namespace bioie
