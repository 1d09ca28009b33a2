#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "bioie/layers/config.hpp"

namespace bioie::cli {

// Flat run configuration. Every field has a `key = value` spelling; see
// run_config_keys().
struct RunConfig {
  // data
  std::string dataset = "pathology";  // cdr | chemprot | pathology
  std::string input;                  // PubTator file, ChemProt abstracts, or pathology records
  std::string entities;               // ChemProt only
  std::string relations;              // ChemProt only
  std::string parses;                 // directory of <doc id>.conllu files
  std::string dependency_fallback = "none";  // none | linear, for documents without a parse
  std::string subtask = "all";        // pathology: all or one variable name
  std::string vectors;                // word2vec text file; random rows when empty
  std::size_t min_count = 1;
  std::size_t min_tokens = 50;
  std::size_t max_tokens = 150;
  double negative_ratio = 0.0;  // keep ratio·positives negatives; 0 keeps all

  ModelConfig model = default_model();

  double theta = 0.9;
  std::size_t window = 20;

  std::size_t epochs = 100;
  std::size_t batch_size = 16;
  std::size_t patience = 5;
  double lr = 1e-3;
  double dev_fraction = 0.1;
  std::size_t folds = 10;
  std::string freeze;  // comma-separated parameter prefixes
  std::string grid = "none";  // none | default
  std::string variant = "full";
  std::size_t bootstrap = 1000;

  std::string target_dataset;  // transfer; defaults to dataset
  std::string target_input;
  std::string source_name = "source";
  std::string target_name = "target";
  std::string checkpoint;

  std::string synth_shape = "cue";  // cue | tfah | tcga
  std::size_t synth_count = 100;

  std::uint64_t seed = 0;
  std::string output = "run";

  // label_count 0 means "take it from the dataset".
  static ModelConfig default_model() {
    ModelConfig m;
    m.label_count = 0;
    return m;
  }

  std::vector<std::string> freeze_prefixes() const;
  bool operator==(const RunConfig& other) const;
};

std::span<const std::string> run_config_keys();

// Throws ConfigError naming the nearest known key.
void set_field(RunConfig& config, std::string_view key, std::string_view value);
std::string get_field(const RunConfig& config, std::string_view key);

std::string nearest_key(std::string_view key);
std::size_t edit_distance(std::string_view a, std::string_view b);

// `key = value` lines; `#` starts a comment; blank lines are ignored.
std::map<std::string, std::string> parse_config_text(std::string_view text);

// defaults, then BIOIE_SEED (when set), then the file, then the flags.
RunConfig resolve_config(const std::optional<std::filesystem::path>& path,
                         const std::map<std::string, std::string>& flags, const char* env_seed = nullptr);

std::string to_text(const RunConfig& config);
void write_config(const std::filesystem::path& path, const RunConfig& config);

}  // namespace bioie::cli
