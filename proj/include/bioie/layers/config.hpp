#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>

#include "bioie/autodiff/ops.hpp"

namespace bioie {

enum class AttentionMode { kNone, kSingle, kMulti };

std::string_view to_string(AttentionMode mode);
std::optional<AttentionMode> parse_attention_mode(std::string_view name);

std::string_view to_string(ops::Activation activation);
std::optional<ops::Activation> parse_activation(std::string_view name);

struct ModelConfig {
  std::size_t d_w = 100;        // word vector width
  std::size_t d_p = 20;         // position vector width
  std::size_t max_dist = 60;    // relative distances clip to ±max_dist
  std::size_t hidden = 128;     // LSTM units per direction
  std::size_t heads = 8;
  std::size_t gcn_layers = 2;
  std::size_t label_count = 2;
  double dropout = 0.5;         // on the Bi-LSTM output
  ops::Activation gcn_activation = ops::Activation::kTanh;

  bool use_pretrained = true;
  bool use_position = true;
  AttentionMode attention = AttentionMode::kMulti;
  bool use_gcn = true;

  std::size_t d_model() const { return 2 * hidden; }
  std::size_t input_width() const { return d_w + (use_position ? 2 * d_p : 0); }
  std::size_t head_width() const { return d_model() / heads; }
  std::size_t position_rows() const { return 2 * max_dist + 1; }
  std::size_t classifier_width() const { return use_gcn ? 2 * d_model() : d_model(); }

  // Throws ConfigError naming the broken invariant.
  void validate() const;
};

// Field names in declaration order.
std::span<const std::string_view> model_config_keys();

// Sets one field from its text form. Returns false for an unknown key and
// throws ConfigError for a malformed value.
bool set_model_field(ModelConfig& config, std::string_view key, std::string_view value);
std::string model_field(const ModelConfig& config, std::string_view key);

// Canonical `key = value` lines; equal configs give equal text.
std::string to_text(const ModelConfig& config);

}  // namespace bioie
