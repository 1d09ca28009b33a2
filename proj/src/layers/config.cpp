#include "bioie/layers/config.hpp"

#include <array>
#include <charconv>
#include <string>

#include "bioie/error.hpp"

namespace bioie {

std::string_view to_string(AttentionMode mode) {
  switch (mode) {
    case AttentionMode::kNone: return "none";
    case AttentionMode::kSingle: return "single";
    case AttentionMode::kMulti: return "multi";
  }
  return "?";
}

std::optional<AttentionMode> parse_attention_mode(std::string_view name) {
  if (name == "none") return AttentionMode::kNone;
  if (name == "single") return AttentionMode::kSingle;
  if (name == "multi") return AttentionMode::kMulti;
  return std::nullopt;
}

std::string_view to_string(ops::Activation activation) {
  switch (activation) {
    case ops::Activation::kTanh: return "tanh";
    case ops::Activation::kSigmoid: return "sigmoid";
    case ops::Activation::kIdentity: return "identity";
  }
  return "?";
}

std::optional<ops::Activation> parse_activation(std::string_view name) {
  if (name == "tanh") return ops::Activation::kTanh;
  if (name == "sigmoid") return ops::Activation::kSigmoid;
  if (name == "identity") return ops::Activation::kIdentity;
  return std::nullopt;
}

namespace {

constexpr std::array<std::string_view, 13> kKeys{
    "d_w",     "d_p",          "max_dist",       "hidden",       "heads",     "gcn_layers", "label_count",
    "dropout", "gcn_activation", "use_pretrained", "use_position", "attention", "use_gcn"};

std::size_t parse_size(std::string_view key, std::string_view text) {
  std::size_t v = 0;
  auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc{} || end != text.data() + text.size()) {
    throw ConfigError(std::string(key) + ": expected a non-negative integer, got '" + std::string(text) + "'");
  }
  return v;
}

double parse_double(std::string_view key, std::string_view text) {
  double v = 0;
  auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc{} || end != text.data() + text.size()) {
    throw ConfigError(std::string(key) + ": expected a number, got '" + std::string(text) + "'");
  }
  return v;
}

bool parse_bool(std::string_view key, std::string_view text) {
  if (text == "true" || text == "1") return true;
  if (text == "false" || text == "0") return false;
  throw ConfigError(std::string(key) + ": expected true or false, got '" + std::string(text) + "'");
}

std::string format_double(double v) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, end);
}

}  // namespace

std::span<const std::string_view> model_config_keys() { return kKeys; }

bool set_model_field(ModelConfig& c, std::string_view key, std::string_view value) {
  if (key == "d_w") c.d_w = parse_size(key, value);
  else if (key == "d_p") c.d_p = parse_size(key, value);
  else if (key == "max_dist") c.max_dist = parse_size(key, value);
  else if (key == "hidden") c.hidden = parse_size(key, value);
  else if (key == "heads") c.heads = parse_size(key, value);
  else if (key == "gcn_layers") c.gcn_layers = parse_size(key, value);
  else if (key == "label_count") c.label_count = parse_size(key, value);
  else if (key == "dropout") c.dropout = parse_double(key, value);
  else if (key == "gcn_activation") {
    auto a = parse_activation(value);
    if (!a) throw ConfigError("gcn_activation: expected tanh, sigmoid or identity, got '" + std::string(value) + "'");
    c.gcn_activation = *a;
  } else if (key == "use_pretrained") c.use_pretrained = parse_bool(key, value);
  else if (key == "use_position") c.use_position = parse_bool(key, value);
  else if (key == "attention") {
    auto a = parse_attention_mode(value);
    if (!a) throw ConfigError("attention: expected none, single or multi, got '" + std::string(value) + "'");
    c.attention = *a;
  } else if (key == "use_gcn") c.use_gcn = parse_bool(key, value);
  else return false;
  return true;
}

std::string model_field(const ModelConfig& c, std::string_view key) {
  auto b = [](bool v) { return std::string(v ? "true" : "false"); };
  if (key == "d_w") return std::to_string(c.d_w);
  if (key == "d_p") return std::to_string(c.d_p);
  if (key == "max_dist") return std::to_string(c.max_dist);
  if (key == "hidden") return std::to_string(c.hidden);
  if (key == "heads") return std::to_string(c.heads);
  if (key == "gcn_layers") return std::to_string(c.gcn_layers);
  if (key == "label_count") return std::to_string(c.label_count);
  if (key == "dropout") return format_double(c.dropout);
  if (key == "gcn_activation") return std::string(to_string(c.gcn_activation));
  if (key == "use_pretrained") return b(c.use_pretrained);
  if (key == "use_position") return b(c.use_position);
  if (key == "attention") return std::string(to_string(c.attention));
  if (key == "use_gcn") return b(c.use_gcn);
  throw ConfigError("unknown model field " + std::string(key));
}

std::string to_text(const ModelConfig& config) {
  std::string out;
  for (auto key : kKeys) {
    out.append(key).append(" = ").append(model_field(config, key)).append("\n");
  }
  return out;
}

void ModelConfig::validate() const {
  auto positive = [](std::size_t v, const char* name) {
    if (v == 0) throw ConfigError(std::string(name) + " must be positive");
  };
  positive(d_w, "d_w");
  if (use_position) positive(d_p, "d_p");
  positive(hidden, "hidden");
  positive(heads, "heads");
  positive(label_count, "label_count");
  if (label_count < 2) throw ConfigError("label_count must be at least 2");
  if (use_gcn && gcn_layers < 1) throw ConfigError("gcn_layers must be at least 1");
  if (attention == AttentionMode::kMulti && d_model() % heads != 0) {
    throw ConfigError("2·hidden = " + std::to_string(d_model()) + " is not divisible by heads = " +
                      std::to_string(heads));
  }
  if (!(dropout >= 0.0 && dropout < 1.0)) throw ConfigError("dropout must lie in [0, 1)");
}

}  // namespace bioie
