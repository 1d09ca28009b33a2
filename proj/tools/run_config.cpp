#include "run_config.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <functional>
#include <sstream>

#include "bioie/error.hpp"

namespace bioie::cli {

namespace {

struct Field {
  std::string key;
  std::function<void(RunConfig&, std::string_view)> set;
  std::function<std::string(const RunConfig&)> get;
};

template <typename T>
T parse_number(std::string_view key, std::string_view text) {
  T v{};
  auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc{} || end != text.data() + text.size()) {
    throw ConfigError(std::string(key) + ": cannot parse '" + std::string(text) + "'");
  }
  return v;
}

std::string format(double v) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, end);
}

Field text_field(std::string key, std::string RunConfig::*member) {
  return {key, [member](RunConfig& c, std::string_view v) { c.*member = std::string(v); },
          [member](const RunConfig& c) { return c.*member; }};
}

Field size_field(std::string key, std::size_t RunConfig::*member) {
  return {key, [key, member](RunConfig& c, std::string_view v) { c.*member = parse_number<std::size_t>(key, v); },
          [member](const RunConfig& c) { return std::to_string(c.*member); }};
}

Field real_field(std::string key, double RunConfig::*member) {
  return {key, [key, member](RunConfig& c, std::string_view v) { c.*member = parse_number<double>(key, v); },
          [member](const RunConfig& c) { return format(c.*member); }};
}

Field choice_field(std::string key, std::string RunConfig::*member, std::vector<std::string> choices) {
  return {key,
          [key, member, choices](RunConfig& c, std::string_view v) {
            if (std::find(choices.begin(), choices.end(), v) == choices.end()) {
              std::string list;
              for (const auto& ch : choices) list += (list.empty() ? "" : ", ") + ch;
              throw ConfigError(key + ": '" + std::string(v) + "' is not one of " + list);
            }
            c.*member = std::string(v);
          },
          [member](const RunConfig& c) { return c.*member; }};
}

const std::vector<Field>& fields() {
  static const std::vector<Field> table = [] {
    std::vector<Field> f;
    f.push_back(choice_field("dataset", &RunConfig::dataset, {"cdr", "chemprot", "pathology"}));
    f.push_back(text_field("input", &RunConfig::input));
    f.push_back(text_field("entities", &RunConfig::entities));
    f.push_back(text_field("relations", &RunConfig::relations));
    f.push_back(text_field("parses", &RunConfig::parses));
    f.push_back(choice_field("dependency_fallback", &RunConfig::dependency_fallback, {"none", "linear"}));
    f.push_back(text_field("subtask", &RunConfig::subtask));
    f.push_back(text_field("vectors", &RunConfig::vectors));
    f.push_back(size_field("min_count", &RunConfig::min_count));
    f.push_back(size_field("min_tokens", &RunConfig::min_tokens));
    f.push_back(size_field("max_tokens", &RunConfig::max_tokens));
    f.push_back(real_field("negative_ratio", &RunConfig::negative_ratio));
    for (auto key : model_config_keys()) {
      std::string k(key);
      f.push_back({k,
                   [k](RunConfig& c, std::string_view v) {
                     if (!set_model_field(c.model, k, v)) throw ConfigError("unknown model key " + k);
                   },
                   [k](const RunConfig& c) { return model_field(c.model, k); }});
    }
    f.push_back(real_field("theta", &RunConfig::theta));
    f.push_back(size_field("window", &RunConfig::window));
    f.push_back(size_field("epochs", &RunConfig::epochs));
    f.push_back(size_field("batch_size", &RunConfig::batch_size));
    f.push_back(size_field("patience", &RunConfig::patience));
    f.push_back(real_field("lr", &RunConfig::lr));
    f.push_back(real_field("dev_fraction", &RunConfig::dev_fraction));
    f.push_back(size_field("folds", &RunConfig::folds));
    f.push_back(text_field("freeze", &RunConfig::freeze));
    f.push_back(choice_field("grid", &RunConfig::grid, {"none", "default"}));
    f.push_back(choice_field("variant", &RunConfig::variant,
                             {"full", "no_pretrained", "no_position", "no_pretrained_no_position", "no_attention",
                              "single_head", "no_gcn"}));
    f.push_back(size_field("bootstrap", &RunConfig::bootstrap));
    f.push_back(text_field("target_dataset", &RunConfig::target_dataset));
    f.push_back(text_field("target_input", &RunConfig::target_input));
    f.push_back(text_field("source_name", &RunConfig::source_name));
    f.push_back(text_field("target_name", &RunConfig::target_name));
    f.push_back(text_field("checkpoint", &RunConfig::checkpoint));
    f.push_back(choice_field("synth_shape", &RunConfig::synth_shape, {"cue", "tfah", "tcga"}));
    f.push_back(size_field("synth_count", &RunConfig::synth_count));
    f.push_back({"seed", [](RunConfig& c, std::string_view v) { c.seed = parse_number<std::uint64_t>("seed", v); },
                 [](const RunConfig& c) { return std::to_string(c.seed); }});
    f.push_back(text_field("output", &RunConfig::output));
    return f;
  }();
  return table;
}

const Field* find_field(std::string_view key) {
  for (const auto& f : fields()) {
    if (f.key == key) return &f;
  }
  return nullptr;
}

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

}  // namespace

std::span<const std::string> run_config_keys() {
  static const std::vector<std::string> keys = [] {
    std::vector<std::string> k;
    for (const auto& f : fields()) k.push_back(f.key);
    return k;
  }();
  return keys;
}

std::size_t edit_distance(std::string_view a, std::string_view b) {
  std::vector<std::size_t> prev(b.size() + 1), cur(b.size() + 1);
  for (std::size_t j = 0; j <= b.size(); ++j) prev[j] = j;
  for (std::size_t i = 1; i <= a.size(); ++i) {
    cur[0] = i;
    for (std::size_t j = 1; j <= b.size(); ++j) {
      cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1)});
    }
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

std::string nearest_key(std::string_view key) {
  std::string best;
  std::size_t best_d = static_cast<std::size_t>(-1);
  for (const auto& k : run_config_keys()) {
    const auto d = edit_distance(key, k);
    if (d < best_d) {
      best_d = d;
      best = k;
    }
  }
  return best;
}

void set_field(RunConfig& config, std::string_view key, std::string_view value) {
  const Field* f = find_field(key);
  if (!f) {
    throw ConfigError("unknown key '" + std::string(key) + "' (did you mean '" + nearest_key(key) + "'?)");
  }
  f->set(config, trim(value));
}

std::string get_field(const RunConfig& config, std::string_view key) {
  const Field* f = find_field(key);
  if (!f) throw ConfigError("unknown key '" + std::string(key) + "'");
  return f->get(config);
}

std::vector<std::string> RunConfig::freeze_prefixes() const {
  std::vector<std::string> out;
  std::istringstream in(freeze);
  for (std::string item; std::getline(in, item, ',');) {
    const auto t = trim(item);
    if (!t.empty()) out.emplace_back(t);
  }
  return out;
}

bool RunConfig::operator==(const RunConfig& other) const { return to_text(*this) == to_text(other); }

std::map<std::string, std::string> parse_config_text(std::string_view text) {
  std::map<std::string, std::string> out;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto nl = text.find('\n', pos);
    std::string_view line = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
    pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) throw FormatError("expected key = value", line_no);
    const auto key = trim(line.substr(0, eq));
    if (key.empty()) throw FormatError("empty key", line_no);
    out[std::string(key)] = std::string(trim(line.substr(eq + 1)));
  }
  return out;
}

RunConfig resolve_config(const std::optional<std::filesystem::path>& path,
                         const std::map<std::string, std::string>& flags, const char* env_seed) {
  RunConfig config;
  if (env_seed && *env_seed) set_field(config, "seed", env_seed);
  if (path) {
    std::ifstream in(*path);
    if (!in) throw Error("cannot open config " + path->string());
    std::stringstream text;
    text << in.rdbuf();
    for (const auto& [k, v] : parse_config_text(text.str())) set_field(config, k, v);
  }
  for (const auto& [k, v] : flags) set_field(config, k, v);
  return config;
}

std::string to_text(const RunConfig& config) {
  std::string out;
  for (const auto& f : fields()) out += f.key + " = " + f.get(config) + "\n";
  return out;
}

void write_config(const std::filesystem::path& path, const RunConfig& config) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  out << "# resolved run configuration\n" << to_text(config);
}

}  // namespace bioie::cli
