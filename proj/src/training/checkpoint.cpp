#include "bioie/training/checkpoint.hpp"

#include <bit>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

namespace bioie {

std::string_view to_string(CheckpointErrorKind kind) {
  switch (kind) {
    case CheckpointErrorKind::kIo: return "io";
    case CheckpointErrorKind::kBadMagic: return "bad magic";
    case CheckpointErrorKind::kVersionMismatch: return "version mismatch";
    case CheckpointErrorKind::kDigestMismatch: return "config digest mismatch";
    case CheckpointErrorKind::kTruncated: return "unexpected end of checkpoint";
    case CheckpointErrorKind::kCorrupt: return "corrupt checkpoint";
  }
  return "?";
}

std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::uint64_t config_digest(const ModelConfig& config) { return fnv1a64(to_text(config)); }

namespace {

constexpr std::string_view kMagic = "BIOIE";
// Guards against absurd allocations from a damaged length field.
constexpr std::uint64_t kMaxLength = std::uint64_t{1} << 40;

class Writer {
 public:
  explicit Writer(std::ostream& out) : out_(out) {}

  void u8(std::uint8_t v) { out_.put(static_cast<char>(v)); }
  void u32(std::uint32_t v) { le(v, 4); }
  void u64(std::uint64_t v) { le(v, 8); }
  void f64(double v) { le(std::bit_cast<std::uint64_t>(v), 8); }
  void str(std::string_view s) {
    u64(s.size());
    out_.write(s.data(), static_cast<std::streamsize>(s.size()));
  }
  void block(const TensorBlock& b) {
    str(b.name);
    u8(b.frozen ? 1 : 0);
    u32(static_cast<std::uint32_t>(b.shape.size()));
    for (auto e : b.shape) u64(e);
    for (double v : b.values) f64(v);
  }
  void doubles(const std::vector<double>& v) {
    u64(v.size());
    for (double x : v) f64(x);
  }

 private:
  void le(std::uint64_t v, int bytes) {
    char buf[8];
    for (int i = 0; i < bytes; ++i) buf[i] = static_cast<char>((v >> (8 * i)) & 0xff);
    out_.write(buf, bytes);
  }
  std::ostream& out_;
};

class Reader {
 public:
  explicit Reader(std::istream& in) : in_(in) {}

  std::uint8_t u8() { return static_cast<std::uint8_t>(le(1)); }
  std::uint32_t u32() { return static_cast<std::uint32_t>(le(4)); }
  std::uint64_t u64() { return le(8); }
  double f64() { return std::bit_cast<double>(le(8)); }
  std::string str() {
    const auto n = length();
    std::string s(n, '\0');
    fill(s.data(), n);
    return s;
  }
  TensorBlock block() {
    TensorBlock b;
    b.name = str();
    const auto frozen = u8();
    if (frozen > 1) throw CheckpointError(CheckpointErrorKind::kCorrupt, "corrupt checkpoint: bad flag in " + b.name);
    b.frozen = frozen == 1;
    const auto rank = u32();
    if (rank > 8) throw CheckpointError(CheckpointErrorKind::kCorrupt, "corrupt checkpoint: rank of " + b.name);
    std::uint64_t count = 1;
    for (std::uint32_t i = 0; i < rank; ++i) {
      b.shape.push_back(u64());
      count *= b.shape.back();
      if (count > kMaxLength) throw CheckpointError(CheckpointErrorKind::kCorrupt, "corrupt checkpoint: size of " + b.name);
    }
    b.values.resize(count);
    for (auto& v : b.values) v = f64();
    return b;
  }
  std::vector<double> doubles() {
    std::vector<double> v(length());
    for (auto& x : v) x = f64();
    return v;
  }
  std::uint64_t length() {
    const auto n = u64();
    if (n > kMaxLength) throw CheckpointError(CheckpointErrorKind::kCorrupt, "corrupt checkpoint: length field");
    return n;
  }
  void fill(char* dst, std::size_t n) {
    in_.read(dst, static_cast<std::streamsize>(n));
    if (static_cast<std::size_t>(in_.gcount()) != n) {
      throw CheckpointError(CheckpointErrorKind::kTruncated, "unexpected end of checkpoint");
    }
  }

 private:
  std::uint64_t le(int bytes) {
    unsigned char buf[8];
    fill(reinterpret_cast<char*>(buf), static_cast<std::size_t>(bytes));
    std::uint64_t v = 0;
    for (int i = 0; i < bytes; ++i) v |= static_cast<std::uint64_t>(buf[i]) << (8 * i);
    return v;
  }
  std::istream& in_;
};

TensorBlock to_block(std::string name, const Tensor& t, bool frozen) {
  return {std::move(name), t.shape(), frozen, std::vector<double>(t.values().begin(), t.values().end())};
}

[[noreturn]] void digest_mismatch(std::uint64_t expected, std::uint64_t got) {
  std::ostringstream msg;
  msg << "config digest mismatch: checkpoint " << std::hex << got << ", model " << expected;
  throw CheckpointError(CheckpointErrorKind::kDigestMismatch, msg.str());
}

void check_block(const TensorBlock& block, const std::string& name, const Tensor& target) {
  if (block.name != name) {
    throw CheckpointError(CheckpointErrorKind::kCorrupt,
                          "checkpoint parameter '" + block.name + "' where '" + name + "' was expected");
  }
  if (block.shape != target.shape()) {
    throw CheckpointError(CheckpointErrorKind::kCorrupt, "checkpoint shape " + shape_string(block.shape) + " for " +
                                                             name + ", model has " + shape_string(target.shape()));
  }
}

void copy_into(const std::vector<double>& values, Tensor target) {
  std::copy(values.begin(), values.end(), target.mutable_values().begin());
}

}  // namespace

ModelConfig Checkpoint::config() const {
  ModelConfig c;
  std::istringstream in(config_text);
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto eq = line.find(" = ");
    if (eq == std::string::npos || !set_model_field(c, line.substr(0, eq), line.substr(eq + 3))) {
      throw CheckpointError(CheckpointErrorKind::kCorrupt, "corrupt checkpoint config line '" + line + "'");
    }
  }
  return c;
}

Vocabulary Checkpoint::vocabulary() const { return Vocabulary::from_entries(vocab_tokens, vocab_counts); }

EmbeddingTable Checkpoint::embeddings() const {
  EmbeddingTable t;
  if (word_table.shape.size() != 2) throw CheckpointError(CheckpointErrorKind::kCorrupt, "word table is not a matrix");
  t.dim = word_table.shape[1];
  t.rows = word_table.values;
  return t;
}

LabelSet Checkpoint::label_set() const {
  if (labels.empty()) throw CheckpointError(CheckpointErrorKind::kCorrupt, "checkpoint has no labels");
  return LabelSet{"checkpoint", labels, 0};
}

std::vector<std::string> optimizer_parameter_names(const Model& model, const Adam& optimizer) {
  std::vector<std::string> names;
  for (const auto& p : optimizer.params()) {
    const Parameter* found = nullptr;
    for (const auto& entry : model.parameters().entries()) {
      if (entry.value.same_storage(p)) found = &entry;
    }
    if (!found) throw Error("optimizer holds a tensor that is not a model parameter");
    names.push_back(found->name);
  }
  return names;
}

Checkpoint capture_checkpoint(const Model& model, const Vocabulary& vocab, const LabelSet& labels,
                              const Adam* optimizer, const Rng* rng, std::uint64_t epoch) {
  Checkpoint c;
  c.config_text = to_text(model.config());
  c.digest = fnv1a64(c.config_text);
  for (const auto& p : model.parameters().entries()) c.parameters.push_back(to_block(p.name, p.value, p.frozen));
  c.word_table = to_block("word_table", model.word_table(), true);
  c.labels = labels.labels;
  for (std::size_t i = 0; i < vocab.size(); ++i) {
    c.vocab_tokens.push_back(vocab.token(i));
    c.vocab_counts.push_back(vocab.frequency(i));
  }
  if (optimizer) c.optimizer = OptimizerBlock{optimizer->state(), optimizer_parameter_names(model, *optimizer)};
  if (rng) c.rng_state = rng->state();
  c.epoch = epoch;
  return c;
}

void write_checkpoint(std::ostream& out, const Checkpoint& c) {
  Writer w(out);
  out.write(kMagic.data(), kMagic.size());
  w.u32(kCheckpointVersion);
  w.u64(c.digest);
  w.str(c.config_text);
  w.u32(static_cast<std::uint32_t>(c.parameters.size()));
  for (const auto& b : c.parameters) w.block(b);
  w.block(c.word_table);
  w.u32(static_cast<std::uint32_t>(c.labels.size()));
  for (const auto& l : c.labels) w.str(l);
  w.u64(c.vocab_tokens.size());
  for (std::size_t i = 0; i < c.vocab_tokens.size(); ++i) {
    w.str(c.vocab_tokens[i]);
    w.u64(c.vocab_counts[i]);
  }
  w.u8(c.optimizer ? 1 : 0);
  if (c.optimizer) {
    const auto& s = c.optimizer->state;
    w.u64(s.t);
    w.f64(s.config.lr);
    w.f64(s.config.beta1);
    w.f64(s.config.beta2);
    w.f64(s.config.epsilon);
    w.u32(static_cast<std::uint32_t>(s.m.size()));
    for (std::size_t k = 0; k < s.m.size(); ++k) {
      w.str(c.optimizer->names[k]);
      w.doubles(s.m[k]);
      w.doubles(s.v[k]);
    }
  }
  w.u8(c.rng_state ? 1 : 0);
  if (c.rng_state) w.str(*c.rng_state);
  w.u64(c.epoch);
  if (!out) throw CheckpointError(CheckpointErrorKind::kIo, "failed writing checkpoint");
}

Checkpoint read_checkpoint(std::istream& in) {
  Reader r(in);
  std::string magic(kMagic.size(), '\0');
  r.fill(magic.data(), magic.size());
  if (magic != kMagic) throw CheckpointError(CheckpointErrorKind::kBadMagic, "not a checkpoint (bad magic)");
  const auto version = r.u32();
  if (version != kCheckpointVersion) {
    throw CheckpointError(CheckpointErrorKind::kVersionMismatch, "checkpoint version " + std::to_string(version) +
                                                                     ", expected " +
                                                                     std::to_string(kCheckpointVersion));
  }
  Checkpoint c;
  c.digest = r.u64();
  c.config_text = r.str();
  if (fnv1a64(c.config_text) != c.digest) digest_mismatch(fnv1a64(c.config_text), c.digest);
  const auto n = r.u32();
  for (std::uint32_t i = 0; i < n; ++i) c.parameters.push_back(r.block());
  c.word_table = r.block();
  const auto labels = r.u32();
  for (std::uint32_t i = 0; i < labels; ++i) c.labels.push_back(r.str());
  const auto vocab = r.length();
  for (std::uint64_t i = 0; i < vocab; ++i) {
    c.vocab_tokens.push_back(r.str());
    c.vocab_counts.push_back(r.u64());
  }
  if (r.u8()) {
    OptimizerBlock o;
    o.state.t = r.u64();
    o.state.config.lr = r.f64();
    o.state.config.beta1 = r.f64();
    o.state.config.beta2 = r.f64();
    o.state.config.epsilon = r.f64();
    const auto k = r.u32();
    for (std::uint32_t i = 0; i < k; ++i) {
      o.names.push_back(r.str());
      o.state.m.push_back(r.doubles());
      o.state.v.push_back(r.doubles());
    }
    c.optimizer = std::move(o);
  }
  if (r.u8()) c.rng_state = r.str();
  c.epoch = r.u64();
  if (in.peek() != std::char_traits<char>::eof()) {
    throw CheckpointError(CheckpointErrorKind::kCorrupt, "trailing bytes after checkpoint");
  }
  return c;
}

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& checkpoint) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw CheckpointError(CheckpointErrorKind::kIo, "cannot write " + path.string());
  write_checkpoint(out, checkpoint);
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CheckpointError(CheckpointErrorKind::kIo, "cannot open " + path.string());
  return read_checkpoint(in);
}

void restore_checkpoint(const Checkpoint& c, Model& model, Adam* optimizer, Rng* rng) {
  const auto expected = config_digest(model.config());
  if (c.digest != expected) digest_mismatch(expected, c.digest);

  const auto& entries = model.parameters().entries();
  if (c.parameters.size() != entries.size()) {
    throw CheckpointError(CheckpointErrorKind::kCorrupt, "checkpoint holds " + std::to_string(c.parameters.size()) +
                                                             " parameters, model has " +
                                                             std::to_string(entries.size()));
  }
  for (std::size_t i = 0; i < entries.size(); ++i) check_block(c.parameters[i], entries[i].name, entries[i].value);
  check_block(c.word_table, "word_table", model.word_table());
  if (optimizer) {
    if (!c.optimizer) throw CheckpointError(CheckpointErrorKind::kCorrupt, "checkpoint has no optimizer state");
    if (c.optimizer->names != optimizer_parameter_names(model, *optimizer)) {
      throw CheckpointError(CheckpointErrorKind::kCorrupt, "optimizer parameters differ from the checkpoint");
    }
    const auto& s = c.optimizer->state;
    for (std::size_t k = 0; k < optimizer->params().size(); ++k) {
      const auto n = optimizer->params()[k].size();
      if (s.m.size() <= k || s.m[k].size() != n || s.v[k].size() != n) {
        throw CheckpointError(CheckpointErrorKind::kCorrupt, "optimizer moments for " + c.optimizer->names[k] +
                                                                 " do not match the parameter");
      }
    }
  }
  if (rng && !c.rng_state) throw CheckpointError(CheckpointErrorKind::kCorrupt, "checkpoint has no rng state");

  std::vector<std::string> frozen;
  for (std::size_t i = 0; i < entries.size(); ++i) {
    copy_into(c.parameters[i].values, entries[i].value);
    if (c.parameters[i].frozen) frozen.push_back(entries[i].name);
  }
  copy_into(c.word_table.values, model.word_table());
  model.parameters().unfreeze_all();
  if (!frozen.empty()) model.parameters().freeze(frozen);
  if (optimizer) optimizer->load_state(c.optimizer->state);
  if (rng) rng->restore(*c.rng_state);
}

Model model_from_checkpoint(const Checkpoint& c) {
  Model model(c.config(), c.vocabulary(), c.embeddings(), 0);
  restore_checkpoint(c, model);
  return model;
}

}  // namespace bioie
