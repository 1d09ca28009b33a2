#include "bioie/corpus/synth.hpp"

#include <algorithm>
#include <numeric>
#include <optional>
#include <sstream>
#include <vector>

#include <nlohmann/json.hpp>

#include "bioie/autodiff/rng.hpp"
#include "bioie/corpus/readers.hpp"
#include "bioie/error.hpp"

namespace bioie {

namespace {

std::size_t variable_slot(EntityKind kind) {
  const auto vars = pathology_variables();
  const auto it = std::find(vars.begin(), vars.end(), kind);
  if (it == vars.end()) throw Error("not a pathology variable: " + std::string(to_string(kind)));
  return static_cast<std::size_t>(it - vars.begin());
}

struct Template {
  std::vector<std::string> before;
  std::vector<std::string> after;
};

struct KindTemplates {
  Template positive;
  Template decoy;
  std::vector<std::vector<std::string>> values;
};

std::vector<std::string> words(const std::string& s) {
  std::istringstream in(s);
  std::vector<std::string> out;
  for (std::string w; in >> w;) out.push_back(w);
  return out;
}

Template tmpl(const std::string& before, const std::string& after) { return {words(before), words(after)}; }

std::vector<std::vector<std::string>> values(std::initializer_list<const char*> list) {
  std::vector<std::vector<std::string>> out;
  for (const char* v : list) out.push_back(words(v));
  return out;
}

const std::vector<KindTemplates>& kind_templates() {
  static const std::vector<KindTemplates> table = {
      // Type
      {tmpl("Tumor type and location :", "."), tmpl("A prior lesion was noted in the", "by history ."),
       values({"kidney and adrenal gland", "left breast", "sigmoid colon", "gastric antrum", "right upper lobe"})},
      // Site
      {tmpl("Resection site :", "."), tmpl("Earlier procedure listed as", "in outside records ."),
       values({"left , radical nephrectomy", "right , modified mastectomy", "total gastrectomy",
               "right hemicolectomy", "left , partial nephrectomy"})},
      // Size
      {tmpl("The maximum diameter of the neoplasm is", "."), tmpl("The largest lymph node measures", "."),
       values({"11 cm", "2.5 cm", "4 cm", "0.8 cm", "6.2 cm", "3 cm"})},
      // Subtype
      {tmpl("Histology subtype :", "."), tmpl("The referral note queried", "without review ."),
       values({"conventional ( clear and granular cell ) type", "papillary type", "mucinous type",
               "lobular type", "chromophobe type"})},
      // Grade
      {tmpl("Nuclear grade varies from", "."), tmpl("The outside slide label reads", "only ."),
       values({"grade II to grade IV", "grade I to grade II", "grade III", "grade II", "grade IV"})},
      // TNM
      {tmpl("TNM Stage :", "."), tmpl("Staging on the prior report was", "."),
       values({"pT3b NX MX", "pT2 N1 M0", "pT1a N0 MX", "pT4 N2 M1", "pT2b N0 M0"})},
      // Metas
      {tmpl("Regional Lymph Nodes :", "."), tmpl("Frozen section count recorded as", "before fixation ."),
       values({"Negative 0 / 2", "Positive 3 / 12", "Negative 0 / 15", "Positive 1 / 9", "Negative 0 / 7"})},
  };
  return table;
}

const std::vector<std::vector<std::string>>& diagnoses() {
  static const auto table = values({"renal cell carcinoma", "invasive ductal carcinoma", "adenocarcinoma",
                                    "squamous cell carcinoma", "malignant neoplasm"});
  return table;
}

const std::vector<std::vector<std::string>>& fillers() {
  static const auto table =
      values({"The specimen is received in formalin .", "Sections are submitted for routine processing .",
              "The surgical margins are free .", "Microscopic examination shows fibrous stroma .",
              "The container is labelled with the patient name .", "Additional levels were examined .",
              "The gross photograph is on file .", "Immunohistochemical stains were reviewed .",
              "The capsule is intact .", "Adjacent tissue shows mild inflammation .",
              "The cut surface is tan and firm .", "Representative sections are taken ."});
  return table;
}

struct Sentence {
  std::vector<std::string> words;
  std::size_t value_begin = 0;  // word range of the planted mention
  std::size_t value_end = 0;
  std::optional<EntityKind> kind;
  bool linked = false;
  bool anchor = false;
};

Sentence planted(EntityKind kind, bool positive, Rng& rng) {
  const auto& kt = kind_templates()[variable_slot(kind)];
  const Template& t = positive ? kt.positive : kt.decoy;
  const auto& value = kt.values[rng.index(kt.values.size())];
  Sentence s;
  s.words = t.before;
  s.value_begin = s.words.size();
  s.words.insert(s.words.end(), value.begin(), value.end());
  s.value_end = s.words.size();
  s.words.insert(s.words.end(), t.after.begin(), t.after.end());
  s.kind = kind;
  s.linked = positive;
  return s;
}

Sentence anchor_sentence(Rng& rng) {
  const auto& dx = diagnoses()[rng.index(diagnoses().size())];
  Sentence s;
  s.words = words("Final diagnosis :");
  s.value_begin = s.words.size();
  s.words.insert(s.words.end(), dx.begin(), dx.end());
  s.value_end = s.words.size();
  s.words.push_back(".");
  s.kind = EntityKind::kDisease;
  s.anchor = true;
  return s;
}

// One report: the anchor first, then planted items and fillers in random order.
nlohmann::ordered_json render(const std::string& id, Source source, std::vector<Sentence> items,
                              std::size_t target_tokens, Rng& rng) {
  std::size_t length = 0;
  for (const auto& s : items) length += s.words.size();
  while (length < target_tokens) {
    Sentence f;
    f.words = fillers()[rng.index(fillers().size())];
    length += f.words.size();
    items.push_back(std::move(f));
  }
  rng.shuffle(items);
  std::vector<Sentence> ordered;
  ordered.push_back(anchor_sentence(rng));
  for (auto& s : items) ordered.push_back(std::move(s));

  std::string text;
  auto mentions = nlohmann::ordered_json::array();
  auto relations = nlohmann::ordered_json::array();
  std::size_t anchor_index = 0;
  for (const auto& s : ordered) {
    std::size_t value_start = 0, value_stop = 0;
    for (std::size_t w = 0; w < s.words.size(); ++w) {
      if (!text.empty()) text += ' ';
      if (s.kind && w == s.value_begin) value_start = text.size();
      text += s.words[w];
      if (s.kind && w + 1 == s.value_end) value_stop = text.size();
    }
    if (!s.kind) continue;
    const std::size_t index = mentions.size();
    mentions.push_back({{"kind", std::string(to_string(*s.kind))},
                        {"char_start", value_start},
                        {"char_end", value_stop}});
    if (s.anchor) anchor_index = index;
    if (s.linked) {
      relations.push_back({{"head", anchor_index}, {"tail", index}, {"kind", std::string(to_string(*s.kind))}});
    }
  }
  nlohmann::ordered_json j;
  j["id"] = id;
  j["source"] = std::string(to_string(source));
  j["text"] = text;
  j["mentions"] = std::move(mentions);
  j["relations"] = std::move(relations);
  return j;
}

std::string doc_id(Source source, std::size_t i) {
  std::ostringstream out;
  out << to_string(source) << '-';
  out.width(6);
  out.fill('0');
  out << i + 1;
  return out.str();
}

}  // namespace

std::size_t& count_for(VariableCounts& counts, EntityKind kind) { return counts[variable_slot(kind)]; }
std::size_t count_for(const VariableCounts& counts, EntityKind kind) { return counts[variable_slot(kind)]; }

SynthCorpus synth_corpus(const SynthSpec& spec) {
  if (spec.min_tokens > spec.max_tokens) throw Error("synth: min_tokens exceeds max_tokens");
  Rng rng(spec.seed);
  const auto vars = pathology_variables();
  std::vector<std::vector<Sentence>> reports;

  if (spec.one_item_per_document) {
    for (std::size_t v = 0; v < vars.size(); ++v) {
      for (std::size_t i = 0; i < spec.positives[v]; ++i) reports.push_back({planted(vars[v], true, rng)});
      for (std::size_t i = 0; i < spec.decoys[v]; ++i) reports.push_back({planted(vars[v], false, rng)});
    }
    rng.shuffle(reports);
  } else {
    std::size_t n = spec.documents;
    if (n == 0) n = std::max<std::size_t>(1, *std::max_element(spec.positives.begin(), spec.positives.end()));
    reports.resize(n);
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    auto scatter = [&](EntityKind kind, std::size_t count, bool positive) {
      rng.shuffle(order);
      for (std::size_t i = 0; i < count; ++i) reports[order[i % n]].push_back(planted(kind, positive, rng));
    };
    for (std::size_t v = 0; v < vars.size(); ++v) {
      scatter(vars[v], spec.positives[v], true);
      scatter(vars[v], spec.decoys[v], false);
    }
  }

  SynthCorpus out;
  out.report.documents = reports.size();
  out.report.positives = spec.positives;
  out.report.decoys = spec.decoys;
  const std::size_t span = spec.max_tokens - spec.min_tokens + 1;
  for (std::size_t i = 0; i < reports.size(); ++i) {
    const std::size_t target = spec.min_tokens + rng.index(span);
    out.records += render(doc_id(spec.source, i), spec.source, std::move(reports[i]), target, rng).dump();
    out.records += '\n';
  }
  std::istringstream in(out.records);
  out.dataset = parse_pathology_records(in);
  return out;
}

SynthSpec tfah_shape(std::uint64_t seed) {
  SynthSpec spec;
  spec.positives = {1398, 1108, 1120, 784, 885, 0, 676};
  spec.documents = 1404;
  spec.source = Source::kTFAH;
  spec.seed = seed;
  return spec;
}

SynthSpec tcga_shape(std::uint64_t seed) {
  SynthSpec spec;
  spec.positives = {4438, 3864, 3880, 4574, 4276, 4227, 2946};
  spec.documents = 4616;
  spec.source = Source::kTCGA;
  spec.seed = seed;
  return spec;
}

}  // namespace bioie
