#include "bioie/corpus/document.hpp"

#include <algorithm>
#include <array>

namespace bioie {

namespace {

constexpr std::array<std::pair<EntityKind, std::string_view>, 10> kKindNames = {{
    {EntityKind::kChemical, "Chemical"},
    {EntityKind::kDisease, "Disease"},
    {EntityKind::kGeneProtein, "Gene/Protein"},
    {EntityKind::kType, "Type"},
    {EntityKind::kSite, "Site"},
    {EntityKind::kSize, "Size"},
    {EntityKind::kSubtype, "Subtype"},
    {EntityKind::kGrade, "Grade"},
    {EntityKind::kTNM, "TNM"},
    {EntityKind::kMetas, "Metas"},
}};

constexpr std::array<EntityKind, 7> kPathologyVariables = {
    EntityKind::kType,  EntityKind::kSite, EntityKind::kSize,  EntityKind::kSubtype,
    EntityKind::kGrade, EntityKind::kTNM,  EntityKind::kMetas,
};

constexpr std::array<std::pair<Source, std::string_view>, 5> kSourceNames = {{
    {Source::kCDR, "CDR"},
    {Source::kChemProt, "ChemProt"},
    {Source::kTCGA, "TCGA"},
    {Source::kTFAH, "TFAH"},
    {Source::kSynthetic, "synthetic"},
}};

}  // namespace

std::string_view to_string(EntityKind kind) {
  for (const auto& [k, name] : kKindNames) {
    if (k == kind) return name;
  }
  return "?";
}

std::optional<EntityKind> parse_entity_kind(std::string_view name) {
  for (const auto& [k, n] : kKindNames) {
    if (n == name) return k;
  }
  return std::nullopt;
}

std::span<const EntityKind> pathology_variables() { return kPathologyVariables; }

bool is_pathology_variable(EntityKind kind) {
  return std::find(kPathologyVariables.begin(), kPathologyVariables.end(), kind) !=
         kPathologyVariables.end();
}

std::string_view to_string(Source source) {
  for (const auto& [s, name] : kSourceNames) {
    if (s == source) return name;
  }
  return "?";
}

std::optional<Source> parse_source(std::string_view name) {
  for (const auto& [s, n] : kSourceNames) {
    if (n == name) return s;
  }
  return std::nullopt;
}

std::size_t Document::content_length() const {
  return static_cast<std::size_t>(
      std::count_if(tokens.begin(), tokens.end(), [](const Token& t) { return !t.pad; }));
}

std::optional<std::size_t> Document::find_mention(std::string_view mention_id) const {
  for (std::size_t i = 0; i < mentions.size(); ++i) {
    if (mentions[i].id == mention_id) return i;
  }
  return std::nullopt;
}

std::optional<std::size_t> LabelSet::find(std::string_view label) const {
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] == label) return i;
  }
  return std::nullopt;
}

std::shared_ptr<const LabelSet> cdr_labels() {
  static const auto labels = std::make_shared<const LabelSet>(LabelSet{"CDR", {"null", "CID"}, 0});
  return labels;
}

std::shared_ptr<const LabelSet> chemprot_labels() {
  static const auto labels = std::make_shared<const LabelSet>(
      LabelSet{"ChemProt", {"negative", "CPR:3", "CPR:4", "CPR:5", "CPR:6", "CPR:9"}, 0});
  return labels;
}

std::shared_ptr<const LabelSet> pathology_labels() {
  static const auto labels = [] {
    LabelSet set{"Pathology", {"None"}, 0};
    for (EntityKind k : kPathologyVariables) set.labels.emplace_back(to_string(k));
    return std::make_shared<const LabelSet>(std::move(set));
  }();
  return labels;
}

}  // namespace bioie
