#pragma once

#include <cstddef>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace bioie {

enum class EntityKind {
  kChemical,
  kDisease,
  kGeneProtein,
  kType,
  kSite,
  kSize,
  kSubtype,
  kGrade,
  kTNM,
  kMetas,
};

std::string_view to_string(EntityKind kind);
std::optional<EntityKind> parse_entity_kind(std::string_view name);

// The seven pathology-report variables, in schema order.
std::span<const EntityKind> pathology_variables();
bool is_pathology_variable(EntityKind kind);

enum class Source { kCDR, kChemProt, kTCGA, kTFAH, kSynthetic };

std::string_view to_string(Source source);
std::optional<Source> parse_source(std::string_view name);

enum class TaskKind { kCdr, kChemProt, kPathology };

struct Token {
  std::string surface;
  std::size_t char_start = 0;
  std::size_t char_end = 0;
  std::size_t index = 0;
  std::size_t sentence = 0;
  bool pad = false;

  bool operator==(const Token&) const = default;
};

struct EntityMention {
  std::string id;
  EntityKind kind = EntityKind::kChemical;
  std::size_t first_token = 0;  // inclusive span
  std::size_t last_token = 0;
  std::size_t char_start = 0;
  std::size_t char_end = 0;
  std::string normalized_id;  // ontology id, empty when absent

  bool operator==(const EntityMention&) const = default;
};

// Undirected dependency between two token positions.
struct DepEdge {
  std::size_t child = 0;
  std::size_t head = 0;
  std::string label;

  bool operator==(const DepEdge&) const = default;
};

// Gold relation as written in the source annotation. head and tail are mention
// ids for ChemProt and pathology records, normalized ids for CDR.
struct GoldRelation {
  std::string kind;
  std::string head;
  std::string tail;

  bool operator==(const GoldRelation&) const = default;
};

struct Document {
  std::string id;
  std::string text;
  std::vector<Token> tokens;
  std::vector<EntityMention> mentions;
  std::vector<DepEdge> dep_edges;
  std::vector<GoldRelation> relations;
  Source source = Source::kSynthetic;
  std::size_t original_length = 0;  // token count before length normalization

  std::size_t length() const { return tokens.size(); }
  std::size_t content_length() const;  // tokens that are not padding
  std::optional<std::size_t> find_mention(std::string_view mention_id) const;

  bool operator==(const Document&) const = default;
};

// Dataset-specific class vocabulary. Index null_index is the negative class.
struct LabelSet {
  std::string name;
  std::vector<std::string> labels;
  std::size_t null_index = 0;

  std::size_t size() const { return labels.size(); }
  std::optional<std::size_t> find(std::string_view label) const;
};

std::shared_ptr<const LabelSet> cdr_labels();
std::shared_ptr<const LabelSet> chemprot_labels();
std::shared_ptr<const LabelSet> pathology_labels();

struct RelationInstance {
  std::string doc_id;
  std::size_t doc_index = 0;  // position in the owning Dataset's documents
  std::size_t head = 0;       // mention indices within the document
  std::size_t tail = 0;
  std::size_t label = 0;
  std::shared_ptr<const LabelSet> label_set;
};

struct ParseStats {
  std::size_t skipped_cross_sentence = 0;  // gold pairs dropped by sentence scoping
  std::size_t skipped_out_of_scope = 0;    // gold relations mapped to the negative class
};

struct Dataset {
  TaskKind task = TaskKind::kCdr;
  std::vector<Document> documents;
  std::vector<RelationInstance> instances;
  std::shared_ptr<const LabelSet> labels;
  ParseStats stats;
};

}  // namespace bioie
