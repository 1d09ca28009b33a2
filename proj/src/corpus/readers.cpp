#include "bioie/corpus/readers.hpp"

#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "bioie/corpus/candidates.hpp"
#include "bioie/corpus/tokenizer.hpp"
#include "bioie/error.hpp"

namespace bioie {

namespace {

std::vector<std::string> split_tabs(const std::string& line) {
  std::vector<std::string> fields;
  std::size_t start = 0;
  while (true) {
    const std::size_t tab = line.find('\t', start);
    fields.push_back(line.substr(start, tab == std::string::npos ? std::string::npos : tab - start));
    if (tab == std::string::npos) break;
    start = tab + 1;
  }
  return fields;
}

void strip_cr(std::string& line) {
  if (!line.empty() && line.back() == '\r') line.pop_back();
}

std::ifstream open(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  return in;
}

std::size_t parse_offset(const std::string& field, std::size_t line_no) {
  if (field.empty() || field.find_first_not_of("0123456789") != std::string::npos) {
    throw FormatError("expected a character offset, got '" + field + "'", line_no);
  }
  return static_cast<std::size_t>(std::stoull(field));
}

void add_mention(Document& doc, EntityMention mention, std::size_t line_no) {
  try {
    auto [first, last] = token_span(doc.tokens, doc.text.size(), mention.char_start, mention.char_end);
    mention.first_token = first;
    mention.last_token = last;
  } catch (const FormatError& e) {
    throw FormatError(doc.id + ": " + e.what(), line_no);
  }
  doc.mentions.push_back(std::move(mention));
}

Dataset finish(TaskKind task, std::shared_ptr<const LabelSet> labels, std::vector<Document> docs) {
  Dataset data;
  data.task = task;
  data.labels = std::move(labels);
  data.documents = std::move(docs);
  for (std::size_t d = 0; d < data.documents.size(); ++d) {
    auto cands = generate_candidates(data.documents[d], d, task);
    data.instances.insert(data.instances.end(), cands.begin(), cands.end());
  }
  return data;
}

// ---------------------------------------------------------------- PubTator

struct PubtatorBlock {
  std::string id;
  std::string title, abstract;
  bool has_title = false, has_abstract = false;
  std::vector<std::pair<std::vector<std::string>, std::size_t>> annotations;
};

Document build_pubtator_document(PubtatorBlock& block) {
  Document doc;
  doc.id = block.id;
  doc.source = Source::kCDR;
  doc.text = block.title + " " + block.abstract;
  const std::size_t breaks[] = {block.title.size() + 1};
  doc.tokens = tokenize(doc.text, breaks);
  doc.original_length = doc.tokens.size();
  for (auto& [fields, line_no] : block.annotations) {
    if (fields.size() == 4 && fields[1] == "CID") {
      doc.relations.push_back({"CID", fields[2], fields[3]});
      continue;
    }
    if (fields.size() < 5) {
      throw FormatError("mention line needs at least 5 tab-separated fields", line_no);
    }
    EntityMention m;
    m.char_start = parse_offset(fields[1], line_no);
    m.char_end = parse_offset(fields[2], line_no);
    auto kind = parse_entity_kind(fields[4]);
    if (!kind) throw FormatError("unknown entity type '" + fields[4] + "'", line_no);
    m.kind = *kind;
    m.normalized_id = fields.size() > 5 ? fields[5] : "";
    m.id = "M" + std::to_string(doc.mentions.size());
    add_mention(doc, std::move(m), line_no);
  }
  return doc;
}

// ---------------------------------------------------------------- pathology

const std::string& legal_variable_list() {
  static const std::string list = [] {
    std::string s;
    for (EntityKind k : pathology_variables()) {
      if (!s.empty()) s += ", ";
      s += to_string(k);
    }
    return s;
  }();
  return list;
}

EntityKind record_mention_kind(const std::string& name, std::size_t line_no) {
  auto kind = parse_entity_kind(name);
  if (!kind || !(is_pathology_variable(*kind) || *kind == EntityKind::kDisease)) {
    throw FormatError("unknown mention kind '" + name + "'; legal kinds are Disease (anchor) and " +
                          legal_variable_list(),
                      line_no);
  }
  return *kind;
}

EntityKind record_relation_kind(const std::string& name, std::size_t line_no) {
  auto kind = parse_entity_kind(name);
  if (!kind || !is_pathology_variable(*kind)) {
    throw FormatError("unknown relation kind '" + name + "'; legal kinds are " + legal_variable_list(),
                      line_no);
  }
  return *kind;
}

Document parse_record(const std::string& line, std::size_t line_no) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(line);
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("invalid JSON: ") + e.what(), line_no);
  }
  try {
    Document doc;
    doc.id = j.at("id").get<std::string>();
    const std::string source = j.at("source").get<std::string>();
    auto src = parse_source(source);
    if (!src) throw FormatError("unknown source '" + source + "'", line_no);
    doc.source = *src;
    doc.text = j.at("text").get<std::string>();
    doc.tokens = tokenize(doc.text);
    doc.original_length = doc.tokens.size();
    for (const auto& jm : j.at("mentions")) {
      EntityMention m;
      m.kind = record_mention_kind(jm.at("kind").get<std::string>(), line_no);
      m.char_start = jm.at("char_start").get<std::size_t>();
      m.char_end = jm.at("char_end").get<std::size_t>();
      m.id = "M" + std::to_string(doc.mentions.size());
      add_mention(doc, std::move(m), line_no);
    }
    for (const auto& jr : j.at("relations")) {
      const auto head = jr.at("head").get<std::size_t>();
      const auto tail = jr.at("tail").get<std::size_t>();
      const EntityKind kind = record_relation_kind(jr.at("kind").get<std::string>(), line_no);
      if (head >= doc.mentions.size() || tail >= doc.mentions.size() || head == tail) {
        throw FormatError("relation references invalid mention indices", line_no);
      }
      if (doc.mentions[tail].kind != kind) {
        throw FormatError("relation kind " + std::string(to_string(kind)) + " does not match tail mention kind " +
                              std::string(to_string(doc.mentions[tail].kind)),
                          line_no);
      }
      doc.relations.push_back({std::string(to_string(kind)), doc.mentions[head].id, doc.mentions[tail].id});
    }
    return doc;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("bad record field: ") + e.what(), line_no);
  }
}

}  // namespace

Dataset parse_pubtator(std::istream& in) {
  std::vector<Document> docs;
  std::optional<PubtatorBlock> block;
  std::string line;
  std::size_t line_no = 0;
  auto flush = [&] {
    if (!block) return;
    if (!block->has_title || !block->has_abstract) {
      throw FormatError("document " + block->id + " lacks a title or abstract line", line_no);
    }
    docs.push_back(build_pubtator_document(*block));
    block.reset();
  };
  while (std::getline(in, line)) {
    ++line_no;
    strip_cr(line);
    if (line.find_first_not_of(" \t") == std::string::npos) {
      flush();
      continue;
    }
    const std::size_t bar = line.find('|');
    const std::size_t tab = line.find('\t');
    if (bar != std::string::npos && (tab == std::string::npos || bar < tab) && bar + 2 < line.size() &&
        line[bar + 2] == '|' && (line[bar + 1] == 't' || line[bar + 1] == 'a')) {
      const std::string id = line.substr(0, bar);
      if (block && block->id != id) flush();
      if (!block) {
        block.emplace();
        block->id = id;
      }
      if (line[bar + 1] == 't') {
        block->title = line.substr(bar + 3);
        block->has_title = true;
      } else {
        block->abstract = line.substr(bar + 3);
        block->has_abstract = true;
      }
      continue;
    }
    if (tab == std::string::npos) throw FormatError("unrecognized line", line_no);
    auto fields = split_tabs(line);
    if (!block || fields[0] != block->id) {
      throw FormatError("annotation for '" + fields[0] + "' outside its document block", line_no);
    }
    if (!(fields.size() == 4 && fields[1] == "CID") && fields.size() < 5) {
      throw FormatError("malformed annotation line", line_no);
    }
    block->annotations.emplace_back(std::move(fields), line_no);
  }
  flush();
  return finish(TaskKind::kCdr, cdr_labels(), std::move(docs));
}

Dataset parse_pubtator(const std::filesystem::path& path) {
  auto in = open(path);
  return parse_pubtator(in);
}

Dataset parse_chemprot(std::istream& abstracts, std::istream& entities, std::istream& relations) {
  std::vector<Document> docs;
  std::map<std::string, std::size_t> by_pmid;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(abstracts, line)) {
    ++line_no;
    strip_cr(line);
    if (line.empty()) continue;
    auto f = split_tabs(line);
    if (f.size() != 3) throw FormatError("abstract line needs pmid, title and abstract", line_no);
    Document doc;
    doc.id = f[0];
    doc.source = Source::kChemProt;
    doc.text = f[1] + " " + f[2];
    const std::size_t breaks[] = {f[1].size() + 1};
    doc.tokens = tokenize(doc.text, breaks);
    doc.original_length = doc.tokens.size();
    by_pmid[doc.id] = docs.size();
    docs.push_back(std::move(doc));
  }

  line_no = 0;
  while (std::getline(entities, line)) {
    ++line_no;
    strip_cr(line);
    if (line.empty()) continue;
    auto f = split_tabs(line);
    if (f.size() < 5) throw FormatError("entity line needs pmid, id, type, start, end", line_no);
    auto it = by_pmid.find(f[0]);
    if (it == by_pmid.end()) throw FormatError("entity for unknown abstract " + f[0], line_no);
    EntityMention m;
    m.id = f[1];
    if (f[2] == "CHEMICAL") {
      m.kind = EntityKind::kChemical;
    } else if (f[2].rfind("GENE", 0) == 0) {
      m.kind = EntityKind::kGeneProtein;
    } else {
      throw FormatError("unknown ChemProt entity type '" + f[2] + "'", line_no);
    }
    m.char_start = parse_offset(f[3], line_no);
    m.char_end = parse_offset(f[4], line_no);
    add_mention(docs[it->second], std::move(m), line_no);
  }

  auto labels = chemprot_labels();
  ParseStats stats;
  line_no = 0;
  while (std::getline(relations, line)) {
    ++line_no;
    strip_cr(line);
    if (line.empty()) continue;
    auto f = split_tabs(line);
    std::string cls, arg1, arg2;
    for (const auto& field : f) {
      if (field.rfind("CPR:", 0) == 0) cls = field;
      if (field.rfind("Arg1:", 0) == 0) arg1 = field.substr(5);
      if (field.rfind("Arg2:", 0) == 0) arg2 = field.substr(5);
    }
    if (cls.empty() || arg1.empty() || arg2.empty()) {
      throw FormatError("relation line needs a CPR class and Arg1/Arg2 fields", line_no);
    }
    auto it = by_pmid.find(f[0]);
    if (it == by_pmid.end()) throw FormatError("relation for unknown abstract " + f[0], line_no);
    Document& doc = docs[it->second];
    for (const std::string& arg : {arg1, arg2}) {
      if (!doc.find_mention(arg)) {
        throw FormatError("relation references entity " + arg + " absent from abstract " + doc.id, line_no);
      }
    }
    if (!labels->find(cls)) {
      ++stats.skipped_out_of_scope;
      continue;
    }
    const auto& head = doc.mentions[*doc.find_mention(arg1)];
    const auto& tail = doc.mentions[*doc.find_mention(arg2)];
    if (doc.tokens[head.first_token].sentence != doc.tokens[tail.first_token].sentence) {
      ++stats.skipped_cross_sentence;
    }
    doc.relations.push_back({cls, arg1, arg2});
  }
  Dataset data = finish(TaskKind::kChemProt, labels, std::move(docs));
  data.stats = stats;
  return data;
}

Dataset parse_chemprot(const std::filesystem::path& abstracts, const std::filesystem::path& entities,
                       const std::filesystem::path& relations) {
  auto a = open(abstracts);
  auto e = open(entities);
  auto r = open(relations);
  return parse_chemprot(a, e, r);
}

Dataset parse_pathology_records(std::istream& in) {
  std::vector<Document> docs;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    strip_cr(line);
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    docs.push_back(parse_record(line, line_no));
  }
  return finish(TaskKind::kPathology, pathology_labels(), std::move(docs));
}

Dataset parse_pathology_records(const std::filesystem::path& path) {
  auto in = open(path);
  return parse_pathology_records(in);
}

std::string serialize_record(const Document& doc) {
  nlohmann::ordered_json j;
  j["id"] = doc.id;
  j["source"] = std::string(to_string(doc.source));
  j["text"] = doc.text;
  j["mentions"] = nlohmann::ordered_json::array();
  for (const auto& m : doc.mentions) {
    nlohmann::ordered_json jm;
    jm["kind"] = std::string(to_string(m.kind));
    jm["char_start"] = m.char_start;
    jm["char_end"] = m.char_end;
    j["mentions"].push_back(std::move(jm));
  }
  j["relations"] = nlohmann::ordered_json::array();
  for (const auto& r : doc.relations) {
    auto head = doc.find_mention(r.head);
    auto tail = doc.find_mention(r.tail);
    if (!head || !tail) throw Error("serialize_record: relation references unknown mention in " + doc.id);
    nlohmann::ordered_json jr;
    jr["head"] = *head;
    jr["tail"] = *tail;
    jr["kind"] = r.kind;
    j["relations"].push_back(std::move(jr));
  }
  return j.dump();
}

}  // namespace bioie
