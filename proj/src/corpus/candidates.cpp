#include "bioie/corpus/candidates.hpp"

#include <algorithm>
#include <set>
#include <string>

#include "bioie/error.hpp"

namespace bioie {

namespace {

std::vector<std::string> id_components(const std::string& id) {
  std::vector<std::string> parts;
  std::size_t start = 0;
  while (true) {
    const std::size_t bar = id.find('|', start);
    std::string part = id.substr(start, bar == std::string::npos ? std::string::npos : bar - start);
    if (!part.empty() && part != "-1" && part != "-") parts.push_back(std::move(part));
    if (bar == std::string::npos) break;
    start = bar + 1;
  }
  return parts;
}

RelationInstance make_instance(const Document& doc, std::size_t doc_index, std::size_t head,
                               std::size_t tail, std::size_t label,
                               std::shared_ptr<const LabelSet> labels) {
  return RelationInstance{doc.id, doc_index, head, tail, label, std::move(labels)};
}

std::vector<RelationInstance> cdr_candidates(const Document& doc, std::size_t doc_index) {
  std::set<std::pair<std::string, std::string>> gold;
  for (const auto& r : doc.relations) {
    if (r.kind == "CID") gold.emplace(r.head, r.tail);
  }
  auto labels = cdr_labels();
  std::vector<RelationInstance> out;
  for (std::size_t h = 0; h < doc.mentions.size(); ++h) {
    if (doc.mentions[h].kind != EntityKind::kChemical) continue;
    const auto chem_ids = id_components(doc.mentions[h].normalized_id);
    for (std::size_t t = 0; t < doc.mentions.size(); ++t) {
      if (doc.mentions[t].kind != EntityKind::kDisease) continue;
      bool positive = false;
      for (const auto& c : chem_ids) {
        for (const auto& d : id_components(doc.mentions[t].normalized_id)) {
          positive = positive || gold.count({c, d}) > 0;
        }
      }
      out.push_back(make_instance(doc, doc_index, h, t, positive ? 1 : 0, labels));
    }
  }
  return out;
}

std::vector<RelationInstance> chemprot_candidates(const Document& doc, std::size_t doc_index) {
  auto labels = chemprot_labels();
  std::vector<RelationInstance> out;
  for (std::size_t h = 0; h < doc.mentions.size(); ++h) {
    const auto& head = doc.mentions[h];
    if (head.kind != EntityKind::kChemical) continue;
    for (std::size_t t = 0; t < doc.mentions.size(); ++t) {
      const auto& tail = doc.mentions[t];
      if (tail.kind != EntityKind::kGeneProtein) continue;
      if (doc.tokens[head.first_token].sentence != doc.tokens[tail.first_token].sentence) continue;
      std::size_t label = labels->null_index;
      for (const auto& r : doc.relations) {
        if (r.head == head.id && r.tail == tail.id) {
          if (auto idx = labels->find(r.kind)) label = *idx;
        }
      }
      out.push_back(make_instance(doc, doc_index, h, t, label, labels));
    }
  }
  return out;
}

std::vector<RelationInstance> pathology_candidates(const Document& doc, std::size_t doc_index) {
  auto labels = pathology_labels();
  std::vector<RelationInstance> out;
  for (std::size_t h = 0; h < doc.mentions.size(); ++h) {
    const auto& anchor = doc.mentions[h];
    if (anchor.kind != EntityKind::kDisease) continue;
    for (std::size_t t = 0; t < doc.mentions.size(); ++t) {
      const auto& value = doc.mentions[t];
      if (!is_pathology_variable(value.kind)) continue;
      std::size_t label = labels->null_index;
      for (const auto& r : doc.relations) {
        if (r.head == anchor.id && r.tail == value.id) label = *labels->find(r.kind);
      }
      out.push_back(make_instance(doc, doc_index, h, t, label, labels));
    }
  }
  return out;
}

}  // namespace

std::vector<RelationInstance> generate_candidates(const Document& doc, std::size_t doc_index,
                                                  TaskKind task) {
  switch (task) {
    case TaskKind::kCdr: return cdr_candidates(doc, doc_index);
    case TaskKind::kChemProt: return chemprot_candidates(doc, doc_index);
    case TaskKind::kPathology: return pathology_candidates(doc, doc_index);
  }
  return {};
}

std::vector<RelationInstance> subsample_negatives(const std::vector<RelationInstance>& instances,
                                                  double ratio, Rng& rng) {
  if (ratio <= 0.0) return instances;
  std::vector<std::size_t> negatives;
  std::size_t positives = 0;
  for (std::size_t i = 0; i < instances.size(); ++i) {
    if (instances[i].label == instances[i].label_set->null_index) {
      negatives.push_back(i);
    } else {
      ++positives;
    }
  }
  const auto keep = static_cast<std::size_t>(ratio * static_cast<double>(positives));
  std::vector<char> kept(instances.size(), 1);
  if (negatives.size() > keep) {
    rng.shuffle(negatives);
    for (std::size_t k = keep; k < negatives.size(); ++k) kept[negatives[k]] = 0;
  }
  std::vector<RelationInstance> out;
  for (std::size_t i = 0; i < instances.size(); ++i) {
    if (kept[i]) out.push_back(instances[i]);
  }
  return out;
}

std::vector<std::pair<EntityKind, Dataset>> split_subtasks(const Dataset& pathology) {
  if (pathology.task != TaskKind::kPathology) throw Error("split_subtasks: not a pathology dataset");
  std::vector<std::pair<EntityKind, Dataset>> out;
  for (EntityKind kind : pathology_variables()) {
    const std::string name(to_string(kind));
    auto labels = std::make_shared<const LabelSet>(LabelSet{"Pathology/" + name, {"None", name}, 0});
    Dataset sub;
    sub.task = TaskKind::kPathology;
    sub.documents = pathology.documents;
    sub.labels = labels;
    for (const auto& inst : pathology.instances) {
      const auto& doc = pathology.documents[inst.doc_index];
      if (doc.mentions[inst.tail].kind != kind) continue;
      RelationInstance copy = inst;
      copy.label = inst.label == inst.label_set->null_index ? 0 : 1;
      copy.label_set = labels;
      sub.instances.push_back(std::move(copy));
    }
    out.emplace_back(kind, std::move(sub));
  }
  return out;
}

namespace {

// Normalized document plus old→new mention index (npos when dropped).
std::pair<Document, std::vector<std::size_t>> normalize_with_map(const Document& doc, LengthLimits limits) {
  constexpr std::size_t kDropped = static_cast<std::size_t>(-1);
  Document out = doc;
  out.original_length = doc.tokens.size();
  std::vector<std::size_t> remap(doc.mentions.size(), kDropped);

  if (out.tokens.size() > limits.max_tokens) {
    const std::size_t cut = limits.max_tokens;
    out.tokens.resize(cut);
    out.mentions.clear();
    for (std::size_t i = 0; i < doc.mentions.size(); ++i) {
      EntityMention m = doc.mentions[i];
      if (m.first_token >= cut) continue;
      if (m.last_token >= cut) {
        m.last_token = cut - 1;
        m.char_end = out.tokens[cut - 1].char_end;
      }
      remap[i] = out.mentions.size();
      out.mentions.push_back(std::move(m));
    }
    std::vector<DepEdge> edges;
    for (const auto& e : doc.dep_edges) {
      if (e.child < cut && e.head < cut) edges.push_back(e);
    }
    out.dep_edges = std::move(edges);
    std::vector<GoldRelation> relations;
    for (const auto& r : doc.relations) {
      const bool by_mention = doc.find_mention(r.head).has_value();
      if (!by_mention || (out.find_mention(r.head) && out.find_mention(r.tail))) relations.push_back(r);
    }
    out.relations = std::move(relations);
  } else {
    for (std::size_t i = 0; i < remap.size(); ++i) remap[i] = i;
  }

  const std::size_t last_sentence = out.tokens.empty() ? 0 : out.tokens.back().sentence;
  while (out.tokens.size() < limits.min_tokens) {
    Token pad;
    pad.surface = "<pad>";
    pad.char_start = pad.char_end = out.text.size();
    pad.index = out.tokens.size();
    pad.sentence = last_sentence;
    pad.pad = true;
    out.tokens.push_back(std::move(pad));
  }
  return {std::move(out), std::move(remap)};
}

}  // namespace

Document normalize_length(const Document& doc, LengthLimits limits) {
  if (limits.min_tokens > limits.max_tokens) throw Error("normalize_length: min exceeds max");
  return normalize_with_map(doc, limits).first;
}

Dataset normalize_dataset(const Dataset& dataset, LengthLimits limits) {
  if (limits.min_tokens > limits.max_tokens) throw Error("normalize_length: min exceeds max");
  constexpr std::size_t kDropped = static_cast<std::size_t>(-1);
  Dataset out;
  out.task = dataset.task;
  out.labels = dataset.labels;
  out.stats = dataset.stats;
  std::vector<std::vector<std::size_t>> remaps;
  for (const auto& doc : dataset.documents) {
    auto [normalized, remap] = normalize_with_map(doc, limits);
    out.documents.push_back(std::move(normalized));
    remaps.push_back(std::move(remap));
  }
  for (const auto& inst : dataset.instances) {
    const auto& remap = remaps[inst.doc_index];
    if (remap[inst.head] == kDropped || remap[inst.tail] == kDropped) continue;
    RelationInstance copy = inst;
    copy.head = remap[inst.head];
    copy.tail = remap[inst.tail];
    out.instances.push_back(std::move(copy));
  }
  return out;
}

}  // namespace bioie
