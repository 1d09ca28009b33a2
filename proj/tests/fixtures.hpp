#pragma once

#include "bioie/corpus/candidates.hpp"
#include "bioie/corpus/dependencies.hpp"
#include "bioie/corpus/synth.hpp"
#include "bioie/corpus/vocabulary.hpp"
#include "bioie/pipeline/model.hpp"
#include "bioie/textgraph/graphs.hpp"

namespace bioie::testing {

// Small Size-subtask corpus, one planted item per report, ready for a model.
struct Fixture {
  Dataset dataset;
  Vocabulary vocab;
  EmbeddingTable embeddings;
  CorpusGraphs graphs;
  PreparedData data;
};

inline Fixture make_fixture(std::size_t positives, std::size_t decoys, std::uint64_t seed, std::size_t d_w = 100,
                            LengthLimits limits = {50, 150}, std::size_t min_tokens = 10, std::size_t max_tokens = 30) {
  SynthSpec spec;
  count_for(spec.positives, EntityKind::kSize) = positives;
  count_for(spec.decoys, EntityKind::kSize) = decoys;
  spec.one_item_per_document = true;
  spec.min_tokens = min_tokens;
  spec.max_tokens = max_tokens;
  spec.seed = seed;
  Fixture f;
  Dataset corpus = synth_corpus(spec).dataset;
  for (auto& doc : corpus.documents) doc = attach_linear_chain(doc);
  f.dataset = normalize_dataset(split_subtasks(corpus)[2].second, limits);
  f.vocab = Vocabulary::build(f.dataset.documents);
  f.embeddings = random_embeddings(f.vocab, d_w, seed + 1);
  f.graphs = build_corpus_graphs(f.dataset.documents, f.vocab, f.embeddings, {0.9, 20});
  f.data = prepare_data(f.dataset, f.vocab, &f.graphs);
  return f;
}

}  // namespace bioie::testing
