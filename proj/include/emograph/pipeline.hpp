#pragma once

#include <vector>

#include "emograph/cooccurrence.hpp"
#include "emograph/gin_model.hpp"
#include "emograph/graph_builder.hpp"
#include "emograph/lexicon.hpp"
#include "emograph/text_corpus.hpp"

namespace emograph {

// Everything needed to turn raw caption text into a prediction.
struct Pipeline {
  NormalizationConfig normalization;
  CooccurrenceModel cooccurrence;
  SenticLexicon lexicon;
  SynonymTable synonyms;
  EmbeddingTable embeddings;
  GinModel model;

  LexiconStores stores() const { return {lexicon, synonyms, embeddings}; }
};

// normalize -> build_graph -> forward (eval mode). Captions that yield no
// graph come back as the flagged constant prediction (all 0.5).
Prediction predict_one(const Caption& caption, const Pipeline& pipeline);
std::vector<Prediction> predict(const std::vector<Caption>& captions, const Pipeline& pipeline,
                                int threads = 1);

}  // namespace emograph
