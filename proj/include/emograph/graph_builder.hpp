#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "emograph/cooccurrence.hpp"
#include "emograph/lexicon.hpp"
#include "emograph/text_corpus.hpp"

namespace emograph {

enum class NodeKind { kWord, kEmotion, kMood, kRelated };

const char* to_string(NodeKind kind);
std::optional<NodeKind> node_kind_from_string(std::string_view s);

struct GraphNode {
  int id = 0;
  NodeKind kind = NodeKind::kWord;
  std::string label;
  std::vector<double> feature;  // kEmbeddingDim components

  bool operator==(const GraphNode&) const = default;
};

struct GraphEdge {
  int src = 0;
  int dst = 0;
  double weight = 0.0;

  bool operator==(const GraphEdge&) const = default;
};

// Per-caption weighted context graph. Node ids are dense 0..N-1 in creation
// order; every logical connection is stored as two directed edges.
struct ContextGraph {
  std::string caption_id;
  std::vector<GraphNode> nodes;
  std::vector<GraphEdge> edges;

  bool operator==(const ContextGraph&) const = default;
};

struct LexiconStores {
  const SenticLexicon& lexicon;
  const SynonymTable& synonyms;
  const EmbeddingTable& embeddings;
};

// Builds the caption's context graph: word nodes for the deduplicated valid
// words that survive the lexicon lookup, the 26 emotion nodes with
// co-occurrence-normalized edge weights, mood and related-concept nodes
// weighted by the word's pleasantness/polarity, a second level of related
// concepts weighted by the first-level concept's polarity, and word-word
// edges weighted by source-normalized co-occurrence. nullopt when no valid
// word survives.
std::optional<ContextGraph> build_graph(const NormalizedCaption& caption,
                                        const CooccurrenceModel& cooccurrence,
                                        const LexiconStores& stores);

std::string serialize_graph(const ContextGraph& graph);
ContextGraph parse_graph(const std::string& bytes);

void save_graph(const ContextGraph& graph, const std::filesystem::path& path);
ContextGraph load_graph(const std::filesystem::path& path);

struct BuildManifest {
  struct Entry {
    std::string caption_id;
    std::string file;
  };
  std::vector<Entry> built;
  std::vector<std::string> skipped;
};

void save_manifest(const BuildManifest& manifest, const std::filesystem::path& path,
                   const nlohmann::json& meta);
BuildManifest load_manifest(const std::filesystem::path& path,
                            nlohmann::json* meta_out = nullptr);

// Writes one graph file per buildable caption into out_dir and returns the
// manifest (entries sorted by caption id). threads > 1 builds captions in a
// worker pool; output is identical either way.
BuildManifest build_corpus_graphs(const std::vector<NormalizedCaption>& corpus,
                                  const CooccurrenceModel& cooccurrence,
                                  const LexiconStores& stores,
                                  const std::filesystem::path& out_dir, int threads = 1);

}  // namespace emograph
