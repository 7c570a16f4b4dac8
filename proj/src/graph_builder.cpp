#include "emograph/graph_builder.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <set>
#include <thread>

#include <nlohmann/json.hpp>

#include "emograph/errors.hpp"

namespace emograph {

namespace {
using json = nlohmann::json;
}

const char* to_string(NodeKind kind) {
  switch (kind) {
    case NodeKind::kWord: return "word";
    case NodeKind::kEmotion: return "emotion";
    case NodeKind::kMood: return "mood";
    case NodeKind::kRelated: return "related";
  }
  return "word";
}

std::optional<NodeKind> node_kind_from_string(std::string_view s) {
  if (s == "word") return NodeKind::kWord;
  if (s == "emotion") return NodeKind::kEmotion;
  if (s == "mood") return NodeKind::kMood;
  if (s == "related") return NodeKind::kRelated;
  return std::nullopt;
}

namespace {

class GraphAssembler {
 public:
  explicit GraphAssembler(const EmbeddingTable& embeddings) : embeddings_(embeddings) {}

  int node(NodeKind kind, const std::string& label) {
    const auto key = std::make_pair(kind, label);
    const auto it = ids_.find(key);
    if (it != ids_.end()) return it->second;
    const int id = static_cast<int>(graph_.nodes.size());
    graph_.nodes.push_back({id, kind, label, embeddings_.get(label)});
    ids_.emplace(key, id);
    return id;
  }

  void edge(int src, int dst, double weight) {
    if (src == dst) return;
    if (!edge_keys_.insert(std::make_pair(src, dst)).second) return;
    graph_.edges.push_back({src, dst, weight});
  }

  void bidirectional(int a, int b, double weight) {
    edge(a, b, weight);
    edge(b, a, weight);
  }

  ContextGraph take() { return std::move(graph_); }

 private:
  const EmbeddingTable& embeddings_;
  ContextGraph graph_;
  std::map<std::pair<NodeKind, std::string>, int> ids_;
  std::set<std::pair<int, int>> edge_keys_;
};

std::string sanitize_id(const std::string& id) {
  std::string out;
  out.reserve(id.size());
  for (char c : id) {
    const bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') ||
                    (c >= '0' && c <= '9') || c == '-' || c == '_';
    out += ok ? c : '_';
  }
  return out.empty() ? std::string("_") : out;
}

}  // namespace

std::optional<ContextGraph> build_graph(const NormalizedCaption& caption,
                                        const CooccurrenceModel& cooccurrence,
                                        const LexiconStores& stores) {
  // Deduplicate valid words (first occurrence wins) and drop the ones the
  // lexicon cannot resolve even through synonyms.
  std::vector<std::pair<std::string, LexiconEntry>> words;
  for (const std::string& word : caption.valid_words) {
    if (std::any_of(words.begin(), words.end(),
                    [&word](const auto& w) { return w.first == word; })) {
      continue;
    }
    std::optional<LexiconEntry> entry =
        lookup_sentic(word, stores.lexicon, stores.synonyms, stores.embeddings);
    if (entry) words.emplace_back(word, std::move(*entry));
  }
  if (words.empty()) return std::nullopt;

  GraphAssembler g(stores.embeddings);
  std::vector<int> word_ids;
  word_ids.reserve(words.size());
  for (const auto& [word, entry] : words) word_ids.push_back(g.node(NodeKind::kWord, word));

  // Emotion nodes and their conditional-probability edges.
  std::vector<int> emotion_ids;
  emotion_ids.reserve(cooccurrence.emotions.size());
  for (const std::string& emotion : cooccurrence.emotions) {
    emotion_ids.push_back(g.node(NodeKind::kEmotion, emotion));
  }
  for (std::size_t w = 0; w < words.size(); ++w) {
    const auto dist = emotion_distribution(cooccurrence, words[w].first);
    for (std::size_t j = 0; j < emotion_ids.size(); ++j) {
      g.bidirectional(word_ids[w], emotion_ids[j], dist[j]);
    }
  }

  // Mood tags (weight: the word's pleasantness) and first-level related
  // concepts (weight: the word's polarity).
  struct LevelOne {
    int id;
    std::string label;
  };
  std::vector<LevelOne> level_one;
  std::set<int> level_one_seen;
  for (std::size_t w = 0; w < words.size(); ++w) {
    const LexiconEntry& entry = words[w].second;
    for (const std::string& mood : entry.mood_tags) {
      g.bidirectional(word_ids[w], g.node(NodeKind::kMood, mood), entry.pleasantness);
    }
    for (const std::string& related : entry.related) {
      const int id = g.node(NodeKind::kRelated, related);
      g.bidirectional(word_ids[w], id, entry.polarity);
      if (level_one_seen.insert(id).second) level_one.push_back({id, related});
    }
  }

  // Second level: each first-level concept that resolves in the lexicon
  // contributes its own five related concepts, with edges carrying the
  // first-level concept's polarity. Unresolvable ones stay leaf nodes.
  for (const LevelOne& first : level_one) {
    const std::optional<LexiconEntry> entry =
        lookup_sentic(first.label, stores.lexicon, stores.synonyms, stores.embeddings);
    if (!entry) continue;
    for (const std::string& related : entry->related) {
      g.bidirectional(first.id, g.node(NodeKind::kRelated, related), entry->polarity);
    }
  }

  // Word-word edges, normalized by the source word's total count, so the two
  // directions generally carry different weights. Zero-weight pairs are
  // omitted, as are words unseen at mining time.
  for (std::size_t a = 0; a < words.size(); ++a) {
    for (std::size_t b = 0; b < words.size(); ++b) {
      if (a == b) continue;
      if (!cooccurrence.index_of(words[a].first) || !cooccurrence.index_of(words[b].first)) {
        continue;
      }
      const double weight = word_pair_weight(cooccurrence, words[a].first, words[b].first);
      if (weight != 0.0) g.edge(word_ids[a], word_ids[b], weight);
    }
  }

  ContextGraph graph = g.take();
  graph.caption_id = caption.id;
  return graph;
}

std::string serialize_graph(const ContextGraph& graph) {
  nlohmann::ordered_json doc;
  doc["caption_id"] = graph.caption_id;
  nlohmann::ordered_json nodes = nlohmann::ordered_json::array();
  for (const GraphNode& node : graph.nodes) {
    nlohmann::ordered_json n;
    n["id"] = node.id;
    n["kind"] = to_string(node.kind);
    n["label"] = node.label;
    n["feature"] = node.feature;
    nodes.push_back(std::move(n));
  }
  doc["nodes"] = std::move(nodes);
  nlohmann::ordered_json edges = nlohmann::ordered_json::array();
  for (const GraphEdge& edge : graph.edges) {
    nlohmann::ordered_json e;
    e["src"] = edge.src;
    e["dst"] = edge.dst;
    e["weight"] = edge.weight;
    edges.push_back(std::move(e));
  }
  doc["edges"] = std::move(edges);
  return doc.dump();
}

ContextGraph parse_graph(const std::string& bytes) {
  json doc;
  try {
    doc = json::parse(bytes);
  } catch (const json::exception& e) {
    throw FormatError(std::string("graph: ") + e.what());
  }

  ContextGraph graph;
  try {
    graph.caption_id = doc.at("caption_id").get<std::string>();
    int expected_id = 0;
    for (const auto& n : doc.at("nodes")) {
      GraphNode node;
      node.id = n.at("id").get<int>();
      if (node.id != expected_id++) throw FormatError("graph: node ids must be dense 0..N-1");
      const auto kind = node_kind_from_string(n.at("kind").get<std::string>());
      if (!kind) throw FormatError("graph: unknown node kind " + n.at("kind").dump());
      node.kind = *kind;
      node.label = n.at("label").get<std::string>();
      node.feature = n.at("feature").get<std::vector<double>>();
      if (node.feature.size() != kEmbeddingDim) {
        throw FormatError("graph: node feature must have 50 components");
      }
      graph.nodes.push_back(std::move(node));
    }
    const int n = static_cast<int>(graph.nodes.size());
    for (const auto& e : doc.at("edges")) {
      GraphEdge edge;
      edge.src = e.at("src").get<int>();
      edge.dst = e.at("dst").get<int>();
      edge.weight = e.at("weight").get<double>();
      if (edge.src < 0 || edge.src >= n || edge.dst < 0 || edge.dst >= n) {
        throw FormatError("graph: edge endpoint " + std::to_string(edge.src) + "->" +
                          std::to_string(edge.dst) + " outside node range");
      }
      graph.edges.push_back(edge);
    }
  } catch (const json::exception& e) {
    throw FormatError(std::string("graph: ") + e.what());
  }
  return graph;
}

void save_graph(const ContextGraph& graph, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  out << serialize_graph(graph) << '\n';
}

ContextGraph load_graph(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open " + path.string());
  std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return parse_graph(bytes);
}

void save_manifest(const BuildManifest& manifest, const std::filesystem::path& path,
                   const nlohmann::json& meta) {
  nlohmann::ordered_json doc;
  doc["meta"] = meta;
  json built = json::array();
  for (const auto& entry : manifest.built) {
    built.push_back({{"caption_id", entry.caption_id}, {"file", entry.file}});
  }
  doc["built"] = std::move(built);
  doc["skipped"] = manifest.skipped;
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  out << doc.dump(2) << '\n';
}

BuildManifest load_manifest(const std::filesystem::path& path, nlohmann::json* meta_out) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open " + path.string());
  json doc;
  try {
    in >> doc;
    BuildManifest manifest;
    if (meta_out != nullptr && doc.contains("meta")) *meta_out = doc.at("meta");
    for (const auto& entry : doc.at("built")) {
      manifest.built.push_back(
          {entry.at("caption_id").get<std::string>(), entry.at("file").get<std::string>()});
    }
    manifest.skipped = doc.at("skipped").get<std::vector<std::string>>();
    return manifest;
  } catch (const json::exception& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

BuildManifest build_corpus_graphs(const std::vector<NormalizedCaption>& corpus,
                                  const CooccurrenceModel& cooccurrence,
                                  const LexiconStores& stores,
                                  const std::filesystem::path& out_dir, int threads) {
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) throw Error("cannot create " + out_dir.string() + ": " + ec.message());

  std::vector<std::optional<ContextGraph>> graphs(corpus.size());
  auto build_range = [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) graphs[i] = build_graph(corpus[i], cooccurrence, stores);
  };

  if (threads <= 1 || corpus.size() < 2) {
    build_range(0, corpus.size());
  } else {
    const std::size_t n_workers = std::min<std::size_t>(static_cast<std::size_t>(threads), corpus.size());
    std::vector<std::thread> workers;
    const std::size_t chunk = (corpus.size() + n_workers - 1) / n_workers;
    for (std::size_t w = 0; w < n_workers; ++w) {
      const std::size_t begin = w * chunk;
      const std::size_t end = std::min(corpus.size(), begin + chunk);
      if (begin < end) workers.emplace_back(build_range, begin, end);
    }
    for (std::thread& t : workers) t.join();
  }

  BuildManifest manifest;
  std::set<std::string> filenames;
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    if (!graphs[i]) {
      manifest.skipped.push_back(corpus[i].id);
      continue;
    }
    const std::string file = sanitize_id(corpus[i].id) + ".json";
    if (!filenames.insert(file).second) {
      throw Error("caption ids collide after filename sanitization: " + file);
    }
    save_graph(*graphs[i], out_dir / file);
    manifest.built.push_back({corpus[i].id, file});
  }
  std::sort(manifest.built.begin(), manifest.built.end(),
            [](const auto& a, const auto& b) { return a.caption_id < b.caption_id; });
  std::sort(manifest.skipped.begin(), manifest.skipped.end());
  return manifest;
}

}  // namespace emograph
