#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <nlohmann/json.hpp>

#include <filesystem>
#include <fstream>
#include <map>
#include <set>

#include "emograph/errors.hpp"
#include "emograph/graph_builder.hpp"
#include "test_support.hpp"

using namespace emograph;
namespace fs = std::filesystem;

namespace {

// Micro-fixture: "beach" with five related concepts, each with five unique
// second-level concepts. No label collides with any other label.
test::FixtureWorld beach_world() {
  test::FixtureWorld world;
  world.add_concept("beach", {"joy", "serenity"}, 0.8, 0.7, {"sand", "sea", "sun", "coast", "shore"});
  world.add_concept("sand", {"calmness", "joy"}, 0.5, 0.11, {"grain", "dune", "desert", "castle", "bucket"});
  world.add_concept("sea", {"bliss", "joy"}, 0.6, 0.22, {"water", "salt", "tide", "fish", "boat"});
  world.add_concept("sun", {"delight", "joy"}, 0.7, 0.33, {"light", "heat", "summer", "sky", "dawn"});
  world.add_concept("coast", {"serenity", "calmness"}, 0.4, 0.44, {"cliff", "bay", "harbor", "lighthouse", "cape"});
  world.add_concept("shore", {"calmness", "bliss"}, 0.3, 0.55, {"pebble", "seaweed", "driftwood", "gull", "foam"});
  return world;
}

CooccurrenceModel beach_cooccurrence() {
  // beach co-occurs 3x with category 0 and once with category 1.
  return mine({test::make_normalized("c1", {"beach", "beach", "beach"}, {0}),
               test::make_normalized("c2", {"beach"}, {1})},
              2);
}

std::map<std::pair<int, int>, double> edge_map(const ContextGraph& g) {
  std::map<std::pair<int, int>, double> m;
  for (const GraphEdge& e : g.edges) m[{e.src, e.dst}] = e.weight;
  return m;
}

const GraphNode* find_node(const ContextGraph& g, NodeKind kind, const std::string& label) {
  for (const GraphNode& n : g.nodes) {
    if (n.kind == kind && n.label == label) return &n;
  }
  return nullptr;
}

}  // namespace

TEST_CASE("single-word census: 59 nodes with the expected weights") {
  const test::FixtureWorld world = beach_world();
  const CooccurrenceModel co = beach_cooccurrence();
  const auto graph = build_graph(test::make_normalized("x", {"beach"}), co,
                                 {world.lexicon, world.synonyms, world.embeddings});
  REQUIRE(graph.has_value());

  // 1 word + 26 emotions + 2 moods + 5 related + 25 second-level.
  CHECK(graph->nodes.size() == 59);
  for (std::size_t i = 0; i < graph->nodes.size(); ++i) {
    CHECK(graph->nodes[i].id == static_cast<int>(i));
    CHECK(graph->nodes[i].feature.size() == kEmbeddingDim);
  }

  const GraphNode* beach = find_node(*graph, NodeKind::kWord, "beach");
  REQUIRE(beach != nullptr);
  CHECK(beach->feature == world.embeddings.get("beach"));

  const auto edges = edge_map(*graph);

  // Emotion edges follow the mined distribution (0.75, 0.25, 0, ...), in both
  // directions, one edge pair per category.
  int emotion_nodes = 0;
  double emotion_sum = 0.0;
  for (const GraphNode& n : graph->nodes) {
    if (n.kind != NodeKind::kEmotion) continue;
    ++emotion_nodes;
    const double out = edges.at({beach->id, n.id});
    CHECK(out == edges.at({n.id, beach->id}));
    emotion_sum += out;
    if (n.label == emotion_categories()[0]) CHECK(out == doctest::Approx(0.75));
    else if (n.label == emotion_categories()[1]) CHECK(out == doctest::Approx(0.25));
    else CHECK(out == 0.0);
  }
  CHECK(emotion_nodes == 26);
  CHECK(emotion_sum == doctest::Approx(1.0).epsilon(1e-9));

  // Moods carry the word's pleasantness, first-level related its polarity.
  for (const char* mood : {"joy", "serenity"}) {
    const GraphNode* n = find_node(*graph, NodeKind::kMood, mood);
    REQUIRE(n != nullptr);
    CHECK(edges.at({beach->id, n->id}) == 0.8);
    CHECK(edges.at({n->id, beach->id}) == 0.8);
  }
  const std::map<std::string, double> level1_polarity = {
      {"sand", 0.11}, {"sea", 0.22}, {"sun", 0.33}, {"coast", 0.44}, {"shore", 0.55}};
  for (const auto& [label, polarity] : level1_polarity) {
    const GraphNode* r = find_node(*graph, NodeKind::kRelated, label);
    REQUIRE(r != nullptr);
    CHECK(edges.at({beach->id, r->id}) == 0.7);
    // Second-level edges carry the first-level concept's polarity.
    const LexiconEntry* entry = world.lexicon.find(label);
    for (const std::string& second : entry->related) {
      const GraphNode* rr = find_node(*graph, NodeKind::kRelated, second);
      REQUIRE(rr != nullptr);
      CHECK(edges.at({r->id, rr->id}) == polarity);
      CHECK(edges.at({rr->id, r->id}) == polarity);
    }
  }

  // 26*2 emotion + 2*2 mood + 5*2 related + 25*2 second level.
  CHECK(graph->edges.size() == 116);
}

TEST_CASE("caption with no surviving words is empty") {
  const test::FixtureWorld world = beach_world();
  const CooccurrenceModel co = beach_cooccurrence();
  CHECK(!build_graph(test::make_normalized("x", {"quasar", "pulsar"}), co,
                     {world.lexicon, world.synonyms, world.embeddings})
             .has_value());
}

TEST_CASE("duplicate words merge into one node") {
  const test::FixtureWorld world = beach_world();
  const CooccurrenceModel co = beach_cooccurrence();
  const auto graph = build_graph(test::make_normalized("x", {"beach", "beach"}), co,
                                 {world.lexicon, world.synonyms, world.embeddings});
  REQUIRE(graph.has_value());
  CHECK(graph->nodes.size() == 59);
}

TEST_CASE("two words sharing a mood node") {
  test::FixtureWorld world;
  world.add_concept("hug", {"joy", "fondness"}, 0.9, 0.8, {"r1", "r2", "r3", "r4", "r5"});
  world.add_concept("kiss", {"joy", "bliss"}, 0.85, 0.75, {"q1", "q2", "q3", "q4", "q5"});
  const auto co = mine({test::make_normalized("c", {"hug", "kiss"}, {0})}, 2);

  const auto graph = build_graph(test::make_normalized("x", {"hug", "kiss"}), co,
                                 {world.lexicon, world.synonyms, world.embeddings});
  REQUIRE(graph.has_value());

  int joy_nodes = 0;
  for (const GraphNode& n : graph->nodes) {
    if (n.kind == NodeKind::kMood && n.label == "joy") ++joy_nodes;
  }
  CHECK(joy_nodes == 1);

  const GraphNode* joy = find_node(*graph, NodeKind::kMood, "joy");
  const GraphNode* hug = find_node(*graph, NodeKind::kWord, "hug");
  const GraphNode* kiss = find_node(*graph, NodeKind::kWord, "kiss");
  const auto edges = edge_map(*graph);
  CHECK(edges.at({hug->id, joy->id}) == 0.9);
  CHECK(edges.at({kiss->id, joy->id}) == 0.85);

  // Word-word edges are normalized by the source side: both words appear
  // once, co-occur once.
  CHECK(edges.at({hug->id, kiss->id}) == doctest::Approx(1.0));
  CHECK(edges.at({kiss->id, hug->id}) == doctest::Approx(1.0));
}

TEST_CASE("words unseen by mining get uniform emotion edges and no word-word edge") {
  test::FixtureWorld world;
  world.add_concept("hug", {"joy", "fondness"}, 0.9, 0.8, {"r1", "r2", "r3", "r4", "r5"});
  world.add_concept("ghost", {"terror", "anxiety"}, -0.7, -0.6, {"g1", "g2", "g3", "g4", "g5"});
  const auto co = mine({test::make_normalized("c", {"hug"}, {0})}, 2);

  const auto graph = build_graph(test::make_normalized("x", {"hug", "ghost"}), co,
                                 {world.lexicon, world.synonyms, world.embeddings});
  REQUIRE(graph.has_value());
  const GraphNode* ghost = find_node(*graph, NodeKind::kWord, "ghost");
  REQUIRE(ghost != nullptr);
  const auto edges = edge_map(*graph);
  double sum = 0.0;
  for (const GraphNode& n : graph->nodes) {
    if (n.kind != NodeKind::kEmotion) continue;
    CHECK(edges.at({ghost->id, n.id}) == doctest::Approx(1.0 / 26));
    sum += edges.at({ghost->id, n.id});
  }
  CHECK(sum == doctest::Approx(1.0).epsilon(1e-9));
  const GraphNode* hug = find_node(*graph, NodeKind::kWord, "hug");
  CHECK(edges.find({hug->id, ghost->id}) == edges.end());
  CHECK(edges.find({ghost->id, hug->id}) == edges.end());
}

TEST_CASE("dropped first-level related words stay leaves") {
  test::FixtureWorld world;
  world.add_concept("beach", {"joy", "serenity"}, 0.8, 0.7, {"sand", "x1", "x2", "x3", "x4"});
  world.add_concept("sand", {"calmness", "joy"}, 0.5, 0.11, {"grain", "dune", "desert", "castle", "bucket"});
  const auto co = beach_cooccurrence();

  const auto graph = build_graph(test::make_normalized("x", {"beach"}), co,
                                 {world.lexicon, world.synonyms, world.embeddings});
  REQUIRE(graph.has_value());
  // 1 word + 26 + 2 moods + 5 related + only sand's 5 second-level concepts.
  CHECK(graph->nodes.size() == 39);
  const GraphNode* x1 = find_node(*graph, NodeKind::kRelated, "x1");
  REQUIRE(x1 != nullptr);
  int x1_degree = 0;
  for (const GraphEdge& e : graph->edges) {
    if (e.src == x1->id || e.dst == x1->id) ++x1_degree;
  }
  CHECK(x1_degree == 2);  // one edge pair to the word node only
}

TEST_CASE("census formula holds on generated fixture lexicons") {
  Rng rng(31337);
  for (int trial = 0; trial < 25; ++trial) {
    test::FixtureWorld world;
    const int n_words = 1 + static_cast<int>(rng.below(5));
    std::vector<std::string> words;
    std::set<std::string> expected_labels;
    std::set<std::string> used;
    auto fresh = [&](const std::string& base) {
      for (;;) {
        std::string label = base + "_" + std::to_string(rng.next_u64() % 1000000);
        if (used.insert(label).second) return label;
      }
    };
    for (int w = 0; w < n_words; ++w) {
      const std::string word = "w" + std::to_string(trial) + "_" + std::to_string(w);
      std::array<std::string, 2> moods{fresh("m"), fresh("m")};
      expected_labels.insert(moods.begin(), moods.end());
      std::array<std::string, 5> related;
      for (auto& r : related) {
        r = fresh("r");
        expected_labels.insert(r);
      }
      world.add_concept(word, moods, rng.uniform(-1, 1), rng.uniform(-1, 1), related);
      words.push_back(word);
      for (const auto& r : related) {
        std::array<std::string, 5> second;
        for (auto& s : second) {
          s = fresh("s");
          expected_labels.insert(s);
        }
        world.add_concept(r, {fresh("mm"), fresh("mm")}, rng.uniform(-1, 1), rng.uniform(-1, 1),
                          second);
      }
    }

    const auto co = mine({test::make_normalized("c", words, {0})}, 2);
    const auto graph = build_graph(test::make_normalized("x", words), co,
                                   {world.lexicon, world.synonyms, world.embeddings});
    REQUIRE(graph.has_value());

    // Independent enumeration: words + emotions + every unique mood/related
    // label introduced above. It must agree with the closed-form census.
    const std::size_t expected = static_cast<std::size_t>(n_words) + 26 + expected_labels.size();
    CHECK(graph->nodes.size() == expected);
    CHECK(graph->nodes.size() == static_cast<std::size_t>(33 * n_words + 26));

    for (const GraphEdge& e : graph->edges) {
      CHECK(std::isfinite(e.weight));
      const NodeKind skind = graph->nodes[static_cast<std::size_t>(e.src)].kind;
      const NodeKind dkind = graph->nodes[static_cast<std::size_t>(e.dst)].kind;
      if (skind == NodeKind::kEmotion || dkind == NodeKind::kEmotion) {
        CHECK(e.weight >= 0.0);
        CHECK(e.weight <= 1.0);
      } else if (skind == NodeKind::kWord && dkind == NodeKind::kWord) {
        CHECK(e.weight >= 0.0);
        CHECK(e.weight <= 1.0);
      } else {
        CHECK(e.weight >= -1.0);
        CHECK(e.weight <= 1.0);
      }
    }
  }
}

TEST_CASE("serialize/parse round-trip and format errors") {
  const test::FixtureWorld world = beach_world();
  const CooccurrenceModel co = beach_cooccurrence();
  const auto graph = build_graph(test::make_normalized("cap-1", {"beach"}), co,
                                 {world.lexicon, world.synonyms, world.embeddings});
  REQUIRE(graph.has_value());

  const std::string bytes = serialize_graph(*graph);
  const ContextGraph parsed = parse_graph(bytes);
  CHECK(parsed == *graph);

  CHECK_THROWS_AS(parse_graph("{"), FormatError);
  CHECK_THROWS_AS(parse_graph(R"({"caption_id":"x","nodes":[],"edges":[{"src":0,"dst":1,"weight":1.0}]})"),
                  FormatError);

  // Dangling endpoint: edge references node id N.
  nlohmann::json doc = nlohmann::json::parse(bytes);
  doc["edges"].push_back({{"src", 0}, {"dst", static_cast<int>(graph->nodes.size())}, {"weight", 0.5}});
  CHECK_THROWS_AS(parse_graph(doc.dump()), FormatError);
}

TEST_CASE("build_corpus_graphs writes deterministic files and a manifest") {
  const test::FixtureWorld world = beach_world();
  const CooccurrenceModel co = beach_cooccurrence();
  const std::vector<NormalizedCaption> corpus = {
      test::make_normalized("cap-b", {"beach"}, {0}),
      test::make_normalized("cap-a", {"sand", "sea"}, {1}),
      test::make_normalized("cap-empty", {"quasar"}, {2}),
  };

  const fs::path dir1 = test::make_temp_dir("graphs1");
  const fs::path dir2 = test::make_temp_dir("graphs2");
  const LexiconStores stores{world.lexicon, world.synonyms, world.embeddings};

  const BuildManifest m1 = build_corpus_graphs(corpus, co, stores, dir1, 1);
  REQUIRE(m1.built.size() == 2);
  CHECK(m1.built[0].caption_id == "cap-a");  // sorted by caption id
  CHECK(m1.built[1].caption_id == "cap-b");
  CHECK(m1.skipped == std::vector<std::string>{"cap-empty"});

  const BuildManifest m3 = build_corpus_graphs(corpus, co, stores, dir2, 3);
  CHECK(m3.built.size() == m1.built.size());
  for (std::size_t i = 0; i < m1.built.size(); ++i) {
    std::ifstream f1(dir1 / m1.built[i].file), f2(dir2 / m3.built[i].file);
    const std::string b1((std::istreambuf_iterator<char>(f1)), std::istreambuf_iterator<char>());
    const std::string b2((std::istreambuf_iterator<char>(f2)), std::istreambuf_iterator<char>());
    CHECK(b1 == b2);
    CHECK(!b1.empty());
  }

  const fs::path manifest_file = dir1 / "manifest.json";
  save_manifest(m1, manifest_file, {{"config_hash", "f00d"}});
  nlohmann::json meta;
  const BuildManifest loaded = load_manifest(manifest_file, &meta);
  CHECK(loaded.skipped == m1.skipped);
  REQUIRE(loaded.built.size() == m1.built.size());
  CHECK(loaded.built[0].caption_id == m1.built[0].caption_id);
  CHECK(meta.at("config_hash") == "f00d");

  CHECK(build_corpus_graphs({}, co, stores, dir1, 1).built.empty());

  fs::remove_all(dir1);
  fs::remove_all(dir2);
}

TEST_CASE("caption ids colliding after sanitization are rejected") {
  const test::FixtureWorld world = beach_world();
  const CooccurrenceModel co = beach_cooccurrence();
  const std::vector<NormalizedCaption> corpus = {
      test::make_normalized("cap/1", {"beach"}, {0}),
      test::make_normalized("cap_1", {"sand"}, {1}),
  };
  const fs::path dir = test::make_temp_dir("graphs_collide");
  CHECK_THROWS_WITH_AS(
      build_corpus_graphs(corpus, co, {world.lexicon, world.synonyms, world.embeddings}, dir, 1),
      doctest::Contains("collide"), Error);
  fs::remove_all(dir);
}

TEST_CASE("graphs from the shipped assets are well-formed") {
  const NormalizationConfig norm = test::default_normalization();
  const SenticLexicon lex = SenticLexicon::load(test::data_dir() / "senticnet.csv");
  const SynonymTable syn = SynonymTable::load(test::data_dir() / "synonyms.csv");
  const EmbeddingTable emb = EmbeddingTable::load(test::data_dir() / "embeddings.txt", 5);

  const auto captions = load_captions(test::data_dir() / "fixtures/captions_train.jsonl");
  std::vector<NormalizedCaption> corpus;
  for (const Caption& c : captions) corpus.push_back(normalize(c, norm));
  const auto co = mine(corpus, 3);

  int built = 0;
  for (const NormalizedCaption& nc : corpus) {
    const auto graph = build_graph(nc, co, {lex, syn, emb});
    if (!graph) continue;
    ++built;
    int word_nodes = 0, emotion_nodes = 0;
    for (const GraphNode& n : graph->nodes) {
      if (n.kind == NodeKind::kWord) ++word_nodes;
      if (n.kind == NodeKind::kEmotion) ++emotion_nodes;
    }
    CHECK(emotion_nodes == 26);
    CHECK(word_nodes >= 1);

    // Every word node's outgoing emotion weights sum to one.
    std::map<int, double> emotion_out;
    for (const GraphEdge& e : graph->edges) {
      if (graph->nodes[static_cast<std::size_t>(e.src)].kind == NodeKind::kWord &&
          graph->nodes[static_cast<std::size_t>(e.dst)].kind == NodeKind::kEmotion) {
        emotion_out[e.src] += e.weight;
      }
    }
    for (const auto& [node, sum] : emotion_out) {
      CHECK(sum == doctest::Approx(1.0).epsilon(1e-9));
    }
    CHECK(static_cast<int>(emotion_out.size()) == word_nodes);
  }
  CHECK(built >= 35);  // the 40 fixtures contain one deliberate all-stopword caption
}
