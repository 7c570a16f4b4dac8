#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>

#include <nlohmann/json.hpp>

#include "emograph/errors.hpp"
#include "emograph/text_corpus.hpp"
#include "test_support.hpp"

using namespace emograph;
namespace fs = std::filesystem;

TEST_CASE("tokenize splits on whitespace and punctuation") {
  CHECK(tokenize("A man, sitting.") == std::vector<std::string>{"a", "man", "sitting"});
  CHECK(tokenize("") == std::vector<std::string>{});
  CHECK(tokenize("BEACH!!!") == std::vector<std::string>{"beach"});
  CHECK(tokenize("don't stop") == std::vector<std::string>{"don", "t", "stop"});
  CHECK(tokenize("42nd street") == std::vector<std::string>{"nd", "street"});
}

TEST_CASE("tokenize output is lowercase alphabetic") {
  Rng rng(2024);
  const std::string alphabet = "aZ0.!? -_'é";
  for (int trial = 0; trial < 200; ++trial) {
    std::string text;
    for (int i = 0; i < 30; ++i) text += alphabet[rng.below(alphabet.size())];
    for (const std::string& token : tokenize(text)) {
      CHECK(!token.empty());
      for (char c : token) {
        CHECK(c >= 'a');
        CHECK(c <= 'z');
      }
    }
  }
}

TEST_CASE("normalize applies the default lists") {
  const NormalizationConfig cfg = test::default_normalization();

  Caption c;
  c.text = "a man sitting on a surfboard in the ocean";
  CHECK(normalize(c, cfg).valid_words == std::vector<std::string>{"sit", "surfboard", "ocean"});

  c.text = "it is on the";
  CHECK(normalize(c, cfg).valid_words.empty());

  c.text = "two women riding horses";
  CHECK(normalize(c, cfg).valid_words == std::vector<std::string>{"ride", "horse"});
}

TEST_CASE("lemma outputs are re-checked against both lists") {
  NormalizationConfig cfg;
  cfg.banned_nouns = {"man"};
  cfg.stopwords = {"the"};
  cfg.lemmas = {{"men", "man"}, {"these", "the"}, {"walking", "walk"}};

  Caption c;
  c.text = "these men walking";
  // "men" collapses onto the banned singular, "these" onto a stop word.
  CHECK(normalize(c, cfg).valid_words == std::vector<std::string>{"walk"});
}

TEST_CASE("default banned nouns cover the person words") {
  const NormalizationConfig cfg = test::default_normalization();
  for (const char* word : {"man", "woman", "girl", "boy", "men", "women", "girls", "boys",
                           "person", "people"}) {
    CHECK(cfg.banned_nouns.contains(word));
  }
  CHECK(cfg.stopwords.size() > 150);
}

TEST_CASE("normalize keeps order and duplicates") {
  const NormalizationConfig cfg = test::default_normalization();
  Caption c;
  c.text = "beach waves and the beach sun";
  CHECK(normalize(c, cfg).valid_words == std::vector<std::string>{"beach", "wave", "beach", "sun"});
}

TEST_CASE("normalize output never contains listed words") {
  const NormalizationConfig cfg = test::default_normalization();
  Rng rng(11);
  std::vector<std::string> pool;
  for (const auto& w : cfg.stopwords) pool.push_back(w);
  for (const auto& w : cfg.banned_nouns) pool.push_back(w);
  pool.insert(pool.end(), {"beach", "horses", "riding", "storm", "puppies", "sitting", "unknownword"});
  std::sort(pool.begin(), pool.end());

  for (int trial = 0; trial < 100; ++trial) {
    Caption c;
    for (int i = 0; i < 12; ++i) c.text += pool[rng.below(pool.size())] + " ";
    const NormalizedCaption nc = normalize(c, cfg);
    for (const std::string& word : nc.valid_words) {
      CHECK(!cfg.stopwords.contains(word));
      CHECK(!cfg.banned_nouns.contains(word));
    }
  }
}

TEST_CASE("normalize is idempotent when lemmas are fixed points") {
  const NormalizationConfig cfg = test::default_normalization();
  // The shipped table must be chain-free for this to hold.
  for (const auto& [surface, lemma] : cfg.lemmas) {
    const auto it = cfg.lemmas.find(lemma);
    CHECK((it == cfg.lemmas.end() || it->second == lemma));
  }

  Rng rng(5);
  const std::vector<std::string> pool = {"a",      "man",   "sitting", "riding", "horses",
                                         "beach",  "waves", "storm",   "the",    "puppies",
                                         "crying", "on",    "two",     "women",  "surfing"};
  for (int trial = 0; trial < 100; ++trial) {
    Caption c;
    for (int i = 0; i < 10; ++i) c.text += pool[rng.below(pool.size())] + " ";
    const NormalizedCaption once = normalize(c, cfg);

    Caption again;
    for (const std::string& w : once.valid_words) again.text += w + " ";
    CHECK(normalize(again, cfg).valid_words == once.valid_words);
  }
}

TEST_CASE("load_captions parses caption-jsonl") {
  const fs::path dir = test::make_temp_dir("captions");
  const fs::path file = dir / "captions.jsonl";
  test::write_file(file,
                   R"({"id":"a","caption":"A man on a beach","labels":[14],"vad":[0.8,0.5,0.6]})"
                   "\n\n"
                   R"({"id":"b","caption":"Storm","labels":[1,15],"vad":[0.2,0.9,0.3]})"
                   "\n");

  const std::vector<Caption> captions = load_captions(file);
  REQUIRE(captions.size() == 2);
  CHECK(captions[0].id == "a");
  CHECK(captions[0].text == "A man on a beach");
  CHECK(captions[0].labels == std::set<int>{14});
  CHECK(captions[0].vad == std::array<double, 3>{0.8, 0.5, 0.6});
  CHECK(captions[1].labels == std::set<int>{1, 15});
  fs::remove_all(dir);
}

TEST_CASE("load_captions rejects bad rows") {
  const fs::path dir = test::make_temp_dir("captions_bad");

  SUBCASE("empty file gives empty list") {
    test::write_file(dir / "empty.jsonl", "");
    CHECK(load_captions(dir / "empty.jsonl").empty());
  }
  SUBCASE("malformed line names the line number") {
    test::write_file(dir / "bad.jsonl", "{\"id\":\"a\"\n");
    CHECK_THROWS_WITH_AS(load_captions(dir / "bad.jsonl"), doctest::Contains(":1:"), ParseError);
  }
  SUBCASE("label out of range") {
    test::write_file(dir / "label.jsonl",
                     R"({"id":"a","caption":"x","labels":[26],"vad":[0.5,0.5,0.5]})" "\n");
    CHECK_THROWS_AS(load_captions(dir / "label.jsonl"), DomainError);
  }
  SUBCASE("vad out of range") {
    test::write_file(dir / "vad.jsonl",
                     R"({"id":"a","caption":"x","labels":[0],"vad":[1.5,0.5,0.5]})" "\n");
    CHECK_THROWS_AS(load_captions(dir / "vad.jsonl"), DomainError);
  }
  SUBCASE("vad scale divides raw annotations") {
    test::write_file(dir / "scale.jsonl",
                     R"({"id":"a","caption":"x","labels":[0],"vad":[8.0,5.0,6.0]})" "\n");
    const auto captions = load_captions(dir / "scale.jsonl", 10.0);
    REQUIRE(captions.size() == 1);
    CHECK(captions[0].vad == std::array<double, 3>{0.8, 0.5, 0.6});
  }
  fs::remove_all(dir);
}

TEST_CASE("normalized corpus round-trips with meta") {
  const fs::path dir = test::make_temp_dir("normalized");
  const fs::path file = dir / "normalized.jsonl";

  std::vector<NormalizedCaption> corpus = {
      test::make_normalized("a", {"beach", "sun"}, {16, 19}, {0.8, 0.4, 0.6}),
      test::make_normalized("b", {}, {3}, {0.5, 0.5, 0.5}),
  };
  nlohmann::json meta = {{"config_hash", "cafe"}};
  write_normalized_corpus(file, corpus, meta);

  nlohmann::json meta_out;
  const auto loaded = read_normalized_corpus(file, &meta_out);
  REQUIRE(loaded.size() == 2);
  CHECK(meta_out.at("config_hash") == "cafe");
  CHECK(loaded[0].valid_words == corpus[0].valid_words);
  CHECK(loaded[0].labels == corpus[0].labels);
  CHECK(loaded[0].vad == corpus[0].vad);
  CHECK(loaded[1].valid_words.empty());
  fs::remove_all(dir);
}
