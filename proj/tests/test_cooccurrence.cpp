#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <nlohmann/json.hpp>

#include <filesystem>
#include <numeric>

#include "emograph/cooccurrence.hpp"
#include "emograph/errors.hpp"
#include "emograph/rng.hpp"
#include "test_support.hpp"

using namespace emograph;
namespace fs = std::filesystem;

namespace {

// Independent generator of random normalized corpora for property tests.
std::vector<NormalizedCaption> random_corpus(Rng& rng, int max_captions = 12) {
  const std::vector<std::string> pool = {"a", "b", "c", "d", "e", "f", "g", "h"};
  const auto n = 1 + rng.below(static_cast<std::uint64_t>(max_captions));
  std::vector<NormalizedCaption> corpus;
  for (std::uint64_t i = 0; i < n; ++i) {
    NormalizedCaption nc;
    nc.id = "c" + std::to_string(i);
    const auto len = rng.below(7);
    for (std::uint64_t j = 0; j < len; ++j) {
      nc.valid_words.push_back(pool[rng.below(pool.size())]);
    }
    const auto n_labels = rng.below(4);
    for (std::uint64_t j = 0; j < n_labels; ++j) {
      nc.labels.insert(static_cast<int>(rng.below(kNumEmotions)));
    }
    corpus.push_back(std::move(nc));
  }
  return corpus;
}

}  // namespace

TEST_CASE("mine counts the single-pair example") {
  const auto model = mine({test::make_normalized("x", {"beach", "sun"}, {19})}, 2);
  const int pleasure = 19;
  const int beach = *model.index_of("beach");
  const int sun = *model.index_of("sun");
  CHECK(model.word_emotion[beach][pleasure] == 1);
  CHECK(model.word_emotion[sun][pleasure] == 1);
  CHECK(model.word_word[beach].at(sun) == 1);
  CHECK(model.word_word[sun].at(beach) == 1);
}

TEST_CASE("window of one captures no pairs") {
  const auto model = mine({test::make_normalized("x", {"beach", "sun"}, {19})}, 1);
  CHECK(model.word_word[0].empty());
  CHECK(model.word_word[1].empty());
}

TEST_CASE("duplicate occurrences count per position") {
  // ["a","b","a"], s=3: position pairs (0,1), (0,2), (1,2); (0,2) is a
  // self-pair of "a" and is skipped, the two a-b pairs both count.
  const auto model = mine({test::make_normalized("x", {"a", "b", "a"}, {5})}, 3);
  const int a = *model.index_of("a");
  const int b = *model.index_of("b");
  CHECK(model.word_total[a] == 2);
  CHECK(model.word_total[b] == 1);
  CHECK(model.word_emotion[a][5] == 2);
  CHECK(model.word_word[a].at(b) == 2);
  CHECK(model.word_word[b].at(a) == 2);
  CHECK(model.word_word[a].find(a) == model.word_word[a].end());
}

TEST_CASE("mine validates arguments") {
  CHECK_THROWS_AS(mine({test::make_normalized("x", {"a"})}, 0), DomainError);
  CHECK_THROWS_AS(mine({}, 3), DomainError);
}

TEST_CASE("category prior is the label frequency") {
  const auto model = mine({test::make_normalized("1", {"a"}, {0, 1}),
                           test::make_normalized("2", {"b"}, {1}),
                           test::make_normalized("3", {}, {1, 3}),
                           test::make_normalized("4", {"a"}, {})},
                          3);
  CHECK(model.category_prior[0] == doctest::Approx(0.25));
  CHECK(model.category_prior[1] == doctest::Approx(0.75));
  CHECK(model.category_prior[3] == doctest::Approx(0.25));
  CHECK(model.category_prior[5] == 0.0);
}

TEST_CASE("emotion_distribution normalizes the row") {
  auto corpus = std::vector<NormalizedCaption>{
      test::make_normalized("1", {"w", "w", "w"}, {0}),
      test::make_normalized("2", {"w"}, {1}),
  };
  const auto model = mine(corpus, 2);
  const auto dist = emotion_distribution(model, "w");
  CHECK(dist[0] == doctest::Approx(0.75));  // counts (3,1,0,...)
  CHECK(dist[1] == doctest::Approx(0.25));
  for (int j = 2; j < kNumEmotions; ++j) CHECK(dist[j] == 0.0);
}

TEST_CASE("emotion_distribution degenerate row") {
  const auto model = mine({test::make_normalized("1", {"w"}, {0})}, 2);
  const auto dist = emotion_distribution(model, "w");
  CHECK(dist[0] == 1.0);
  for (int j = 1; j < kNumEmotions; ++j) CHECK(dist[j] == 0.0);
}

TEST_CASE("emotion_distribution uniform fallback") {
  const auto model = mine({test::make_normalized("1", {"w"}, {0})}, 2);
  SUBCASE("unknown word") {
    const auto dist = emotion_distribution(model, "nope");
    for (double p : dist) CHECK(p == doctest::Approx(1.0 / 26));
  }
  SUBCASE("known word with no labels seen") {
    const auto m2 = mine({test::make_normalized("1", {"w"}, {})}, 2);
    const auto dist = emotion_distribution(m2, "w");
    for (double p : dist) CHECK(p == doctest::Approx(1.0 / 26));
  }
}

TEST_CASE("word_pair_weight normalizes by the source word") {
  // One caption [a, b, b]: pairs (a,b) twice; totals a=1, b=2. The raw ratio
  // for a->b would be 2, capped to keep the weight a probability.
  const auto model = mine({test::make_normalized("1", {"a", "b", "b"}, {0})}, 3);
  CHECK(word_pair_weight(model, "a", "b") == 1.0);
  CHECK(word_pair_weight(model, "b", "a") == doctest::Approx(1.0));

  // Direction dependence: m_w[a][b]=2 with totals 4 and 2.
  const auto model2 = mine({test::make_normalized("1", {"a", "b"}, {}),
                            test::make_normalized("2", {"b", "a"}, {}),
                            test::make_normalized("3", {"a", "a"}, {})},
                           2);
  CHECK(word_pair_weight(model2, "a", "b") == doctest::Approx(0.5));
  CHECK(word_pair_weight(model2, "b", "a") == doctest::Approx(1.0));

  CHECK(word_pair_weight(model2, "a", "a") == 0.0);
  CHECK_THROWS_AS(word_pair_weight(model2, "a", "zzz"), LookupError);
}

TEST_CASE("mining properties over random corpora") {
  Rng rng(404);
  for (int trial = 0; trial < 60; ++trial) {
    auto corpus = random_corpus(rng);
    const auto model = mine(corpus, 1 + static_cast<int>(rng.below(4)));

    std::size_t occurrences = 0;
    for (const auto& nc : corpus) occurrences += nc.valid_words.size();
    CHECK(std::accumulate(model.word_total.begin(), model.word_total.end(), std::int64_t{0}) ==
          static_cast<std::int64_t>(occurrences));

    std::size_t max_labels = 0;
    for (const auto& nc : corpus) max_labels = std::max(max_labels, nc.labels.size());
    for (std::size_t i = 0; i < model.vocab.size(); ++i) {
      // m_w symmetry with zero diagonal.
      for (const auto& [j, count] : model.word_word[i]) {
        CHECK(j != static_cast<int>(i));
        CHECK(model.word_word[static_cast<std::size_t>(j)].at(static_cast<int>(i)) == count);
      }
      // m_c rows are bounded by occurrences times labels per caption.
      std::int64_t row_sum_max = model.word_total[i] * static_cast<std::int64_t>(max_labels);
      for (std::int64_t c : model.word_emotion[i]) CHECK(c <= row_sum_max);

      const auto dist = emotion_distribution(model, model.vocab[i]);
      double sum = 0.0;
      for (double p : dist) {
        CHECK(p >= 0.0);
        sum += p;
      }
      CHECK(sum == doctest::Approx(1.0).epsilon(1e-9));
    }

    // Permuting the corpus changes nothing but the vocab ordering.
    std::vector<NormalizedCaption> reversed(corpus.rbegin(), corpus.rend());
    const auto permuted = mine(reversed, model.window);
    REQUIRE(permuted.vocab.size() == model.vocab.size());
    for (std::size_t i = 0; i < model.vocab.size(); ++i) {
      const auto& word = model.vocab[i];
      CHECK(permuted.word_total[static_cast<std::size_t>(*permuted.index_of(word))] ==
            model.word_total[i]);
      CHECK(emotion_distribution(permuted, word) == emotion_distribution(model, word));
    }
    CHECK(permuted.category_prior == model.category_prior);
  }
}

TEST_CASE("save/load round-trips the model") {
  const fs::path dir = test::make_temp_dir("cooccur");
  const fs::path file = dir / "cooccur.json";

  const auto model = mine({test::make_normalized("x", {"beach", "sun"}, {19})}, 2);
  save_cooccurrence(model, file, {{"config_hash", "beef"}});

  nlohmann::json meta;
  const auto loaded = load_cooccurrence(file, &meta);
  CHECK(loaded == model);
  CHECK(meta.at("config_hash") == "beef");

  SUBCASE("empty file is a format error") {
    test::write_file(dir / "empty.json", "");
    CHECK_THROWS_AS(load_cooccurrence(dir / "empty.json"), FormatError);
  }
  SUBCASE("future version is rejected by name") {
    test::write_file(dir / "future.json", R"({"version": 9})");
    CHECK_THROWS_WITH_AS(load_cooccurrence(dir / "future.json"), doctest::Contains("9"),
                         FormatError);
  }
  SUBCASE("truncated file is a format error") {
    test::write_file(dir / "trunc.json", R"({"version": 1, "window": 2)");
    CHECK_THROWS_AS(load_cooccurrence(dir / "trunc.json"), FormatError);
  }
  fs::remove_all(dir);
}
