#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "emograph/emotions.hpp"
#include "emograph/text_corpus.hpp"

namespace emograph {

// Word/emotion and word/word co-occurrence counts mined from a normalized
// corpus. Vocab indices are assigned in first-appearance order and stay
// stable across save/load.
struct CooccurrenceModel {
  std::vector<std::string> vocab;
  std::vector<std::string> emotions;
  std::vector<std::array<std::int64_t, kNumEmotions>> word_emotion;   // M_c, dense rows
  std::vector<std::map<int, std::int64_t>> word_word;                 // M_w, sparse symmetric rows
  std::vector<std::int64_t> word_total;
  std::vector<double> category_prior;
  int window = 3;

  std::optional<int> index_of(const std::string& word) const;

  bool operator==(const CooccurrenceModel& other) const;

 private:
  friend CooccurrenceModel mine(const std::vector<NormalizedCaption>&, int);
  friend CooccurrenceModel load_cooccurrence(const std::filesystem::path&, nlohmann::json*);
  void rebuild_index();
  std::unordered_map<std::string, int> index_;
};

// Counts, per caption, every (word occurrence, label) pair into M_c and every
// in-window ordered position pair of distinct words into M_w (both directions).
CooccurrenceModel mine(const std::vector<NormalizedCaption>& corpus, int window);

// P(C_i | word): the word's M_c row normalized by its row sum. Words without
// any label co-occurrence (or outside the vocab) fall back to uniform 1/26.
std::array<double, kNumEmotions> emotion_distribution(const CooccurrenceModel& model,
                                                      const std::string& word);

// M_w[src][dst] / word_total[src]; normalization is by the source word, so the
// weight is direction-dependent. Both words must be in the vocab.
double word_pair_weight(const CooccurrenceModel& model, const std::string& src,
                        const std::string& dst);

void save_cooccurrence(const CooccurrenceModel& model, const std::filesystem::path& path,
                       const nlohmann::json& meta);
CooccurrenceModel load_cooccurrence(const std::filesystem::path& path,
                                    nlohmann::json* meta_out = nullptr);

}  // namespace emograph
