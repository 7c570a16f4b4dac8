#pragma once

#include <array>
#include <filesystem>
#include <set>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include <nlohmann/json_fwd.hpp>

namespace emograph {

// One raw dataset sample: caption text plus its multi-label categorical
// targets and [0,1]-normalized valence/arousal/dominance targets.
struct Caption {
  std::string id;
  std::string text;
  std::set<int> labels;
  std::array<double, 3> vad{0.0, 0.0, 0.0};
};

// The caption after preprocessing; valid_words keeps caption order and
// duplicates, labels/vad are carried through unchanged.
struct NormalizedCaption {
  std::string id;
  std::vector<std::string> valid_words;
  std::set<int> labels;
  std::array<double, 3> vad{0.0, 0.0, 0.0};
};

struct NormalizationConfig {
  std::unordered_set<std::string> stopwords;
  std::unordered_set<std::string> banned_nouns;
  std::unordered_map<std::string, std::string> lemmas;

  static NormalizationConfig load(const std::filesystem::path& stopwords_path,
                                  const std::filesystem::path& banned_nouns_path,
                                  const std::filesystem::path& lemmas_path);
};

// Reads caption-jsonl: one {"id","caption","labels","vad"} object per line,
// blank lines skipped. Raw 1-10 VAD annotations can be rescaled into [0,1]
// with vad_scale=10.
std::vector<Caption> load_captions(const std::filesystem::path& path, double vad_scale = 1.0);

// Maximal runs of alphabetic characters, lowercased. Everything else
// (whitespace, punctuation, digits) separates tokens.
std::vector<std::string> tokenize(std::string_view text);

// tokenize -> stop words out -> banned nouns out -> lemma lookup, with lemma
// outputs re-checked against both lists.
NormalizedCaption normalize(const Caption& caption, const NormalizationConfig& cfg);

// Stage artifact: a meta header line followed by one JSON object per caption.
void write_normalized_corpus(const std::filesystem::path& path,
                             const std::vector<NormalizedCaption>& corpus,
                             const nlohmann::json& meta);
std::vector<NormalizedCaption> read_normalized_corpus(const std::filesystem::path& path,
                                                      nlohmann::json* meta_out = nullptr);

}  // namespace emograph
