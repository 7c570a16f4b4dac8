#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

namespace emograph {

inline constexpr int kEmbeddingDim = 50;

// Per-concept affective attributes.
struct LexiconEntry {
  std::string name;
  std::array<std::string, 2> mood_tags;
  double pleasantness = 0.0;
  double polarity = 0.0;
  std::array<std::string, 5> related;
};

class SenticLexicon {
 public:
  static SenticLexicon load(const std::filesystem::path& path);

  const LexiconEntry* find(const std::string& word) const;
  std::size_t size() const { return entries_.size(); }
  void insert(LexiconEntry entry);

 private:
  std::unordered_map<std::string, LexiconEntry> entries_;
};

class SynonymTable {
 public:
  static SynonymTable load(const std::filesystem::path& path);

  // Candidate synonyms in file order; empty when the word has none.
  const std::vector<std::string>& candidates(const std::string& word) const;
  void insert(const std::string& word, std::vector<std::string> synonyms);

 private:
  std::unordered_map<std::string, std::vector<std::string>> table_;
};

// 50-d word vectors with a deterministic fallback: unknown words get a vector
// drawn uniformly from [-0.01, 0.01]^50 by a generator keyed on (seed, word),
// cached so every later query sees the identical vector.
class EmbeddingTable {
 public:
  explicit EmbeddingTable(std::uint64_t rng_seed) : seed_(rng_seed) {}
  static EmbeddingTable load(const std::filesystem::path& path, std::uint64_t rng_seed);

  const std::vector<double>& get(const std::string& word) const;
  bool has_stored(const std::string& word) const { return stored_.contains(word); }
  std::size_t stored_count() const { return stored_.size(); }
  std::uint64_t seed() const { return seed_; }

  void insert(const std::string& word, std::vector<double> vector);

 private:
  std::unordered_map<std::string, std::vector<double>> stored_;
  mutable std::unordered_map<std::string, std::vector<double>> fallback_cache_;
  // Held by pointer so the table stays movable.
  mutable std::unique_ptr<std::mutex> cache_mutex_ = std::make_unique<std::mutex>();
  std::uint64_t seed_ = 0;
};

double cosine_similarity(std::span<const double> a, std::span<const double> b);

// Direct lexicon hit, otherwise the synonym candidates ranked by cosine
// similarity to the query word (ties broken lexicographically), first one
// present in the lexicon wins. nullopt means the word is dropped.
std::optional<LexiconEntry> lookup_sentic(const std::string& word, const SenticLexicon& lexicon,
                                          const SynonymTable& synonyms,
                                          const EmbeddingTable& embeddings);

}  // namespace emograph
