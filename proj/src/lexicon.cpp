#include "emograph/lexicon.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "emograph/errors.hpp"
#include "emograph/rng.hpp"

namespace emograph {

namespace {

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> parts;
  std::size_t start = 0;
  for (;;) {
    const std::size_t pos = s.find(sep, start);
    if (pos == std::string::npos) {
      parts.push_back(s.substr(start));
      return parts;
    }
    parts.push_back(s.substr(start, pos - start));
    start = pos + 1;
  }
}

double parse_unit_interval(const std::string& text, const std::filesystem::path& path,
                           std::size_t line_no, const char* field) {
  double value = 0.0;
  try {
    std::size_t consumed = 0;
    value = std::stod(text, &consumed);
    if (consumed != text.size()) throw std::invalid_argument(text);
  } catch (const std::exception&) {
    throw ParseError(path.string() + ":" + std::to_string(line_no) + ": " + field +
                     " is not a number: '" + text + "'");
  }
  if (value < -1.0 || value > 1.0) {
    throw ParseError(path.string() + ":" + std::to_string(line_no) + ": " + field + " " +
                     text + " outside [-1, 1]");
  }
  return value;
}

}  // namespace

SenticLexicon SenticLexicon::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open " + path.string());

  SenticLexicon lexicon;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const std::vector<std::string> fields = split(line, ',');
    if (fields.size() != 6) {
      throw ParseError(path.string() + ":" + std::to_string(line_no) + ": expected 6 fields, got " +
                       std::to_string(fields.size()));
    }
    LexiconEntry entry;
    entry.name = fields[0];
    entry.mood_tags = {fields[1], fields[2]};
    entry.pleasantness = parse_unit_interval(fields[3], path, line_no, "pleasantness");
    entry.polarity = parse_unit_interval(fields[4], path, line_no, "polarity");
    const std::vector<std::string> related = split(fields[5], ';');
    if (related.size() != 5) {
      throw ParseError(path.string() + ":" + std::to_string(line_no) +
                       ": expected 5 related concepts, got " + std::to_string(related.size()));
    }
    std::copy(related.begin(), related.end(), entry.related.begin());
    lexicon.entries_[entry.name] = std::move(entry);
  }
  return lexicon;
}

const LexiconEntry* SenticLexicon::find(const std::string& word) const {
  const auto it = entries_.find(word);
  return it == entries_.end() ? nullptr : &it->second;
}

void SenticLexicon::insert(LexiconEntry entry) {
  entries_[entry.name] = std::move(entry);
}

SynonymTable SynonymTable::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open " + path.string());

  SynonymTable table;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const std::size_t comma = line.find(',');
    if (comma == std::string::npos || comma == 0) {
      throw ParseError(path.string() + ":" + std::to_string(line_no) +
                       ": expected word,syn1;syn2;...");
    }
    std::vector<std::string> candidates = split(line.substr(comma + 1), ';');
    candidates.erase(std::remove(candidates.begin(), candidates.end(), std::string{}),
                     candidates.end());
    table.insert(line.substr(0, comma), std::move(candidates));
  }
  return table;
}

const std::vector<std::string>& SynonymTable::candidates(const std::string& word) const {
  static const std::vector<std::string> empty;
  const auto it = table_.find(word);
  return it == table_.end() ? empty : it->second;
}

void SynonymTable::insert(const std::string& word, std::vector<std::string> synonyms) {
  // De-duplicate, keeping first occurrence.
  std::vector<std::string> unique;
  for (std::string& s : synonyms) {
    if (std::find(unique.begin(), unique.end(), s) == unique.end()) unique.push_back(std::move(s));
  }
  table_[word] = std::move(unique);
}

EmbeddingTable EmbeddingTable::load(const std::filesystem::path& path, std::uint64_t rng_seed) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open " + path.string());

  EmbeddingTable table(rng_seed);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::istringstream ss(line);
    std::string word;
    if (!(ss >> word)) continue;
    std::vector<double> vec;
    vec.reserve(kEmbeddingDim);
    double component = 0.0;
    while (ss >> component) vec.push_back(component);
    if (!ss.eof()) {
      throw ParseError(path.string() + ":" + std::to_string(line_no) +
                       ": non-numeric embedding component");
    }
    if (vec.size() != kEmbeddingDim) {
      throw ParseError(path.string() + ":" + std::to_string(line_no) + ": expected " +
                       std::to_string(kEmbeddingDim) + " components, got " +
                       std::to_string(vec.size()));
    }
    table.stored_[word] = std::move(vec);
  }
  return table;
}

const std::vector<double>& EmbeddingTable::get(const std::string& word) const {
  const auto stored = stored_.find(word);
  if (stored != stored_.end()) return stored->second;

  std::lock_guard<std::mutex> lock(*cache_mutex_);
  const auto cached = fallback_cache_.find(word);
  if (cached != fallback_cache_.end()) return cached->second;

  Rng rng = keyed_rng(seed_, word);
  std::vector<double> vec(kEmbeddingDim);
  for (double& x : vec) x = rng.uniform(-0.01, 0.01);
  return fallback_cache_.emplace(word, std::move(vec)).first->second;
}

void EmbeddingTable::insert(const std::string& word, std::vector<double> vector) {
  if (vector.size() != kEmbeddingDim) throw DomainError("embedding dimension must be 50");
  stored_[word] = std::move(vector);
}

double cosine_similarity(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw DomainError("cosine_similarity: dimension mismatch");
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    dot += a[i] * b[i];
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  if (na == 0.0 || nb == 0.0) return 0.0;
  return dot / (std::sqrt(na) * std::sqrt(nb));
}

std::optional<LexiconEntry> lookup_sentic(const std::string& word, const SenticLexicon& lexicon,
                                          const SynonymTable& synonyms,
                                          const EmbeddingTable& embeddings) {
  if (const LexiconEntry* direct = lexicon.find(word)) return *direct;

  const std::vector<std::string>& candidates = synonyms.candidates(word);
  if (candidates.empty()) return std::nullopt;

  const std::vector<double>& query = embeddings.get(word);
  std::vector<std::pair<double, const std::string*>> ranked;
  ranked.reserve(candidates.size());
  for (const std::string& candidate : candidates) {
    ranked.emplace_back(cosine_similarity(query, embeddings.get(candidate)), &candidate);
  }
  std::sort(ranked.begin(), ranked.end(), [](const auto& lhs, const auto& rhs) {
    if (lhs.first != rhs.first) return lhs.first > rhs.first;
    return *lhs.second < *rhs.second;
  });

  for (const auto& [similarity, candidate] : ranked) {
    if (const LexiconEntry* entry = lexicon.find(*candidate)) return *entry;
  }
  return std::nullopt;
}

}  // namespace emograph
