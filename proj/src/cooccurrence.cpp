#include "emograph/cooccurrence.hpp"

#include <algorithm>
#include <fstream>

#include <nlohmann/json.hpp>

#include "emograph/errors.hpp"

namespace emograph {

namespace {
using json = nlohmann::json;
constexpr int kFormatVersion = 1;
}  // namespace

std::optional<int> CooccurrenceModel::index_of(const std::string& word) const {
  const auto it = index_.find(word);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

void CooccurrenceModel::rebuild_index() {
  index_.clear();
  index_.reserve(vocab.size());
  for (std::size_t i = 0; i < vocab.size(); ++i) index_[vocab[i]] = static_cast<int>(i);
}

bool CooccurrenceModel::operator==(const CooccurrenceModel& other) const {
  return vocab == other.vocab && emotions == other.emotions &&
         word_emotion == other.word_emotion && word_word == other.word_word &&
         word_total == other.word_total && category_prior == other.category_prior &&
         window == other.window;
}

CooccurrenceModel mine(const std::vector<NormalizedCaption>& corpus, int window) {
  if (window < 1) throw DomainError("co-occurrence window must be >= 1");
  if (corpus.empty()) throw DomainError("cannot mine an empty corpus");

  CooccurrenceModel model;
  model.window = window;
  const auto& names = emotion_categories();
  model.emotions.assign(names.begin(), names.end());

  auto intern = [&model](const std::string& word) {
    const auto it = model.index_.find(word);
    if (it != model.index_.end()) return it->second;
    const int idx = static_cast<int>(model.vocab.size());
    model.vocab.push_back(word);
    model.index_[word] = idx;
    model.word_emotion.push_back({});
    model.word_word.emplace_back();
    model.word_total.push_back(0);
    return idx;
  };

  std::array<std::int64_t, kNumEmotions> label_counts{};
  for (const NormalizedCaption& nc : corpus) {
    for (int label : nc.labels) {
      if (label < 0 || label >= kNumEmotions) {
        throw DomainError("label index " + std::to_string(label) + " outside [0, 26)");
      }
      ++label_counts[static_cast<std::size_t>(label)];
    }

    std::vector<int> ids;
    ids.reserve(nc.valid_words.size());
    for (const std::string& word : nc.valid_words) {
      const int idx = intern(word);
      ids.push_back(idx);
      ++model.word_total[static_cast<std::size_t>(idx)];
      for (int label : nc.labels) {
        ++model.word_emotion[static_cast<std::size_t>(idx)][static_cast<std::size_t>(label)];
      }
    }

    // Position pairs within the sliding window; a window of s covers
    // neighbors up to s-1 places apart. Self-pairs are skipped, repeated
    // occurrences each count.
    for (std::size_t i = 0; i < ids.size(); ++i) {
      const std::size_t limit = std::min(ids.size(), i + static_cast<std::size_t>(window));
      for (std::size_t j = i + 1; j < limit; ++j) {
        if (ids[i] == ids[j]) continue;
        ++model.word_word[static_cast<std::size_t>(ids[i])][ids[j]];
        ++model.word_word[static_cast<std::size_t>(ids[j])][ids[i]];
      }
    }
  }

  model.category_prior.resize(kNumEmotions);
  for (int j = 0; j < kNumEmotions; ++j) {
    model.category_prior[static_cast<std::size_t>(j)] =
        static_cast<double>(label_counts[static_cast<std::size_t>(j)]) /
        static_cast<double>(corpus.size());
  }
  return model;
}

std::array<double, kNumEmotions> emotion_distribution(const CooccurrenceModel& model,
                                                      const std::string& word) {
  std::array<double, kNumEmotions> dist{};
  const std::optional<int> idx = model.index_of(word);
  std::int64_t row_sum = 0;
  if (idx) {
    for (std::int64_t count : model.word_emotion[static_cast<std::size_t>(*idx)]) {
      row_sum += count;
    }
  }
  if (!idx || row_sum == 0) {
    dist.fill(1.0 / kNumEmotions);
    return dist;
  }
  const auto& row = model.word_emotion[static_cast<std::size_t>(*idx)];
  for (int j = 0; j < kNumEmotions; ++j) {
    dist[static_cast<std::size_t>(j)] =
        static_cast<double>(row[static_cast<std::size_t>(j)]) / static_cast<double>(row_sum);
  }
  return dist;
}

double word_pair_weight(const CooccurrenceModel& model, const std::string& src,
                        const std::string& dst) {
  const std::optional<int> src_idx = model.index_of(src);
  const std::optional<int> dst_idx = model.index_of(dst);
  if (!src_idx) throw LookupError("word not in vocab: " + src);
  if (!dst_idx) throw LookupError("word not in vocab: " + dst);
  const std::int64_t total = model.word_total[static_cast<std::size_t>(*src_idx)];
  if (total == 0) return 0.0;
  const auto& row = model.word_word[static_cast<std::size_t>(*src_idx)];
  const auto it = row.find(*dst_idx);
  if (it == row.end()) return 0.0;
  // Position-pair counting can exceed the source total when the other word
  // repeats inside one window; cap so the weight stays a probability.
  return std::min(1.0, static_cast<double>(it->second) / static_cast<double>(total));
}

void save_cooccurrence(const CooccurrenceModel& model, const std::filesystem::path& path,
                       const nlohmann::json& meta) {
  json mc = json::array();
  for (std::size_t i = 0; i < model.word_emotion.size(); ++i) {
    for (int j = 0; j < kNumEmotions; ++j) {
      const std::int64_t count = model.word_emotion[i][static_cast<std::size_t>(j)];
      if (count != 0) mc.push_back({i, j, count});
    }
  }
  json mw = json::array();
  for (std::size_t i = 0; i < model.word_word.size(); ++i) {
    for (const auto& [j, count] : model.word_word[i]) {
      if (count != 0) mw.push_back({i, j, count});
    }
  }

  nlohmann::ordered_json doc;
  doc["version"] = kFormatVersion;
  doc["meta"] = meta;
  doc["window"] = model.window;
  doc["vocab"] = model.vocab;
  doc["emotions"] = model.emotions;
  doc["word_total"] = model.word_total;
  doc["category_prior"] = model.category_prior;
  doc["m_c"] = std::move(mc);
  doc["m_w"] = std::move(mw);

  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  out << doc.dump(2) << '\n';
}

CooccurrenceModel load_cooccurrence(const std::filesystem::path& path, nlohmann::json* meta_out) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open " + path.string());
  json doc;
  try {
    in >> doc;
  } catch (const json::exception& e) {
    throw FormatError(path.string() + ": " + e.what());
  }

  if (!doc.contains("version")) throw FormatError(path.string() + ": missing version");
  if (doc.at("version").get<int>() != kFormatVersion) {
    throw FormatError(path.string() + ": unsupported version " + doc.at("version").dump() +
                      " (expected " + std::to_string(kFormatVersion) + ")");
  }

  CooccurrenceModel model;
  try {
    if (meta_out != nullptr && doc.contains("meta")) *meta_out = doc.at("meta");
    model.window = doc.at("window").get<int>();
    model.vocab = doc.at("vocab").get<std::vector<std::string>>();
    model.emotions = doc.at("emotions").get<std::vector<std::string>>();
    model.word_total = doc.at("word_total").get<std::vector<std::int64_t>>();
    model.category_prior = doc.at("category_prior").get<std::vector<double>>();

    const std::size_t w = model.vocab.size();
    if (model.word_total.size() != w) {
      throw FormatError(path.string() + ": word_total length does not match vocab");
    }
    if (model.emotions.size() != kNumEmotions ||
        model.category_prior.size() != kNumEmotions) {
      throw FormatError(path.string() + ": expected 26 emotion categories");
    }
    model.word_emotion.assign(w, {});
    model.word_word.assign(w, {});
    for (const auto& triplet : doc.at("m_c")) {
      const auto i = triplet.at(0).get<std::size_t>();
      const auto j = triplet.at(1).get<std::size_t>();
      if (i >= w || j >= kNumEmotions) throw FormatError(path.string() + ": m_c index out of range");
      model.word_emotion[i][j] = triplet.at(2).get<std::int64_t>();
    }
    for (const auto& triplet : doc.at("m_w")) {
      const auto i = triplet.at(0).get<std::size_t>();
      const auto j = triplet.at(1).get<std::size_t>();
      if (i >= w || j >= w) throw FormatError(path.string() + ": m_w index out of range");
      model.word_word[i][static_cast<int>(j)] = triplet.at(2).get<std::int64_t>();
    }
  } catch (const json::exception& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
  model.rebuild_index();
  return model;
}

}  // namespace emograph
