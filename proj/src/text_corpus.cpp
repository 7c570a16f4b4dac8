#include "emograph/text_corpus.hpp"

#include <cctype>
#include <fstream>

#include <nlohmann/json.hpp>

#include "emograph/emotions.hpp"
#include "emograph/errors.hpp"

namespace emograph {

namespace {

using json = nlohmann::json;

std::string lowercase(std::string s) {
  for (char& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return s;
}

std::ifstream open_or_throw(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open " + path.string());
  return in;
}

void validate_caption(const Caption& c, const std::filesystem::path& path, std::size_t line_no) {
  for (int label : c.labels) {
    if (label < 0 || label >= kNumEmotions) {
      throw DomainError(path.string() + ":" + std::to_string(line_no) +
                        ": label index " + std::to_string(label) + " outside [0, 26)");
    }
  }
  for (double v : c.vad) {
    if (!(v >= 0.0 && v <= 1.0)) {
      throw DomainError(path.string() + ":" + std::to_string(line_no) +
                        ": vad component " + std::to_string(v) + " outside [0, 1]");
    }
  }
}

}  // namespace

NormalizationConfig NormalizationConfig::load(const std::filesystem::path& stopwords_path,
                                              const std::filesystem::path& banned_nouns_path,
                                              const std::filesystem::path& lemmas_path) {
  NormalizationConfig cfg;
  {
    std::ifstream in = open_or_throw(stopwords_path);
    std::string word;
    while (std::getline(in, word)) {
      if (!word.empty()) cfg.stopwords.insert(lowercase(word));
    }
  }
  {
    std::ifstream in = open_or_throw(banned_nouns_path);
    std::string word;
    while (std::getline(in, word)) {
      if (!word.empty()) cfg.banned_nouns.insert(lowercase(word));
    }
  }
  {
    std::ifstream in = open_or_throw(lemmas_path);
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      if (line.empty()) continue;
      const std::size_t tab = line.find('\t');
      if (tab == std::string::npos || tab == 0 || tab + 1 >= line.size()) {
        throw ParseError(lemmas_path.string() + ":" + std::to_string(line_no) +
                         ": expected surface<TAB>lemma");
      }
      cfg.lemmas[lowercase(line.substr(0, tab))] = lowercase(line.substr(tab + 1));
    }
  }
  return cfg;
}

std::vector<Caption> load_captions(const std::filesystem::path& path, double vad_scale) {
  if (vad_scale <= 0.0) throw DomainError("vad_scale must be positive");
  std::ifstream in = open_or_throw(path);

  std::vector<Caption> captions;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    json row;
    try {
      row = json::parse(line);
    } catch (const json::exception& e) {
      throw ParseError(path.string() + ":" + std::to_string(line_no) + ": " + e.what());
    }
    if (!row.is_object() || !row.contains("id") || !row.contains("caption") ||
        !row.contains("labels") || !row.contains("vad")) {
      throw ParseError(path.string() + ":" + std::to_string(line_no) +
                       ": expected object with id, caption, labels, vad");
    }
    Caption c;
    try {
      c.id = row.at("id").get<std::string>();
      c.text = row.at("caption").get<std::string>();
      for (const auto& l : row.at("labels")) c.labels.insert(l.get<int>());
      const auto& vad = row.at("vad");
      if (!vad.is_array() || vad.size() != 3) {
        throw ParseError(path.string() + ":" + std::to_string(line_no) +
                         ": vad must hold exactly 3 numbers");
      }
      for (int i = 0; i < 3; ++i) {
        c.vad[static_cast<std::size_t>(i)] = vad[static_cast<std::size_t>(i)].get<double>() / vad_scale;
      }
    } catch (const json::exception& e) {
      throw ParseError(path.string() + ":" + std::to_string(line_no) + ": " + e.what());
    }
    validate_caption(c, path, line_no);
    captions.push_back(std::move(c));
  }
  return captions;
}

std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> tokens;
  std::string current;
  for (char ch : text) {
    if (std::isalpha(static_cast<unsigned char>(ch))) {
      current += static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
    } else if (!current.empty()) {
      tokens.push_back(std::move(current));
      current.clear();
    }
  }
  if (!current.empty()) tokens.push_back(std::move(current));
  return tokens;
}

NormalizedCaption normalize(const Caption& caption, const NormalizationConfig& cfg) {
  NormalizedCaption out;
  out.id = caption.id;
  out.labels = caption.labels;
  out.vad = caption.vad;

  for (std::string& token : tokenize(caption.text)) {
    if (cfg.stopwords.contains(token) || cfg.banned_nouns.contains(token)) continue;
    const auto lemma_it = cfg.lemmas.find(token);
    std::string word = lemma_it == cfg.lemmas.end() ? std::move(token) : lemma_it->second;
    // Lemmatization can land on a listed word (e.g. a plural collapsing onto
    // a banned singular); the lists win.
    if (cfg.stopwords.contains(word) || cfg.banned_nouns.contains(word)) continue;
    out.valid_words.push_back(std::move(word));
  }
  return out;
}

void write_normalized_corpus(const std::filesystem::path& path,
                             const std::vector<NormalizedCaption>& corpus,
                             const nlohmann::json& meta) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  out << json{{"meta", meta}}.dump() << '\n';
  for (const NormalizedCaption& nc : corpus) {
    json row;
    row["id"] = nc.id;
    row["valid_words"] = nc.valid_words;
    row["labels"] = nc.labels;
    row["vad"] = nc.vad;
    out << row.dump() << '\n';
  }
}

std::vector<NormalizedCaption> read_normalized_corpus(const std::filesystem::path& path,
                                                      nlohmann::json* meta_out) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open " + path.string());

  std::string line;
  if (!std::getline(in, line)) throw FormatError(path.string() + " is empty");
  try {
    const json header = json::parse(line);
    if (!header.contains("meta")) throw FormatError(path.string() + ": missing meta header line");
    if (meta_out != nullptr) *meta_out = header.at("meta");
  } catch (const json::exception& e) {
    throw FormatError(path.string() + ":1: " + e.what());
  }

  std::vector<NormalizedCaption> corpus;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      const json row = json::parse(line);
      NormalizedCaption nc;
      nc.id = row.at("id").get<std::string>();
      nc.valid_words = row.at("valid_words").get<std::vector<std::string>>();
      for (const auto& l : row.at("labels")) nc.labels.insert(l.get<int>());
      const auto& vad = row.at("vad");
      for (int i = 0; i < 3; ++i) {
        nc.vad[static_cast<std::size_t>(i)] = vad.at(static_cast<std::size_t>(i)).get<double>();
      }
      corpus.push_back(std::move(nc));
    } catch (const json::exception& e) {
      throw FormatError(path.string() + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  return corpus;
}

}  // namespace emograph
