#include "emograph/run_config.hpp"

#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "emograph/errors.hpp"
#include "emograph/rng.hpp"
#include "emograph/version.hpp"

namespace emograph {

namespace {

std::string trim(const std::string& s) {
  const std::size_t begin = s.find_first_not_of(" \t\r");
  if (begin == std::string::npos) return {};
  const std::size_t end = s.find_last_not_of(" \t\r");
  return s.substr(begin, end - begin + 1);
}

int parse_int(const std::string& key, const std::string& value) {
  try {
    std::size_t consumed = 0;
    const int out = std::stoi(value, &consumed);
    if (consumed != value.size()) throw std::invalid_argument(value);
    return out;
  } catch (const std::exception&) {
    throw DomainError("config key '" + key + "': expected integer, got '" + value + "'");
  }
}

double parse_double(const std::string& key, const std::string& value) {
  try {
    std::size_t consumed = 0;
    const double out = std::stod(value, &consumed);
    if (consumed != value.size()) throw std::invalid_argument(value);
    return out;
  } catch (const std::exception&) {
    throw DomainError("config key '" + key + "': expected number, got '" + value + "'");
  }
}

std::uint64_t parse_u64(const std::string& key, const std::string& value) {
  try {
    std::size_t consumed = 0;
    const std::uint64_t out = std::stoull(value, &consumed);
    if (consumed != value.size()) throw std::invalid_argument(value);
    return out;
  } catch (const std::exception&) {
    throw DomainError("config key '" + key + "': expected unsigned integer, got '" + value + "'");
  }
}

bool parse_bool(const std::string& key, const std::string& value) {
  if (value == "true" || value == "1" || value == "yes") return true;
  if (value == "false" || value == "0" || value == "no") return false;
  throw DomainError("config key '" + key + "': expected boolean, got '" + value + "'");
}

// Runtime-only keys: they do not change what the artifacts contain.
bool is_runtime_key(const std::string& key) {
  return key == "out_dir" || key == "threads" || key == "top_k" || key == "bench_warmup" ||
         key == "bench_reps" || key == "force";
}

}  // namespace

void RunConfig::assign(const std::string& key, const std::string& value,
                       const std::filesystem::path& base_dir) {
  auto path_value = [&base_dir, &value]() {
    const std::filesystem::path p(value);
    return p.is_absolute() ? p : base_dir / p;
  };

  if (key == "captions") captions = path_value();
  else if (key == "captions_val") captions_val = path_value();
  else if (key == "stopwords") stopwords = path_value();
  else if (key == "banned_nouns") banned_nouns = path_value();
  else if (key == "lemmas") lemmas = path_value();
  else if (key == "senticnet") senticnet = path_value();
  else if (key == "synonyms") synonyms = path_value();
  else if (key == "embeddings") embeddings = path_value();
  else if (key == "out_dir") out_dir = path_value();
  else if (key == "vad_scale") vad_scale = parse_double(key, value);
  else if (key == "window") window = parse_int(key, value);
  else if (key == "seed") seed = parse_u64(key, value);
  else if (key == "hidden_dim") model.hidden_dim = parse_int(key, value);
  else if (key == "readout_dim") model.readout_dim = parse_int(key, value);
  else if (key == "blocks") model.num_blocks = parse_int(key, value);
  else if (key == "pooling") {
    const auto pooling = pooling_from_string(value);
    if (!pooling) throw DomainError("config key 'pooling': expected avg or sum, got '" + value + "'");
    model.pooling = *pooling;
  } else if (key == "readout_skip_h0") model.readout_skip_h0 = parse_bool(key, value);
  else if (key == "lambda_cat") lambda_cat = parse_double(key, value);
  else if (key == "lambda_cont") lambda_cont = parse_double(key, value);
  else if (key == "loss_c") loss_c = parse_double(key, value);
  else if (key == "batch_size") train.batch_size = parse_int(key, value);
  else if (key == "lr") train.lr = parse_double(key, value);
  else if (key == "weight_decay") train.weight_decay = parse_double(key, value);
  else if (key == "epochs") train.epochs = parse_int(key, value);
  else if (key == "rho") train.rho = parse_double(key, value);
  else if (key == "adadelta_eps") train.eps = parse_double(key, value);
  else if (key == "threads") threads = parse_int(key, value);
  else if (key == "top_k") top_k = parse_int(key, value);
  else if (key == "bench_warmup") bench_warmup = parse_int(key, value);
  else if (key == "bench_reps") bench_reps = parse_int(key, value);
  else if (key == "force") force = parse_bool(key, value);
  else throw DomainError("unknown config key '" + key + "'");

  if (!is_runtime_key(key)) semantic_values_[key] = value;
}

RunConfig RunConfig::load(const std::filesystem::path& config_path,
                          const std::vector<std::pair<std::string, std::string>>& overrides) {
  std::ifstream in(config_path);
  if (!in) throw ParseError("cannot open config " + config_path.string());
  const std::filesystem::path base_dir = config_path.parent_path();

  RunConfig cfg;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string stripped = trim(line);
    if (stripped.empty() || stripped.front() == '#') continue;
    const std::size_t eq = stripped.find('=');
    if (eq == std::string::npos) {
      throw ParseError(config_path.string() + ":" + std::to_string(line_no) +
                       ": expected key = value");
    }
    const std::string key = trim(stripped.substr(0, eq));
    const std::string value = trim(stripped.substr(eq + 1));
    if (key.empty()) {
      throw ParseError(config_path.string() + ":" + std::to_string(line_no) + ": empty key");
    }
    cfg.assign(key, value, base_dir);
  }

  // Flag overrides resolve relative to the caller's working directory.
  for (const auto& [key, value] : overrides) {
    cfg.assign(key, value, std::filesystem::current_path());
  }
  cfg.train.seed = cfg.seed;
  return cfg;
}

std::string RunConfig::config_hash() const {
  std::string canonical;
  for (const auto& [key, value] : semantic_values_) {
    canonical += key;
    canonical += '=';
    canonical += value;
    canonical += '\n';
  }
  std::ostringstream hex;
  hex << std::hex << fnv1a64(canonical);
  return hex.str();
}

nlohmann::json RunConfig::meta() const {
  return nlohmann::json{{"tool", kToolName},
                        {"version", kToolVersion},
                        {"seed", seed},
                        {"config_hash", config_hash()}};
}

void RunConfig::check_meta(const nlohmann::json& meta, const std::string& artifact) const {
  if (force) return;
  if (!meta.is_object() || !meta.contains("config_hash")) {
    throw FormatError(artifact + ": missing meta.config_hash (rebuild it or pass --force)");
  }
  const std::string found = meta.at("config_hash").get<std::string>();
  if (found != config_hash()) {
    throw FormatError(artifact + ": config hash " + found + " does not match this run (" +
                      config_hash() + "); rerun upstream stages or pass --force");
  }
}

LossConfig RunConfig::loss_config(const std::array<double, kNumEmotions>& category_prior) const {
  LossConfig lc;
  lc.lambda_cat = lambda_cat;
  lc.lambda_cont = lambda_cont;
  lc.c = loss_c;
  lc.category_prior = category_prior;
  return lc;
}

}  // namespace emograph
