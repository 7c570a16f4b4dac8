#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "emograph/gin_model.hpp"

namespace emograph {

// Flat key=value run configuration with CLI flag overrides. Input paths are
// resolved relative to the config file; the config hash covers every
// semantic key (seed included) so downstream stages can detect mixed inputs.
struct RunConfig {
  std::filesystem::path captions, captions_val;
  std::filesystem::path stopwords, banned_nouns, lemmas;
  std::filesystem::path senticnet, synonyms, embeddings;
  std::filesystem::path out_dir = "out";

  double vad_scale = 1.0;
  int window = 3;
  std::uint64_t seed = 0;

  ModelConfig model;
  double lambda_cat = 1.0;
  double lambda_cont = 1.0;
  double loss_c = 1.2;
  TrainConfig train;  // seed mirrors the run seed

  // Runtime knobs, excluded from the config hash.
  int threads = 1;
  int top_k = 3;
  int bench_warmup = 2;
  int bench_reps = 5;
  bool force = false;

  static RunConfig load(const std::filesystem::path& config_path,
                        const std::vector<std::pair<std::string, std::string>>& overrides = {});

  std::string config_hash() const;
  nlohmann::json meta() const;  // {tool, version, seed, config_hash}

  // Throws unless the artifact's meta carries this run's config hash (or
  // force is set).
  void check_meta(const nlohmann::json& meta, const std::string& artifact) const;

  LossConfig loss_config(const std::array<double, kNumEmotions>& category_prior) const;

 private:
  std::map<std::string, std::string> semantic_values_;
  void assign(const std::string& key, const std::string& value,
              const std::filesystem::path& base_dir);
};

}  // namespace emograph
