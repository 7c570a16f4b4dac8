#include "emograph/commands.hpp"

#include <algorithm>
#include <fstream>
#include <iostream>

#include <nlohmann/json.hpp>

#include "emograph/errors.hpp"
#include "emograph/evaluation.hpp"
#include "emograph/pipeline.hpp"

namespace emograph {

namespace {

using json = nlohmann::json;

std::filesystem::path normalized_path(const RunConfig& cfg) { return cfg.out_dir / "normalized.jsonl"; }
std::filesystem::path cooccur_path(const RunConfig& cfg) { return cfg.out_dir / "cooccur.json"; }
std::filesystem::path graphs_dir(const RunConfig& cfg) { return cfg.out_dir / "graphs"; }
std::filesystem::path manifest_path(const RunConfig& cfg) { return graphs_dir(cfg) / "manifest.json"; }
std::filesystem::path checkpoint_path(const RunConfig& cfg) { return cfg.out_dir / "checkpoint.json"; }

void require_artifact(const std::filesystem::path& path, const std::string& producing_stage) {
  if (!std::filesystem::exists(path)) {
    throw FormatError("missing " + path.string() + "; run " + producing_stage + " first");
  }
}

void require_input(const std::filesystem::path& path, const std::string& key) {
  if (path.empty()) throw DomainError("config key '" + key + "' is not set");
  if (!std::filesystem::exists(path)) {
    throw DomainError("input " + path.string() + " (config key '" + key + "') does not exist");
  }
}

void ensure_out_dir(const RunConfig& cfg) {
  std::error_code ec;
  std::filesystem::create_directories(cfg.out_dir, ec);
  if (ec) throw Error("cannot create " + cfg.out_dir.string() + ": " + ec.message());
}

NormalizationConfig load_normalization(const RunConfig& cfg) {
  require_input(cfg.stopwords, "stopwords");
  require_input(cfg.banned_nouns, "banned_nouns");
  require_input(cfg.lemmas, "lemmas");
  return NormalizationConfig::load(cfg.stopwords, cfg.banned_nouns, cfg.lemmas);
}

struct LoadedStores {
  SenticLexicon lexicon;
  SynonymTable synonyms;
  EmbeddingTable embeddings;
};

LoadedStores load_stores(const RunConfig& cfg) {
  require_input(cfg.senticnet, "senticnet");
  require_input(cfg.synonyms, "synonyms");
  require_input(cfg.embeddings, "embeddings");
  return {SenticLexicon::load(cfg.senticnet), SynonymTable::load(cfg.synonyms),
          EmbeddingTable::load(cfg.embeddings, cfg.seed)};
}

std::vector<NormalizedCaption> load_normalized_checked(const RunConfig& cfg) {
  require_artifact(normalized_path(cfg), "preprocess");
  json meta;
  auto corpus = read_normalized_corpus(normalized_path(cfg), &meta);
  cfg.check_meta(meta, normalized_path(cfg).string());
  return corpus;
}

CooccurrenceModel load_cooccurrence_checked(const RunConfig& cfg) {
  require_artifact(cooccur_path(cfg), "mine");
  json meta;
  auto model = load_cooccurrence(cooccur_path(cfg), &meta);
  cfg.check_meta(meta, cooccur_path(cfg).string());
  return model;
}

Pipeline load_pipeline(const RunConfig& cfg) {
  require_artifact(checkpoint_path(cfg), "train");
  json meta;
  GinModel model = load_checkpoint(checkpoint_path(cfg), cfg.model, &meta);
  cfg.check_meta(meta, checkpoint_path(cfg).string());
  LoadedStores stores = load_stores(cfg);
  return Pipeline{load_normalization(cfg), load_cooccurrence_checked(cfg),
                  std::move(stores.lexicon), std::move(stores.synonyms),
                  std::move(stores.embeddings), std::move(model)};
}

std::array<double, kNumEmotions> prior_array(const CooccurrenceModel& model) {
  std::array<double, kNumEmotions> prior{};
  for (int i = 0; i < kNumEmotions; ++i) {
    prior[static_cast<std::size_t>(i)] = model.category_prior[static_cast<std::size_t>(i)];
  }
  return prior;
}

json prediction_row(const std::string& id, const Prediction& pred, int top_k) {
  std::vector<int> order(kNumEmotions);
  for (int i = 0; i < kNumEmotions; ++i) order[static_cast<std::size_t>(i)] = i;
  std::stable_sort(order.begin(), order.end(), [&pred](int a, int b) {
    return pred.cat[static_cast<std::size_t>(a)] > pred.cat[static_cast<std::size_t>(b)];
  });
  std::vector<std::string> top;
  for (int i = 0; i < std::min(top_k, kNumEmotions); ++i) {
    top.push_back(emotion_categories()[static_cast<std::size_t>(order[static_cast<std::size_t>(i)])]);
  }
  json row;
  row["id"] = id;
  row["scores"] = pred.cat;
  row["vad"] = pred.cont;
  row["top"] = top;
  row["degenerate"] = pred.degenerate;
  return row;
}

}  // namespace

void cmd_preprocess(const RunConfig& cfg) {
  require_input(cfg.captions, "captions");
  const NormalizationConfig norm = load_normalization(cfg);
  const std::vector<Caption> captions = load_captions(cfg.captions, cfg.vad_scale);

  std::vector<NormalizedCaption> corpus;
  corpus.reserve(captions.size());
  std::size_t empty_count = 0;
  for (const Caption& caption : captions) {
    NormalizedCaption nc = normalize(caption, norm);
    if (nc.valid_words.empty()) {
      ++empty_count;
      std::cerr << "warning: caption '" << nc.id << "' has no valid words\n";
    }
    corpus.push_back(std::move(nc));
  }

  ensure_out_dir(cfg);
  write_normalized_corpus(normalized_path(cfg), corpus, cfg.meta());
  std::cout << "preprocess: " << corpus.size() << " captions (" << empty_count
            << " without valid words) -> " << normalized_path(cfg).string() << "\n";
}

void cmd_mine(const RunConfig& cfg) {
  const std::vector<NormalizedCaption> corpus = load_normalized_checked(cfg);
  const CooccurrenceModel model = mine(corpus, cfg.window);
  save_cooccurrence(model, cooccur_path(cfg), cfg.meta());
  std::cout << "mine: vocab " << model.vocab.size() << ", window " << model.window << " -> "
            << cooccur_path(cfg).string() << "\n";
}

void cmd_build_graphs(const RunConfig& cfg) {
  const std::vector<NormalizedCaption> corpus = load_normalized_checked(cfg);
  const CooccurrenceModel cooccurrence = load_cooccurrence_checked(cfg);
  const LoadedStores stores = load_stores(cfg);

  const BuildManifest manifest = build_corpus_graphs(
      corpus, cooccurrence, {stores.lexicon, stores.synonyms, stores.embeddings},
      graphs_dir(cfg), cfg.threads);
  save_manifest(manifest, manifest_path(cfg), cfg.meta());
  std::cout << "build-graphs: " << manifest.built.size() << " graphs, " << manifest.skipped.size()
            << " skipped -> " << graphs_dir(cfg).string() << "\n";
}

void cmd_train(const RunConfig& cfg) {
  const std::vector<NormalizedCaption> corpus = load_normalized_checked(cfg);
  const CooccurrenceModel cooccurrence = load_cooccurrence_checked(cfg);
  require_artifact(manifest_path(cfg), "build-graphs");
  json manifest_meta;
  const BuildManifest manifest = load_manifest(manifest_path(cfg), &manifest_meta);
  cfg.check_meta(manifest_meta, manifest_path(cfg).string());
  if (manifest.built.empty()) throw FormatError("manifest lists no graphs; nothing to train on");

  std::unordered_map<std::string, const NormalizedCaption*> by_id;
  for (const NormalizedCaption& nc : corpus) by_id[nc.id] = &nc;

  std::vector<TrainSample> samples;
  samples.reserve(manifest.built.size());
  for (const auto& entry : manifest.built) {
    const auto it = by_id.find(entry.caption_id);
    if (it == by_id.end()) {
      throw FormatError("manifest caption '" + entry.caption_id + "' is not in the corpus");
    }
    TrainSample sample;
    sample.graph = load_graph(graphs_dir(cfg) / entry.file);
    sample.labels = it->second->labels;
    sample.vad = it->second->vad;
    samples.push_back(std::move(sample));
  }

  const LossConfig lc = cfg.loss_config(prior_array(cooccurrence));
  GinModel model = GinModel::init(cfg.model, cfg.seed);
  AdadeltaOptimizer optimizer(model, cfg.train);

  ValidationHook validation;
  std::optional<Pipeline> val_pipeline;
  std::vector<Caption> val_captions;
  std::vector<std::set<int>> val_targets;
  if (!cfg.captions_val.empty()) {
    require_input(cfg.captions_val, "captions_val");
    val_captions = load_captions(cfg.captions_val, cfg.vad_scale);
    for (const Caption& c : val_captions) val_targets.push_back(c.labels);
    LoadedStores stores = load_stores(cfg);
    val_pipeline.emplace(Pipeline{load_normalization(cfg), cooccurrence,
                                  std::move(stores.lexicon), std::move(stores.synonyms),
                                  std::move(stores.embeddings), GinModel::init(cfg.model, cfg.seed)});
    validation = [&](const GinModel& current) {
      val_pipeline->model = current;
      const std::vector<Prediction> preds = predict(val_captions, *val_pipeline, cfg.threads);
      double loss = 0.0;
      for (std::size_t i = 0; i < preds.size(); ++i) {
        loss += prediction_loss(preds[i], val_captions[i].labels, val_captions[i].vad, lc);
      }
      loss /= static_cast<double>(preds.size());
      return std::make_pair(loss, evaluate(preds, val_targets).map);
    };
  }

  const std::vector<EpochStats> history =
      train_model(model, samples, cfg.train, lc, validation, &optimizer);

  save_checkpoint(model, checkpoint_path(cfg), cfg.meta(), &optimizer);

  std::ofstream log(cfg.out_dir / "training_log.csv");
  if (!log) throw Error("cannot write training_log.csv");
  log << "epoch,train_loss,val_loss,val_mAP\n";
  log.precision(17);
  for (std::size_t e = 0; e < history.size(); ++e) {
    log << (e + 1) << ',' << history[e].train_loss << ',';
    if (history[e].val_loss) log << *history[e].val_loss;
    log << ',';
    if (history[e].val_map) log << *history[e].val_map;
    log << '\n';
  }

  std::cout << "train: " << samples.size() << " graphs, " << history.size() << " epochs";
  if (!history.empty()) {
    std::cout << ", final loss " << history.back().train_loss;
    if (history.back().val_map) std::cout << ", val mAP " << *history.back().val_map;
  }
  std::cout << " -> " << checkpoint_path(cfg).string() << "\n";
}

void cmd_eval(const RunConfig& cfg) {
  if (cfg.captions_val.empty()) throw DomainError("config key 'captions_val' is not set");
  require_input(cfg.captions_val, "captions_val");
  const Pipeline pipeline = load_pipeline(cfg);

  const std::vector<Caption> captions = load_captions(cfg.captions_val, cfg.vad_scale);
  std::vector<std::set<int>> targets;
  targets.reserve(captions.size());
  for (const Caption& c : captions) targets.push_back(c.labels);

  const std::vector<Prediction> predictions = predict(captions, pipeline, cfg.threads);
  const EvalReport report = evaluate(predictions, targets);

  nlohmann::ordered_json doc;
  doc["meta"] = cfg.meta();
  doc["map"] = report.map;
  json per_category = json::array();
  for (const auto& ap : report.per_category_ap) {
    if (ap) per_category.push_back(*ap);
    else per_category.push_back(nullptr);
  }
  doc["per_category_ap"] = std::move(per_category);
  doc["excluded_categories"] = report.excluded_categories;
  doc["n_samples"] = report.n_samples;
  doc["degenerate_count"] = report.degenerate_count;

  std::ofstream out(cfg.out_dir / "eval_report.json");
  if (!out) throw Error("cannot write eval_report.json");
  out << doc.dump(2) << '\n';

  std::cout << "category                 AP\n";
  for (int i = 0; i < kNumEmotions; ++i) {
    const auto& ap = report.per_category_ap[static_cast<std::size_t>(i)];
    std::printf("%-22s ", emotion_categories()[static_cast<std::size_t>(i)].c_str());
    if (ap) std::printf("%8.4f\n", *ap);
    else std::printf("       - (no positives)\n");
  }
  std::printf("mAP %.4f over %d samples (%d degenerate)\n", report.map, report.n_samples,
              report.degenerate_count);
}

void cmd_infer(const RunConfig& cfg, const std::optional<std::string>& text,
               const std::optional<std::filesystem::path>& input_file) {
  if (!text && !input_file) throw DomainError("infer needs --text or --input");
  const Pipeline pipeline = load_pipeline(cfg);

  std::vector<Caption> captions;
  if (text) {
    captions.push_back({"cli", *text, {}, {0.0, 0.0, 0.0}});
  } else {
    require_input(*input_file, "input");
    captions = load_captions(*input_file, cfg.vad_scale);
  }

  const std::vector<Prediction> predictions = predict(captions, pipeline, cfg.threads);

  std::vector<std::size_t> order(captions.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&captions](std::size_t a, std::size_t b) {
    return captions[a].id < captions[b].id;
  });

  ensure_out_dir(cfg);
  std::ofstream out(cfg.out_dir / "predictions.jsonl");
  if (!out) throw Error("cannot write predictions.jsonl");
  out << json{{"meta", cfg.meta()}}.dump() << '\n';
  for (std::size_t i : order) {
    const json row = prediction_row(captions[i].id, predictions[i], cfg.top_k);
    out << row.dump() << '\n';
    std::cout << row.dump() << '\n';
  }
}

void cmd_bench(const RunConfig& cfg) {
  require_input(cfg.captions, "captions");
  const Pipeline pipeline = load_pipeline(cfg);
  const std::vector<Caption> captions = load_captions(cfg.captions, cfg.vad_scale);

  const LatencyReport report =
      bench_inference(captions, pipeline, cfg.bench_warmup, cfg.bench_reps);

  nlohmann::ordered_json doc;
  doc["meta"] = cfg.meta();
  doc["min_ms"] = report.min_ms;
  doc["mean_ms"] = report.mean_ms;
  doc["fps_min"] = report.fps_min;
  doc["fps_mean"] = report.fps_mean;
  doc["per_sample_ms"] = report.per_sample_ms;

  ensure_out_dir(cfg);
  std::ofstream out(cfg.out_dir / "latency_report.json");
  if (!out) throw Error("cannot write latency_report.json");
  out << doc.dump(2) << '\n';

  std::printf("samples  %zu\n", report.per_sample_ms.size());
  std::printf("min      %.4f ms  (%.1f fps)\n", report.min_ms, report.fps_min);
  std::printf("mean     %.4f ms  (%.1f fps)\n", report.mean_ms, report.fps_mean);
}

}  // namespace emograph
