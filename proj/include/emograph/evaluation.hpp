#pragma once

#include <optional>
#include <set>
#include <vector>

#include "emograph/gin_model.hpp"
#include "emograph/pipeline.hpp"

namespace emograph {

struct EvalReport {
  std::vector<std::optional<double>> per_category_ap;  // 26 entries, nullopt = no positives
  std::vector<int> excluded_categories;
  double map = 0.0;
  int n_samples = 0;
  int degenerate_count = 0;
};

// Non-interpolated AP: mean of precision at the rank of each positive, with
// the ranking sorted by descending score and ties broken by input order.
// nullopt when the category has no positive sample.
std::optional<double> average_precision(const std::vector<double>& scores,
                                        const std::vector<int>& labels);

EvalReport evaluate(const std::vector<Prediction>& predictions,
                    const std::vector<std::set<int>>& targets);

struct LatencyReport {
  std::vector<double> per_sample_ms;
  double min_ms = 0.0;
  double mean_ms = 0.0;
  double fps_min = 0.0;
  double fps_mean = 0.0;
};

// Times predict_one per caption at batch size 1 on the calling thread:
// `warmup` untimed passes per caption, then `reps` timed ones.
LatencyReport bench_inference(const std::vector<Caption>& captions, const Pipeline& pipeline,
                              int warmup, int reps);

}  // namespace emograph
