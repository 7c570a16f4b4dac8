#include "emograph/evaluation.hpp"

#include <algorithm>
#include <chrono>
#include <numeric>

#include "emograph/errors.hpp"

namespace emograph {

std::optional<double> average_precision(const std::vector<double>& scores,
                                        const std::vector<int>& labels) {
  if (scores.size() != labels.size()) {
    throw DomainError("average_precision: scores and labels differ in length");
  }
  const auto positives = std::count_if(labels.begin(), labels.end(), [](int l) { return l != 0; });
  if (positives == 0) return std::nullopt;

  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&scores](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });

  double sum_precision = 0.0;
  std::size_t hits = 0;
  for (std::size_t rank = 0; rank < order.size(); ++rank) {
    if (labels[order[rank]] != 0) {
      ++hits;
      sum_precision += static_cast<double>(hits) / static_cast<double>(rank + 1);
    }
  }
  return sum_precision / static_cast<double>(positives);
}

EvalReport evaluate(const std::vector<Prediction>& predictions,
                    const std::vector<std::set<int>>& targets) {
  if (predictions.size() != targets.size()) {
    throw DomainError("evaluate: predictions and targets differ in length");
  }
  if (predictions.empty()) throw DomainError("evaluate: no samples");

  EvalReport report;
  report.n_samples = static_cast<int>(predictions.size());
  report.degenerate_count = static_cast<int>(
      std::count_if(predictions.begin(), predictions.end(),
                    [](const Prediction& p) { return p.degenerate; }));

  double ap_sum = 0.0;
  int ap_count = 0;
  for (int category = 0; category < kNumEmotions; ++category) {
    std::vector<double> scores;
    std::vector<int> labels;
    scores.reserve(predictions.size());
    labels.reserve(predictions.size());
    for (std::size_t i = 0; i < predictions.size(); ++i) {
      scores.push_back(predictions[i].cat[static_cast<std::size_t>(category)]);
      labels.push_back(targets[i].contains(category) ? 1 : 0);
    }
    const std::optional<double> ap = average_precision(scores, labels);
    report.per_category_ap.push_back(ap);
    if (ap) {
      ap_sum += *ap;
      ++ap_count;
    } else {
      report.excluded_categories.push_back(category);
    }
  }
  if (ap_count == 0) throw DomainError("evaluate: every category lacks positives");
  report.map = ap_sum / static_cast<double>(ap_count);
  return report;
}

LatencyReport bench_inference(const std::vector<Caption>& captions, const Pipeline& pipeline,
                              int warmup, int reps) {
  if (reps < 1) throw DomainError("bench reps must be >= 1");
  if (warmup < 0) throw DomainError("bench warmup must be >= 0");
  if (warmup >= reps) throw DomainError("bench warmup must be smaller than reps");
  if (captions.empty()) throw DomainError("bench needs at least one caption");

  LatencyReport report;
  report.per_sample_ms.reserve(captions.size() * static_cast<std::size_t>(reps));
  for (const Caption& caption : captions) {
    for (int i = 0; i < warmup; ++i) {
      volatile double sink = predict_one(caption, pipeline).cont[0];
      (void)sink;
    }
    for (int i = 0; i < reps; ++i) {
      const auto start = std::chrono::steady_clock::now();
      volatile double sink = predict_one(caption, pipeline).cont[0];
      (void)sink;
      const auto stop = std::chrono::steady_clock::now();
      report.per_sample_ms.push_back(
          std::chrono::duration<double, std::milli>(stop - start).count());
    }
  }

  report.min_ms = *std::min_element(report.per_sample_ms.begin(), report.per_sample_ms.end());
  report.mean_ms = std::accumulate(report.per_sample_ms.begin(), report.per_sample_ms.end(), 0.0) /
                   static_cast<double>(report.per_sample_ms.size());
  report.fps_min = 1000.0 / report.min_ms;
  report.fps_mean = 1000.0 / report.mean_ms;
  return report;
}

}  // namespace emograph
