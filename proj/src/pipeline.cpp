#include "emograph/pipeline.hpp"

#include <thread>

namespace emograph {

namespace {

Prediction degenerate_prediction() {
  Prediction p;
  p.cat.fill(0.5);
  p.cont = {0.5, 0.5, 0.5};
  p.degenerate = true;
  return p;
}

}  // namespace

Prediction predict_one(const Caption& caption, const Pipeline& pipeline) {
  const NormalizedCaption nc = normalize(caption, pipeline.normalization);
  const std::optional<ContextGraph> graph =
      build_graph(nc, pipeline.cooccurrence, pipeline.stores());
  if (!graph) return degenerate_prediction();
  return forward_graph(*graph, pipeline.model);
}

std::vector<Prediction> predict(const std::vector<Caption>& captions, const Pipeline& pipeline,
                                int threads) {
  std::vector<Prediction> predictions(captions.size());
  auto run_range = [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      predictions[i] = predict_one(captions[i], pipeline);
    }
  };
  if (threads <= 1 || captions.size() < 2) {
    run_range(0, captions.size());
  } else {
    const std::size_t n_workers =
        std::min<std::size_t>(static_cast<std::size_t>(threads), captions.size());
    const std::size_t chunk = (captions.size() + n_workers - 1) / n_workers;
    std::vector<std::thread> workers;
    for (std::size_t w = 0; w < n_workers; ++w) {
      const std::size_t begin = w * chunk;
      const std::size_t end = std::min(captions.size(), begin + chunk);
      if (begin < end) workers.emplace_back(run_range, begin, end);
    }
    for (std::thread& t : workers) t.join();
  }
  return predictions;
}

}  // namespace emograph
