#include <cmath>
#include <numeric>
#include <optional>
#include <sstream>

#include "emograph/errors.hpp"
#include "emograph/gin_model.hpp"
#include "emograph/rng.hpp"

namespace emograph {

AdadeltaOptimizer::AdadeltaOptimizer(const GinModel& model, const TrainConfig& cfg) : cfg_(cfg) {
  if (cfg.batch_size < 1) throw DomainError("batch_size must be >= 1");
  if (cfg.rho < 0.0 || cfg.rho >= 1.0) throw DomainError("adadelta rho must be in [0, 1)");
  if (cfg.eps <= 0.0) throw DomainError("adadelta eps must be positive");
  for (const ParamView& p : model.params()) {
    accum_grad_.push_back(Eigen::ArrayXd::Zero(p.size()));
    accum_delta_.push_back(Eigen::ArrayXd::Zero(p.size()));
  }
}

void AdadeltaOptimizer::restore(const AdadeltaState& state) {
  if (state.accum_grad.size() != accum_grad_.size() ||
      state.accum_delta.size() != accum_delta_.size()) {
    throw FormatError("optimizer state does not match the model's parameter list");
  }
  for (std::size_t i = 0; i < accum_grad_.size(); ++i) {
    if (state.accum_grad[i].size() != accum_grad_[i].size() ||
        state.accum_delta[i].size() != accum_delta_[i].size()) {
      throw FormatError("optimizer state tensor " + std::to_string(i) + " has the wrong size");
    }
  }
  accum_grad_ = state.accum_grad;
  accum_delta_ = state.accum_delta;
}

void AdadeltaOptimizer::step(GinModel& model, const GinModel& gradients) {
  const auto params = model.params();
  const auto grads = gradients.params();
  const double decay_factor = 1.0 - cfg_.lr * cfg_.weight_decay;
  for (std::size_t i = 0; i < params.size(); ++i) {
    Eigen::Map<Eigen::ArrayXd> theta(params[i].data, params[i].size());
    const Eigen::Map<const Eigen::ArrayXd> g(grads[i].data, grads[i].size());
    Eigen::ArrayXd& eg = accum_grad_[i];
    Eigen::ArrayXd& ed = accum_delta_[i];

    eg = cfg_.rho * eg + (1.0 - cfg_.rho) * g.square();
    const Eigen::ArrayXd delta =
        -((ed + cfg_.eps).sqrt() / (eg + cfg_.eps).sqrt()) * cfg_.lr * g;
    theta += delta;
    ed = cfg_.rho * ed + (1.0 - cfg_.rho) * delta.square();

    // Decoupled weight decay, applied after the adaptive step.
    theta *= decay_factor;
  }
}

namespace {

std::string parameter_norms(const GinModel& model) {
  std::ostringstream out;
  for (const ParamView& p : model.params()) {
    const Eigen::Map<const Eigen::ArrayXd> values(p.data, p.size());
    out << ' ' << p.name << "=" << std::sqrt(values.square().sum());
  }
  return out.str();
}

}  // namespace

std::vector<EpochStats> train_model(GinModel& model, const std::vector<TrainSample>& samples,
                                    const TrainConfig& tc, const LossConfig& lc,
                                    const ValidationHook& validation,
                                    AdadeltaOptimizer* optimizer_out) {
  if (samples.empty()) throw DomainError("training set is empty");
  if (tc.epochs < 0) throw DomainError("epochs must be >= 0");

  std::optional<AdadeltaOptimizer> local_optimizer;
  if (optimizer_out == nullptr) local_optimizer.emplace(model, tc);
  AdadeltaOptimizer& optimizer = optimizer_out != nullptr ? *optimizer_out : *local_optimizer;

  Rng shuffle_rng = keyed_rng(tc.seed, "train-shuffle");
  std::vector<std::size_t> order(samples.size());
  std::iota(order.begin(), order.end(), std::size_t{0});

  std::vector<EpochStats> history;
  history.reserve(static_cast<std::size_t>(tc.epochs));
  for (int epoch = 0; epoch < tc.epochs; ++epoch) {
    shuffle_rng.shuffle(order);

    double epoch_loss = 0.0;
    std::size_t batch_index = 0;
    for (std::size_t begin = 0; begin < order.size();
         begin += static_cast<std::size_t>(tc.batch_size), ++batch_index) {
      const std::size_t end =
          std::min(order.size(), begin + static_cast<std::size_t>(tc.batch_size));
      const auto count = static_cast<int>(end - begin);

      std::vector<const ContextGraph*> graphs;
      graphs.reserve(static_cast<std::size_t>(count));
      BatchTargets targets;
      targets.cat = Eigen::MatrixXd::Zero(count, kNumEmotions);
      targets.cont = Eigen::MatrixXd::Zero(count, 3);
      for (std::size_t i = begin; i < end; ++i) {
        const TrainSample& sample = samples[order[i]];
        const auto row = static_cast<Eigen::Index>(i - begin);
        graphs.push_back(&sample.graph);
        for (int label : sample.labels) targets.cat(row, label) = 1.0;
        for (int j = 0; j < 3; ++j) targets.cont(row, j) = sample.vad[static_cast<std::size_t>(j)];
      }

      const GraphBatch batch = GraphBatch::from_graphs(graphs, model.config.input_dim);
      const LossAndGradients step =
          loss_and_gradients(batch, targets, model, lc, RunMode::kTrain);
      if (!std::isfinite(step.loss)) {
        throw Error("non-finite loss at epoch " + std::to_string(epoch + 1) + ", batch " +
                    std::to_string(batch_index + 1) + "; parameter norms:" +
                    parameter_norms(model));
      }
      optimizer.step(model, step.gradients);
      epoch_loss += step.loss * static_cast<double>(count);
    }

    EpochStats stats;
    stats.train_loss = epoch_loss / static_cast<double>(samples.size());
    if (validation) {
      const auto [val_loss, val_map] = validation(model);
      stats.val_loss = val_loss;
      stats.val_map = val_map;
    }
    history.push_back(stats);
  }
  return history;
}

}  // namespace emograph
