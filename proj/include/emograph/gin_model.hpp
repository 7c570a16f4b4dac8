#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json_fwd.hpp>

#include "emograph/emotions.hpp"
#include "emograph/graph_builder.hpp"

namespace emograph {

enum class Pooling { kAverage, kSum };

const char* to_string(Pooling pooling);
std::optional<Pooling> pooling_from_string(std::string_view s);

struct ModelConfig {
  int input_dim = kEmbeddingDim;
  int hidden_dim = 64;
  int readout_dim = 64;
  int num_blocks = 5;
  Pooling pooling = Pooling::kAverage;
  bool readout_skip_h0 = false;

  bool operator==(const ModelConfig&) const = default;
};

struct Affine {
  Eigen::MatrixXd weight;  // in x out
  Eigen::VectorXd bias;    // out
};

struct BatchNorm {
  Eigen::VectorXd gamma, beta;
  Eigen::VectorXd running_mean, running_var;
};

// Flat view over one named parameter tensor.
struct ParamView {
  std::string name;
  double* data;
  Eigen::Index rows, cols;
  Eigen::Index size() const { return rows * cols; }
};

// All learnable state: per-block epsilon scalars, the two affine layers of
// each block's MLP (ReLU between them), per-block batch norm, one readout
// projection per hidden representation h0..hK, and the two output heads.
struct GinModel {
  ModelConfig config;
  Eigen::VectorXd eps;                    // num_blocks
  std::vector<Affine> mlp_in, mlp_out;    // num_blocks each
  std::vector<BatchNorm> norms;           // num_blocks
  std::vector<Affine> readout;            // num_blocks + 1
  Affine head_cat, head_cont;

  // Glorot-uniform affine weights, zero biases and epsilons, identity norms.
  static GinModel init(const ModelConfig& config, std::uint64_t seed);
  // Same shapes, all learnable tensors zero (gradient container).
  static GinModel zeros_like(const GinModel& other);

  std::vector<ParamView> params();
  std::vector<ParamView> params() const;  // views are read-only by convention
  std::vector<ParamView> buffers();       // batch-norm running stats
  std::vector<ParamView> buffers() const;
};

bool models_equal(const GinModel& a, const GinModel& b);

// A disjoint union of graphs: one node-feature matrix, edge list with batch
// node indices, and per-graph [begin, end) node spans.
struct GraphBatch {
  Eigen::MatrixXd features;
  std::vector<GraphEdge> edges;
  std::vector<int> spans;  // size num_graphs + 1

  int num_graphs() const { return static_cast<int>(spans.size()) - 1; }
  int num_nodes() const { return static_cast<int>(features.rows()); }

  static GraphBatch from_graphs(const std::vector<const ContextGraph*>& graphs, int input_dim);
};

enum class RunMode { kTrain, kEval };

struct Prediction {
  std::array<double, kNumEmotions> cat{};
  std::array<double, 3> cont{};
  bool degenerate = false;
};

// Everything the backward pass needs from one forward pass.
struct BlockTrace {
  Eigen::MatrixXd aggregated;  // (1+eps)h + weighted neighbor sum
  Eigen::MatrixXd z1, u, z2;   // MLP intermediates
  Eigen::MatrixXd xhat;        // normalized pre-activation
  Eigen::VectorXd mean, invstd;
  Eigen::MatrixXd h;           // block output
};

struct ForwardTrace {
  RunMode mode = RunMode::kEval;
  std::vector<Eigen::MatrixXd> hidden;  // h0..hK
  std::vector<BlockTrace> blocks;
  std::vector<Eigen::MatrixXd> pooled;  // r_k per readout level, G x dim_k
  Eigen::MatrixXd combined;             // z, G x readout_dim
  Eigen::MatrixXd logits, cat, cont;
};

ForwardTrace forward_eval(const GraphBatch& batch, const GinModel& model);
ForwardTrace forward_train(const GraphBatch& batch, GinModel& model);  // updates running stats

// Single-graph convenience (eval mode).
Prediction forward_graph(const ContextGraph& graph, const GinModel& model);

namespace detail {
// a_v = (1 + eps) h_v + sum over in-edges (u -> v) of weight * h_u.
Eigen::MatrixXd aggregate_neighbors(const Eigen::MatrixXd& h, const std::vector<GraphEdge>& edges,
                                    double eps);
}  // namespace detail

struct LossConfig {
  double lambda_cat = 1.0;
  double lambda_cont = 1.0;
  double c = 1.2;
  std::array<double, kNumEmotions> category_prior{};

  // w_i = 1 / ln(c + p_i). Requires ln(c + p_i) > 0 for every category.
  std::array<double, kNumEmotions> category_weights() const;
};

struct BatchTargets {
  Eigen::MatrixXd cat;   // G x 26, 0/1 indicators
  Eigen::MatrixXd cont;  // G x 3
};

// Weighted squared error over categories plus plain squared error over VAD.
double prediction_loss(const Prediction& pred, const std::set<int>& labels,
                       const std::array<double, 3>& vad, const LossConfig& cfg);

double batch_loss(const ForwardTrace& trace, const BatchTargets& targets, const LossConfig& cfg);

struct LossAndGradients {
  double loss = 0.0;
  GinModel gradients;
};

// Forward + reverse accumulation through heads, readouts, batch norm, MLPs
// and message passing. Loss is the mean over graphs in the batch.
LossAndGradients loss_and_gradients(const GraphBatch& batch, const BatchTargets& targets,
                                    GinModel& model, const LossConfig& cfg, RunMode mode);

struct TrainConfig {
  int batch_size = 16;
  double lr = 0.001;
  double weight_decay = 0.0004;
  int epochs = 0;
  std::uint64_t seed = 0;
  double rho = 0.9;
  double eps = 1e-6;
};

struct AdadeltaState {
  std::vector<Eigen::ArrayXd> accum_grad, accum_delta;
};

// E[g^2] <- rho E[g^2] + (1-rho) g^2
// delta  = -sqrt(E[dx^2] + eps) / sqrt(E[g^2] + eps) * lr * g
// E[dx^2]<- rho E[dx^2] + (1-rho) delta^2
// followed by decoupled weight decay theta *= (1 - lr * wd).
class AdadeltaOptimizer {
 public:
  AdadeltaOptimizer(const GinModel& model, const TrainConfig& cfg);

  void step(GinModel& model, const GinModel& gradients);

  AdadeltaState snapshot() const { return {accum_grad_, accum_delta_}; }
  void restore(const AdadeltaState& state);  // shapes must match

  const std::vector<Eigen::ArrayXd>& accum_grad() const { return accum_grad_; }
  const std::vector<Eigen::ArrayXd>& accum_delta() const { return accum_delta_; }

 private:
  TrainConfig cfg_;
  std::vector<Eigen::ArrayXd> accum_grad_, accum_delta_;
};

struct TrainSample {
  ContextGraph graph;
  std::set<int> labels;
  std::array<double, 3> vad{};
};

struct EpochStats {
  double train_loss = 0.0;
  std::optional<double> val_loss;
  std::optional<double> val_map;
};

// Called once per epoch with the model in eval state; returns (loss, mAP).
using ValidationHook = std::function<std::pair<double, double>(const GinModel&)>;

std::vector<EpochStats> train_model(GinModel& model, const std::vector<TrainSample>& samples,
                                    const TrainConfig& tc, const LossConfig& lc,
                                    const ValidationHook& validation = nullptr,
                                    AdadeltaOptimizer* optimizer_out = nullptr);

void save_checkpoint(const GinModel& model, const std::filesystem::path& path,
                     const nlohmann::json& meta, const AdadeltaOptimizer* optimizer = nullptr);
// state_out, when given, demands an optimizer_state section in the file.
GinModel load_checkpoint(const std::filesystem::path& path,
                         const std::optional<ModelConfig>& expected = std::nullopt,
                         nlohmann::json* meta_out = nullptr,
                         AdadeltaState* state_out = nullptr);

}  // namespace emograph
