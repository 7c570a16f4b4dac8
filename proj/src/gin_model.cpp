#include "emograph/gin_model.hpp"

#include <cmath>
#include <fstream>

#include <nlohmann/json.hpp>

#include "emograph/errors.hpp"
#include "emograph/rng.hpp"

namespace emograph {

namespace {

using json = nlohmann::json;

constexpr double kBnEps = 1e-5;
constexpr double kBnMomentum = 0.1;
constexpr int kCheckpointVersion = 1;

Affine glorot_affine(int in, int out, Rng& rng) {
  Affine a;
  a.weight.resize(in, out);
  const double bound = std::sqrt(6.0 / static_cast<double>(in + out));
  for (Eigen::Index j = 0; j < a.weight.cols(); ++j) {
    for (Eigen::Index i = 0; i < a.weight.rows(); ++i) {
      a.weight(i, j) = rng.uniform(-bound, bound);
    }
  }
  a.bias = Eigen::VectorXd::Zero(out);
  return a;
}

Affine zero_affine(int in, int out) {
  return {Eigen::MatrixXd::Zero(in, out), Eigen::VectorXd::Zero(out)};
}

int block_input_dim(const ModelConfig& cfg, int block) {
  return block == 0 ? cfg.input_dim : cfg.hidden_dim;
}

int readout_input_dim(const ModelConfig& cfg, int level) {
  return level == 0 ? cfg.input_dim : cfg.hidden_dim;
}

GinModel zeros_from_config(const ModelConfig& config) {
  GinModel m;
  m.config = config;
  m.eps = Eigen::VectorXd::Zero(config.num_blocks);
  for (int k = 0; k < config.num_blocks; ++k) {
    m.mlp_in.push_back(zero_affine(block_input_dim(config, k), config.hidden_dim));
    m.mlp_out.push_back(zero_affine(config.hidden_dim, config.hidden_dim));
    BatchNorm bn;
    bn.gamma = Eigen::VectorXd::Zero(config.hidden_dim);
    bn.beta = Eigen::VectorXd::Zero(config.hidden_dim);
    bn.running_mean = Eigen::VectorXd::Zero(config.hidden_dim);
    bn.running_var = Eigen::VectorXd::Zero(config.hidden_dim);
    m.norms.push_back(std::move(bn));
  }
  for (int k = 0; k <= config.num_blocks; ++k) {
    m.readout.push_back(zero_affine(readout_input_dim(config, k), config.readout_dim));
  }
  m.head_cat = zero_affine(config.readout_dim, kNumEmotions);
  m.head_cont = zero_affine(config.readout_dim, 3);
  return m;
}

}  // namespace

const char* to_string(Pooling pooling) {
  return pooling == Pooling::kAverage ? "avg" : "sum";
}

std::optional<Pooling> pooling_from_string(std::string_view s) {
  if (s == "avg") return Pooling::kAverage;
  if (s == "sum") return Pooling::kSum;
  return std::nullopt;
}

GinModel GinModel::init(const ModelConfig& config, std::uint64_t seed) {
  if (config.input_dim < 1 || config.hidden_dim < 1 || config.readout_dim < 1 ||
      config.num_blocks < 1) {
    throw DomainError("model dimensions must be positive");
  }
  Rng rng = keyed_rng(seed, "gin-model-init");
  GinModel m;
  m.config = config;
  m.eps = Eigen::VectorXd::Zero(config.num_blocks);
  for (int k = 0; k < config.num_blocks; ++k) {
    m.mlp_in.push_back(glorot_affine(block_input_dim(config, k), config.hidden_dim, rng));
    m.mlp_out.push_back(glorot_affine(config.hidden_dim, config.hidden_dim, rng));
    BatchNorm bn;
    bn.gamma = Eigen::VectorXd::Ones(config.hidden_dim);
    bn.beta = Eigen::VectorXd::Zero(config.hidden_dim);
    bn.running_mean = Eigen::VectorXd::Zero(config.hidden_dim);
    bn.running_var = Eigen::VectorXd::Ones(config.hidden_dim);
    m.norms.push_back(std::move(bn));
  }
  for (int k = 0; k <= config.num_blocks; ++k) {
    m.readout.push_back(glorot_affine(readout_input_dim(config, k), config.readout_dim, rng));
  }
  m.head_cat = glorot_affine(config.readout_dim, kNumEmotions, rng);
  m.head_cont = glorot_affine(config.readout_dim, 3, rng);
  return m;
}

GinModel GinModel::zeros_like(const GinModel& other) { return zeros_from_config(other.config); }

namespace {

template <typename Model>
std::vector<ParamView> collect_params(Model& m) {
  std::vector<ParamView> views;
  auto add = [&views](const std::string& name, auto& tensor) {
    views.push_back({name, const_cast<double*>(tensor.data()), tensor.rows(), tensor.cols()});
  };
  add("eps", m.eps);
  for (int k = 0; k < m.config.num_blocks; ++k) {
    const auto ku = static_cast<std::size_t>(k);
    const std::string p = "block" + std::to_string(k + 1);
    add(p + ".mlp.w1", m.mlp_in[ku].weight);
    add(p + ".mlp.b1", m.mlp_in[ku].bias);
    add(p + ".mlp.w2", m.mlp_out[ku].weight);
    add(p + ".mlp.b2", m.mlp_out[ku].bias);
    add(p + ".bn.gamma", m.norms[ku].gamma);
    add(p + ".bn.beta", m.norms[ku].beta);
  }
  for (int k = 0; k <= m.config.num_blocks; ++k) {
    const auto ku = static_cast<std::size_t>(k);
    const std::string p = "readout" + std::to_string(k);
    add(p + ".w", m.readout[ku].weight);
    add(p + ".b", m.readout[ku].bias);
  }
  add("head_cat.w", m.head_cat.weight);
  add("head_cat.b", m.head_cat.bias);
  add("head_cont.w", m.head_cont.weight);
  add("head_cont.b", m.head_cont.bias);
  return views;
}

template <typename Model>
std::vector<ParamView> collect_buffers(Model& m) {
  std::vector<ParamView> views;
  auto add = [&views](const std::string& name, auto& tensor) {
    views.push_back({name, const_cast<double*>(tensor.data()), tensor.rows(), tensor.cols()});
  };
  for (int k = 0; k < m.config.num_blocks; ++k) {
    const auto ku = static_cast<std::size_t>(k);
    const std::string p = "block" + std::to_string(k + 1);
    add(p + ".bn.running_mean", m.norms[ku].running_mean);
    add(p + ".bn.running_var", m.norms[ku].running_var);
  }
  return views;
}

}  // namespace

std::vector<ParamView> GinModel::params() { return collect_params(*this); }
std::vector<ParamView> GinModel::params() const { return collect_params(*this); }
std::vector<ParamView> GinModel::buffers() { return collect_buffers(*this); }
std::vector<ParamView> GinModel::buffers() const { return collect_buffers(*this); }

bool models_equal(const GinModel& a, const GinModel& b) {
  if (!(a.config == b.config)) return false;
  auto same = [](const std::vector<ParamView>& x, const std::vector<ParamView>& y) {
    if (x.size() != y.size()) return false;
    for (std::size_t i = 0; i < x.size(); ++i) {
      if (x[i].name != y[i].name || x[i].rows != y[i].rows || x[i].cols != y[i].cols) return false;
      for (Eigen::Index j = 0; j < x[i].size(); ++j) {
        if (x[i].data[j] != y[i].data[j]) return false;
      }
    }
    return true;
  };
  return same(a.params(), b.params()) && same(a.buffers(), b.buffers());
}

GraphBatch GraphBatch::from_graphs(const std::vector<const ContextGraph*>& graphs, int input_dim) {
  if (graphs.empty()) throw DomainError("empty batch");
  GraphBatch batch;
  int total = 0;
  batch.spans.push_back(0);
  for (const ContextGraph* g : graphs) {
    if (g->nodes.empty()) throw DomainError("empty graph rejected: '" + g->caption_id + "'");
    total += static_cast<int>(g->nodes.size());
    batch.spans.push_back(total);
  }
  batch.features.resize(total, input_dim);
  int offset = 0;
  for (const ContextGraph* g : graphs) {
    for (const GraphNode& node : g->nodes) {
      if (static_cast<int>(node.feature.size()) != input_dim) {
        throw DomainError("node feature dimension " + std::to_string(node.feature.size()) +
                          " does not match model input " + std::to_string(input_dim));
      }
      for (int j = 0; j < input_dim; ++j) {
        batch.features(offset + node.id, j) = node.feature[static_cast<std::size_t>(j)];
      }
    }
    for (const GraphEdge& e : g->edges) {
      batch.edges.push_back({e.src + offset, e.dst + offset, e.weight});
    }
    offset += static_cast<int>(g->nodes.size());
  }
  return batch;
}

namespace detail {

Eigen::MatrixXd aggregate_neighbors(const Eigen::MatrixXd& h, const std::vector<GraphEdge>& edges,
                                    double eps) {
  Eigen::MatrixXd out = (1.0 + eps) * h;
  for (const GraphEdge& e : edges) {
    out.row(e.dst) += e.weight * h.row(e.src);
  }
  return out;
}

}  // namespace detail

namespace {

Eigen::MatrixXd affine_forward(const Eigen::MatrixXd& x, const Affine& a) {
  Eigen::MatrixXd out = x * a.weight;
  out.rowwise() += a.bias.transpose();
  return out;
}

Eigen::MatrixXd pool_rows(const Eigen::MatrixXd& h, const std::vector<int>& spans,
                          Pooling pooling) {
  const int g_count = static_cast<int>(spans.size()) - 1;
  Eigen::MatrixXd pooled(g_count, h.cols());
  for (int g = 0; g < g_count; ++g) {
    const int begin = spans[static_cast<std::size_t>(g)];
    const int count = spans[static_cast<std::size_t>(g) + 1] - begin;
    Eigen::RowVectorXd acc = h.middleRows(begin, count).colwise().sum();
    if (pooling == Pooling::kAverage) acc /= static_cast<double>(count);
    pooled.row(g) = acc;
  }
  return pooled;
}

// Broadcast helpers; Eigen's rowwise ops only mix cleanly within one family.
Eigen::MatrixXd scale_cols(const Eigen::MatrixXd& m, const Eigen::VectorXd& col_scale) {
  return m * col_scale.asDiagonal();
}

ForwardTrace run_forward(const GraphBatch& batch, const GinModel& model, GinModel* mutable_model,
                         RunMode mode) {
  const ModelConfig& cfg = model.config;
  if (batch.features.cols() != cfg.input_dim) {
    throw DomainError("batch feature dimension does not match model input");
  }

  ForwardTrace trace;
  trace.mode = mode;
  trace.hidden.push_back(batch.features);

  const auto n = batch.features.rows();
  for (int k = 0; k < cfg.num_blocks; ++k) {
    const auto ku = static_cast<std::size_t>(k);
    BlockTrace bt;
    bt.aggregated = detail::aggregate_neighbors(trace.hidden.back(), batch.edges, model.eps(k));
    bt.z1 = affine_forward(bt.aggregated, model.mlp_in[ku]);
    bt.u = bt.z1.cwiseMax(0.0);
    bt.z2 = affine_forward(bt.u, model.mlp_out[ku]);

    const BatchNorm& bn = model.norms[ku];
    if (mode == RunMode::kTrain) {
      bt.mean = bt.z2.colwise().mean().transpose();
      Eigen::MatrixXd centered = bt.z2;
      centered.rowwise() -= bt.mean.transpose();
      const Eigen::VectorXd var =
          centered.array().square().matrix().colwise().mean().transpose();
      bt.invstd = (var.array() + kBnEps).rsqrt().matrix();
      bt.xhat = scale_cols(centered, bt.invstd);
      if (mutable_model != nullptr) {
        // PyTorch convention: normalize with the biased variance, track the
        // unbiased one in the running estimate.
        Eigen::VectorXd track_var = var;
        if (n > 1) track_var *= static_cast<double>(n) / static_cast<double>(n - 1);
        BatchNorm& live = mutable_model->norms[ku];
        live.running_mean = (1.0 - kBnMomentum) * live.running_mean + kBnMomentum * bt.mean;
        live.running_var = (1.0 - kBnMomentum) * live.running_var + kBnMomentum * track_var;
      }
    } else {
      bt.mean = bn.running_mean;
      bt.invstd = (bn.running_var.array() + kBnEps).rsqrt().matrix();
      Eigen::MatrixXd centered = bt.z2;
      centered.rowwise() -= bt.mean.transpose();
      bt.xhat = scale_cols(centered, bt.invstd);
    }
    Eigen::MatrixXd scaled = scale_cols(bt.xhat, bn.gamma);
    scaled.rowwise() += bn.beta.transpose();
    bt.h = scaled.cwiseMax(0.0);
    trace.hidden.push_back(bt.h);
    trace.blocks.push_back(std::move(bt));
  }

  trace.combined = Eigen::MatrixXd::Zero(batch.num_graphs(), cfg.readout_dim);
  trace.pooled.resize(trace.hidden.size());
  for (int k = 0; k <= cfg.num_blocks; ++k) {
    if (k == 0 && cfg.readout_skip_h0) continue;
    const auto ku = static_cast<std::size_t>(k);
    trace.pooled[ku] = pool_rows(trace.hidden[ku], batch.spans, cfg.pooling);
    trace.combined += affine_forward(trace.pooled[ku], model.readout[ku]);
  }

  trace.logits = affine_forward(trace.combined, model.head_cat);
  trace.cat = trace.logits.unaryExpr([](double x) { return 1.0 / (1.0 + std::exp(-x)); });
  trace.cont = affine_forward(trace.combined, model.head_cont);
  return trace;
}

}  // namespace

ForwardTrace forward_eval(const GraphBatch& batch, const GinModel& model) {
  return run_forward(batch, model, nullptr, RunMode::kEval);
}

ForwardTrace forward_train(const GraphBatch& batch, GinModel& model) {
  return run_forward(batch, model, &model, RunMode::kTrain);
}

Prediction forward_graph(const ContextGraph& graph, const GinModel& model) {
  const GraphBatch batch = GraphBatch::from_graphs({&graph}, model.config.input_dim);
  const ForwardTrace trace = forward_eval(batch, model);
  Prediction pred;
  for (int i = 0; i < kNumEmotions; ++i) pred.cat[static_cast<std::size_t>(i)] = trace.cat(0, i);
  for (int j = 0; j < 3; ++j) pred.cont[static_cast<std::size_t>(j)] = trace.cont(0, j);
  return pred;
}

std::array<double, kNumEmotions> LossConfig::category_weights() const {
  std::array<double, kNumEmotions> w{};
  for (int i = 0; i < kNumEmotions; ++i) {
    const double p = category_prior[static_cast<std::size_t>(i)];
    const double log_term = std::log(c + p);
    if (!(log_term > 0.0)) {
      throw DomainError("loss weight undefined: ln(c + p) <= 0 for category " + std::to_string(i));
    }
    w[static_cast<std::size_t>(i)] = 1.0 / log_term;
  }
  return w;
}

double prediction_loss(const Prediction& pred, const std::set<int>& labels,
                       const std::array<double, 3>& vad, const LossConfig& cfg) {
  const auto w = cfg.category_weights();
  double cat_loss = 0.0;
  for (int i = 0; i < kNumEmotions; ++i) {
    const double target = labels.contains(i) ? 1.0 : 0.0;
    const double diff = pred.cat[static_cast<std::size_t>(i)] - target;
    cat_loss += w[static_cast<std::size_t>(i)] * diff * diff;
  }
  double cont_loss = 0.0;
  for (int j = 0; j < 3; ++j) {
    const double diff = pred.cont[static_cast<std::size_t>(j)] - vad[static_cast<std::size_t>(j)];
    cont_loss += diff * diff;
  }
  return cfg.lambda_cat * cat_loss + cfg.lambda_cont * cont_loss;
}

double batch_loss(const ForwardTrace& trace, const BatchTargets& targets, const LossConfig& cfg) {
  const auto w = cfg.category_weights();
  const auto g_count = trace.cat.rows();
  if (targets.cat.rows() != g_count || targets.cont.rows() != g_count) {
    throw DomainError("target count does not match batch");
  }
  double total = 0.0;
  for (Eigen::Index g = 0; g < g_count; ++g) {
    double cat_loss = 0.0;
    for (int i = 0; i < kNumEmotions; ++i) {
      const double diff = trace.cat(g, i) - targets.cat(g, i);
      cat_loss += w[static_cast<std::size_t>(i)] * diff * diff;
    }
    double cont_loss = 0.0;
    for (int j = 0; j < 3; ++j) {
      const double diff = trace.cont(g, j) - targets.cont(g, j);
      cont_loss += diff * diff;
    }
    total += cfg.lambda_cat * cat_loss + cfg.lambda_cont * cont_loss;
  }
  return total / static_cast<double>(g_count);
}

LossAndGradients loss_and_gradients(const GraphBatch& batch, const BatchTargets& targets,
                                    GinModel& model, const LossConfig& cfg, RunMode mode) {
  const ForwardTrace trace =
      mode == RunMode::kTrain ? forward_train(batch, model) : forward_eval(batch, model);

  LossAndGradients result;
  result.loss = batch_loss(trace, targets, cfg);
  result.gradients = GinModel::zeros_like(model);
  GinModel& grads = result.gradients;
  const ModelConfig& mc = model.config;
  const auto w = cfg.category_weights();
  const double inv_g = 1.0 / static_cast<double>(batch.num_graphs());

  // Heads.
  Eigen::MatrixXd dcat = 2.0 * cfg.lambda_cat * inv_g * (trace.cat - targets.cat);
  for (int i = 0; i < kNumEmotions; ++i) dcat.col(i) *= w[static_cast<std::size_t>(i)];
  const Eigen::MatrixXd dlogits =
      (dcat.array() * trace.cat.array() * (1.0 - trace.cat.array())).matrix();
  const Eigen::MatrixXd dcont = 2.0 * cfg.lambda_cont * inv_g * (trace.cont - targets.cont);

  grads.head_cat.weight = trace.combined.transpose() * dlogits;
  grads.head_cat.bias = dlogits.colwise().sum().transpose();
  grads.head_cont.weight = trace.combined.transpose() * dcont;
  grads.head_cont.bias = dcont.colwise().sum().transpose();

  const Eigen::MatrixXd dz =
      dlogits * model.head_cat.weight.transpose() + dcont * model.head_cont.weight.transpose();

  // Readouts: pooled gradient scattered back over each graph's node span.
  std::vector<Eigen::MatrixXd> dhidden(trace.hidden.size());
  for (std::size_t k = 0; k < trace.hidden.size(); ++k) {
    dhidden[k] = Eigen::MatrixXd::Zero(trace.hidden[k].rows(), trace.hidden[k].cols());
  }
  for (int k = 0; k <= mc.num_blocks; ++k) {
    if (k == 0 && mc.readout_skip_h0) continue;
    const auto ku = static_cast<std::size_t>(k);
    grads.readout[ku].weight = trace.pooled[ku].transpose() * dz;
    grads.readout[ku].bias = dz.colwise().sum().transpose();
    const Eigen::MatrixXd dpooled = dz * model.readout[ku].weight.transpose();
    for (int g = 0; g < batch.num_graphs(); ++g) {
      const int begin = batch.spans[static_cast<std::size_t>(g)];
      const int count = batch.spans[static_cast<std::size_t>(g) + 1] - begin;
      const double scale = mc.pooling == Pooling::kAverage ? 1.0 / static_cast<double>(count) : 1.0;
      dhidden[ku].middleRows(begin, count).rowwise() += scale * dpooled.row(g);
    }
  }

  // Blocks, top down.
  for (int k = mc.num_blocks - 1; k >= 0; --k) {
    const auto ku = static_cast<std::size_t>(k);
    const BlockTrace& bt = trace.blocks[ku];
    const BatchNorm& bn = model.norms[ku];

    const Eigen::MatrixXd dout =
        (dhidden[ku + 1].array() * (bt.h.array() > 0.0).cast<double>()).matrix();

    grads.norms[ku].gamma = (dout.array() * bt.xhat.array()).matrix().colwise().sum().transpose();
    grads.norms[ku].beta = dout.colwise().sum().transpose();

    Eigen::MatrixXd dz2;
    if (trace.mode == RunMode::kTrain) {
      // Batch statistics participate in the gradient.
      const double rows = static_cast<double>(dout.rows());
      const Eigen::MatrixXd dxhat = scale_cols(dout, bn.gamma);
      const Eigen::MatrixXd centered = scale_cols(bt.xhat, bt.invstd.cwiseInverse());
      const Eigen::RowVectorXd sum_dxhat = dxhat.colwise().sum();
      const Eigen::RowVectorXd sum_dxhat_centered =
          (dxhat.array() * centered.array()).matrix().colwise().sum();
      const Eigen::RowVectorXd invstd_row = bt.invstd.transpose();
      const Eigen::RowVectorXd dvar =
          (-0.5 * sum_dxhat_centered.array() * invstd_row.array().cube()).matrix();
      const Eigen::RowVectorXd sum_centered = centered.colwise().sum();
      const Eigen::RowVectorXd dmean =
          (-(sum_dxhat.array() * invstd_row.array()) +
           dvar.array() * (-2.0 / rows) * sum_centered.array())
              .matrix();
      dz2 = scale_cols(dxhat, bt.invstd) +
            scale_cols(centered, (2.0 / rows) * dvar.transpose());
      dz2.rowwise() += dmean / rows;
    } else {
      dz2 = scale_cols(dout, (bn.gamma.array() * bt.invstd.array()).matrix());
    }

    grads.mlp_out[ku].weight = bt.u.transpose() * dz2;
    grads.mlp_out[ku].bias = dz2.colwise().sum().transpose();
    const Eigen::MatrixXd du = dz2 * model.mlp_out[ku].weight.transpose();
    const Eigen::MatrixXd dz1 = (du.array() * (bt.z1.array() > 0.0).cast<double>()).matrix();

    grads.mlp_in[ku].weight = bt.aggregated.transpose() * dz1;
    grads.mlp_in[ku].bias = dz1.colwise().sum().transpose();
    const Eigen::MatrixXd dagg = dz1 * model.mlp_in[ku].weight.transpose();

    grads.eps(k) = (dagg.array() * trace.hidden[ku].array()).sum();
    dhidden[ku] += (1.0 + model.eps(k)) * dagg;
    for (const GraphEdge& e : batch.edges) {
      dhidden[ku].row(e.src) += e.weight * dagg.row(e.dst);
    }
  }

  return result;
}

void save_checkpoint(const GinModel& model, const std::filesystem::path& path,
                     const nlohmann::json& meta, const AdadeltaOptimizer* optimizer) {
  nlohmann::ordered_json doc;
  doc["version"] = kCheckpointVersion;
  doc["meta"] = meta;
  doc["dims"] = {{"input", model.config.input_dim},
                 {"hidden", model.config.hidden_dim},
                 {"d_read", model.config.readout_dim},
                 {"blocks", model.config.num_blocks}};
  doc["pooling"] = to_string(model.config.pooling);
  doc["readout_skip_h0"] = model.config.readout_skip_h0;

  nlohmann::ordered_json tensors;
  auto dump_views = [&tensors](const std::vector<ParamView>& views) {
    for (const ParamView& v : views) {
      nlohmann::ordered_json t;
      t["shape"] = {v.rows, v.cols};
      t["values"] = std::vector<double>(v.data, v.data + v.size());
      tensors[v.name] = std::move(t);
    }
  };
  dump_views(model.params());
  dump_views(model.buffers());
  doc["tensors"] = std::move(tensors);

  if (optimizer != nullptr) {
    const auto params = model.params();
    nlohmann::ordered_json eg, ed;
    for (std::size_t i = 0; i < params.size(); ++i) {
      const Eigen::ArrayXd& g = optimizer->accum_grad()[i];
      const Eigen::ArrayXd& d = optimizer->accum_delta()[i];
      eg[params[i].name] = std::vector<double>(g.data(), g.data() + g.size());
      ed[params[i].name] = std::vector<double>(d.data(), d.data() + d.size());
    }
    doc["optimizer_state"] = {{"accum_grad", std::move(eg)}, {"accum_delta", std::move(ed)}};
  }

  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  out << doc.dump() << '\n';
}

GinModel load_checkpoint(const std::filesystem::path& path,
                         const std::optional<ModelConfig>& expected, nlohmann::json* meta_out,
                         AdadeltaState* state_out) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open " + path.string());
  json doc;
  try {
    in >> doc;
  } catch (const json::exception& e) {
    throw FormatError(path.string() + ": " + e.what());
  }

  try {
    if (doc.at("version").get<int>() != kCheckpointVersion) {
      throw FormatError(path.string() + ": unsupported checkpoint version " +
                        doc.at("version").dump());
    }
    ModelConfig config;
    config.input_dim = doc.at("dims").at("input").get<int>();
    config.hidden_dim = doc.at("dims").at("hidden").get<int>();
    config.readout_dim = doc.at("dims").at("d_read").get<int>();
    config.num_blocks = doc.at("dims").at("blocks").get<int>();
    const auto pooling = pooling_from_string(doc.at("pooling").get<std::string>());
    if (!pooling) {
      throw FormatError(path.string() + ": unknown pooling " + doc.at("pooling").dump());
    }
    config.pooling = *pooling;
    config.readout_skip_h0 = doc.value("readout_skip_h0", false);

    if (expected && !(config == *expected)) {
      throw FormatError(path.string() + ": checkpoint dims (hidden=" +
                        std::to_string(config.hidden_dim) + ", blocks=" +
                        std::to_string(config.num_blocks) +
                        ") do not match the configured model");
    }
    if (meta_out != nullptr && doc.contains("meta")) *meta_out = doc.at("meta");

    GinModel model = zeros_from_config(config);
    const json& tensors = doc.at("tensors");
    auto fill_views = [&tensors, &path](std::vector<ParamView> views) {
      for (ParamView& v : views) {
        if (!tensors.contains(v.name)) {
          throw FormatError(path.string() + ": missing tensor " + v.name);
        }
        const json& t = tensors.at(v.name);
        const auto rows = t.at("shape").at(0).get<Eigen::Index>();
        const auto cols = t.at("shape").at(1).get<Eigen::Index>();
        if (rows != v.rows || cols != v.cols) {
          throw FormatError(path.string() + ": tensor " + v.name + " has shape [" +
                            std::to_string(rows) + ", " + std::to_string(cols) +
                            "], expected [" + std::to_string(v.rows) + ", " +
                            std::to_string(v.cols) + "]");
        }
        const auto values = t.at("values").get<std::vector<double>>();
        if (static_cast<Eigen::Index>(values.size()) != v.size()) {
          throw FormatError(path.string() + ": tensor " + v.name + " has wrong element count");
        }
        std::copy(values.begin(), values.end(), v.data);
      }
    };
    fill_views(model.params());
    fill_views(model.buffers());

    if (state_out != nullptr) {
      if (!doc.contains("optimizer_state")) {
        throw FormatError(path.string() + ": checkpoint carries no optimizer_state");
      }
      const json& state = doc.at("optimizer_state");
      state_out->accum_grad.clear();
      state_out->accum_delta.clear();
      for (const ParamView& v : model.params()) {
        auto read = [&](const char* section) {
          const auto values = state.at(section).at(v.name).get<std::vector<double>>();
          if (static_cast<Eigen::Index>(values.size()) != v.size()) {
            throw FormatError(path.string() + ": optimizer tensor " + v.name +
                              " has wrong element count");
          }
          return Eigen::Map<const Eigen::ArrayXd>(values.data(),
                                                  static_cast<Eigen::Index>(values.size()))
              .eval();
        };
        state_out->accum_grad.push_back(read("accum_grad"));
        state_out->accum_delta.push_back(read("accum_delta"));
      }
    }
    return model;
  } catch (const json::exception& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

}  // namespace emograph
