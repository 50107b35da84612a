#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "json.hpp"

#include "arbor/dataset.hpp"
#include "arbor/graph.hpp"
#include "arbor/image.hpp"
#include "arbor/metrics.hpp"
#include "arbor/pairs.hpp"
#include "arbor/rng.hpp"
#include "arbor/sfs.hpp"

namespace arbor::predictor {

using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;

inline constexpr int kFeatureCount = 8;
inline constexpr int kCoverageSamples = 16;

// ---------------------------------------------------------------- features

// [dx/W, dy/H, dist/diag, mean coverage, min coverage, |cos| to horizontal, 0, 1]
// for the segment from node i to node j. Coverage is the bilinear ink intensity at
// kCoverageSamples equally spaced interior points.
using PairFeatures = std::array<double, kFeatureCount>;

inline PairFeatures pair_features(const Image& image, Point a, Point b) {
  const Canvas canvas{image.width, image.height};
  if (!canvas.contains(a) || !canvas.contains(b)) throw std::invalid_argument("pair_features: node outside the canvas");
  const double dx = b.x - a.x, dy = b.y - a.y;
  const double dist = std::hypot(dx, dy);
  double sum = 0.0, lo = std::numeric_limits<double>::infinity();
  for (int k = 1; k <= kCoverageSamples; ++k) {
    const double t = double(k) / double(kCoverageSamples + 1);
    const double c = sample_bilinear(image, a.x + t * dx, a.y + t * dy);
    sum += c;
    lo = std::min(lo, c);
  }
  return {dx / canvas.width,
          dy / canvas.height,
          dist / canvas.diagonal(),
          sum / kCoverageSamples,
          lo,
          dist > 0.0 ? std::abs(dx) / dist : 0.0,
          0.0,
          1.0};
}

inline PairFeatures pair_features(const Image& image, const Graph& nodes, int i, int j) {
  if (i == j) throw std::invalid_argument("pair_features: i == j");
  return pair_features(image, nodes.pos(i), nodes.pos(j));
}

// One feature row per node pair, in PairMap order.
inline Matrix all_pair_features(const Image& image, const Graph& nodes) {
  const std::size_t n = nodes.size();
  Matrix x(Eigen::Index(pair_count(n)), kFeatureCount);
  Eigen::Index row = 0;
  for (int i = 0; i < int(n); ++i)
    for (int j = i + 1; j < int(n); ++j, ++row) {
      const auto f = pair_features(image, nodes, i, j);
      for (int c = 0; c < kFeatureCount; ++c) x(row, c) = f[std::size_t(c)];
    }
  return x;
}

// ---------------------------------------------------------------- network

// Fully connected ReLU network; layer sizes include input and output widths.
struct Architecture {
  std::vector<int> layers{kFeatureCount, 32, 32, 2};

  std::size_t parameter_count() const {
    std::size_t n = 0;
    for (std::size_t l = 1; l < layers.size(); ++l) n += std::size_t(layers[l]) * std::size_t(layers[l - 1] + 1);
    return n;
  }

  void check() const {
    if (layers.size() < 2 || layers.front() != kFeatureCount || layers.back() != 2)
      throw std::invalid_argument("Architecture: expects " + std::to_string(kFeatureCount) + " inputs and 2 outputs");
    for (int w : layers)
      if (w < 1) throw std::invalid_argument("Architecture: empty layer");
  }

  friend bool operator==(const Architecture&, const Architecture&) = default;
};

struct Activations {
  std::vector<Matrix> pre;   // affine outputs per layer
  std::vector<Matrix> post;  // post[0] is the input; post[l] = relu(pre[l-1]) for hidden layers
};

class Mlp {
 public:
  Mlp() : Mlp(Architecture{}) {}
  explicit Mlp(Architecture arch) : arch_(std::move(arch)) {
    arch_.check();
    params_ = Vector::Zero(Eigen::Index(arch_.parameter_count()));
  }

  // He-normal weights, zero biases. zero_output zeroes the final layer.
  static Mlp initialize(const Architecture& arch, std::uint64_t seed, bool zero_output = false) {
    Mlp m(arch);
    Rng rng(seed);
    for (std::size_t l = 0; l + 1 < arch.layers.size(); ++l) {
      auto w = m.weights(l);
      const double sd = std::sqrt(2.0 / double(arch.layers[l]));
      const bool last = l + 2 == arch.layers.size();
      for (Eigen::Index r = 0; r < w.rows(); ++r)
        for (Eigen::Index c = 0; c < w.cols(); ++c) w(r, c) = (zero_output && last) ? 0.0 : sd * rng.normal();
    }
    return m;
  }

  const Architecture& architecture() const { return arch_; }
  std::size_t layer_count() const { return arch_.layers.size() - 1; }
  Vector& parameters() { return params_; }
  const Vector& parameters() const { return params_; }

  Eigen::Map<Matrix> weights(std::size_t l) { return {params_.data() + offset(l), rows(l), cols(l)}; }
  Eigen::Map<const Matrix> weights(std::size_t l) const { return {params_.data() + offset(l), rows(l), cols(l)}; }
  Eigen::Map<Vector> bias(std::size_t l) { return {params_.data() + offset(l) + rows(l) * cols(l), rows(l)}; }
  Eigen::Map<const Vector> bias(std::size_t l) const {
    return {params_.data() + offset(l) + rows(l) * cols(l), rows(l)};
  }

  // Logits [f+, f-] per input row.
  Matrix forward(const Matrix& x, Activations* cache = nullptr) const {
    if (!params_.allFinite()) throw std::invalid_argument("Mlp::forward: non-finite parameters");
    if (x.cols() != arch_.layers.front()) throw std::invalid_argument("Mlp::forward: feature width mismatch");
    Matrix h = x;
    if (cache) {
      cache->pre.clear();
      cache->post.assign(1, x);
    }
    for (std::size_t l = 0; l < layer_count(); ++l) {
      Matrix z = h * weights(l).transpose();
      z.rowwise() += bias(l).transpose();
      if (l + 1 < layer_count()) {
        h = z.cwiseMax(0.0);
        if (cache) {
          cache->pre.push_back(std::move(z));
          cache->post.push_back(h);
        }
      } else {
        if (cache) cache->pre.push_back(z);
        return z;
      }
    }
    return h;
  }

  // Parameter gradient given d loss / d logits (rows x 2) and the forward cache.
  Vector backward(const Activations& cache, const Matrix& upstream) const {
    Vector grad = Vector::Zero(params_.size());
    Matrix delta = upstream;
    for (std::size_t l = layer_count(); l-- > 0;) {
      const Matrix& input = cache.post[l];
      Eigen::Map<Matrix>(grad.data() + offset(l), rows(l), cols(l)) = delta.transpose() * input;
      Eigen::Map<Vector>(grad.data() + offset(l) + rows(l) * cols(l), rows(l)) = delta.colwise().sum().transpose();
      if (l == 0) break;
      Matrix back = delta * weights(l);
      const Matrix& z = cache.pre[l - 1];
      delta = back.cwiseProduct((z.array() > 0.0).cast<double>().matrix());
    }
    return grad;
  }

 private:
  Eigen::Index rows(std::size_t l) const { return arch_.layers[l + 1]; }
  Eigen::Index cols(std::size_t l) const { return arch_.layers[l]; }
  Eigen::Index offset(std::size_t l) const {
    Eigen::Index o = 0;
    for (std::size_t k = 0; k < l; ++k) o += rows(k) * (cols(k) + 1);
    return o;
  }

  Architecture arch_;
  Vector params_;
};

inline EdgeLogits to_logits(const Matrix& out, std::size_t nodes) {
  if (std::size_t(out.rows()) != pair_count(nodes)) throw std::invalid_argument("to_logits: row count mismatch");
  EdgeLogits f(nodes);
  for (std::size_t k = 0; k < f.size(); ++k) f[k] = {out(Eigen::Index(k), 0), out(Eigen::Index(k), 1)};
  return f;
}

inline Matrix to_matrix(const EdgeLogits& g) {
  Matrix m(Eigen::Index(g.size()), 2);
  for (std::size_t k = 0; k < g.size(); ++k) {
    m(Eigen::Index(k), 0) = g[k].pos;
    m(Eigen::Index(k), 1) = g[k].neg;
  }
  return m;
}

// ---------------------------------------------------------------- optimiser

struct AdamConfig {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

struct Adam {
  Vector m;
  Vector v;
  long step = 0;

  void apply(Vector& params, const Vector& grad, const AdamConfig& c) {
    if (m.size() != params.size()) {
      m = Vector::Zero(params.size());
      v = Vector::Zero(params.size());
    }
    ++step;
    m = c.beta1 * m + (1.0 - c.beta1) * grad;
    v = c.beta2 * v + (1.0 - c.beta2) * grad.cwiseProduct(grad);
    const double bc1 = 1.0 - std::pow(c.beta1, double(step));
    const double bc2 = 1.0 - std::pow(c.beta2, double(step));
    params.array() -= c.learning_rate * (m.array() / bc1) / ((v.array() / bc2).sqrt() + c.epsilon);
  }
};

// ---------------------------------------------------------------- modes and configs

// unconstrained: plain edge classifier. test_time_constraint: trained the same way, MST
// applied at inference. sfs: MST projection and suppression inside every training step.
enum class Mode { unconstrained, test_time_constraint, sfs };

inline std::string to_string(Mode m) {
  switch (m) {
    case Mode::unconstrained: return "unconstrained";
    case Mode::test_time_constraint: return "ttc";
    case Mode::sfs: return "sfs";
  }
  return "?";
}

inline Mode parse_mode(const std::string& s) {
  if (s == "unconstrained") return Mode::unconstrained;
  if (s == "ttc" || s == "test_time_constraint") return Mode::test_time_constraint;
  if (s == "sfs") return Mode::sfs;
  throw std::invalid_argument("unknown mode '" + s + "' (unconstrained, ttc, sfs)");
}

struct Params {
  Mlp mlp;
  Adam adam;
  std::uint64_t seed = 0;
};

inline Params initialize(const Architecture& arch, std::uint64_t seed, bool zero_output = false) {
  return {Mlp::initialize(arch, seed, zero_output), Adam{}, seed};
}

struct TrainConfig {
  std::uint64_t seed = 0;
  int epochs = 50;
  int batch_size = 8;
  AdamConfig adam;
  Mode mode = Mode::sfs;
  sfs::Config sfs;  // lambda, loss normalisation, positive weight
  Architecture arch;
  int patience = 30;  // epochs without validation F1 improvement before stopping
  metrics::TopoConfig topo;
};

struct EpochRecord {
  int epoch = 0;
  double loss_total = 0.0;  // mean per training sample
  double loss_unconstrained = 0.0;
  double loss_constrained = 0.0;
  double val_f1 = 0.0;
  double val_tree_rate = 0.0;
};

struct TrainResult {
  Params params;  // best validation F1 (or last epoch without validation data)
  int best_epoch = 0;
  std::vector<EpochRecord> history;
};

// Model inputs and targets for one sample, computed once.
struct Prepared {
  std::size_t nodes = 0;
  Matrix features;
  EdgeTargets targets;
};

inline Prepared prepare(const Sample& s) {
  Graph nodes = s.graph;
  nodes.edges.clear();
  return {s.graph.size(), all_pair_features(s.image, nodes), targets_from_edges(s.graph.size(), s.graph.edges)};
}

struct StepResult {
  sfs::Loss loss;
  Vector grad;
};

// Loss and parameter gradient for one sample under the training procedure of `mode`.
inline StepResult loss_and_gradient(const Mlp& mlp, const Prepared& p, Mode mode, const sfs::Config& cfg) {
  StepResult r;
  if (p.nodes < 2) {
    r.grad = Vector::Zero(mlp.parameters().size());
    return r;
  }
  Activations cache;
  const EdgeLogits logits = to_logits(mlp.forward(p.features, &cache), p.nodes);
  ProjectionDiff diff;
  sfs::Terms terms{true, false};
  if (mode == Mode::sfs) {
    diff = sfs::forward(logits, cfg).diff;
    terms.constrained = true;
  }
  r.loss = sfs::edge_loss_from_logits(logits, diff, p.targets, cfg, terms);
  r.grad = mlp.backward(cache, to_matrix(sfs::backward(logits, diff, p.targets, cfg, terms).total));
  return r;
}

// Edge prediction for given node positions. Constrained modes return the MST tree (the
// edge set the suppressed probabilities threshold to); unconstrained returns the raw
// thresholded edges.
inline Graph infer(const Mlp& mlp, const Image& image, const Graph& nodes, Mode mode, const sfs::Config& cfg = {}) {
  Graph out = nodes;
  out.edges.clear();
  if (nodes.size() < 2) return out;
  const EdgeLogits logits = to_logits(mlp.forward(all_pair_features(image, out)), nodes.size());
  if (mode == Mode::unconstrained)
    out.edges = sfs::threshold_edges(sfs::softmax(logits));
  else
    out.edges = sfs::forward(logits, cfg).tree;
  return out;
}

inline metrics::MetricReport evaluate_model(const Mlp& mlp, const std::vector<Sample>& samples, Mode mode,
                                            const sfs::Config& cfg, const metrics::EvalConfig& eval) {
  std::vector<Graph> preds, gts;
  for (const auto& s : samples) {
    preds.push_back(infer(mlp, s.image, s.graph, mode, cfg));
    gts.push_back(s.graph);
  }
  return metrics::evaluate(preds, gts, eval);
}

inline double validation_f1(const Mlp& mlp, const std::vector<Sample>& val, Mode mode, const sfs::Config& cfg,
                            const metrics::TopoConfig& topo, double* tree_rate_out) {
  double f1 = 0.0;
  std::size_t trees = 0;
  for (const auto& s : val) {
    const Graph pred = infer(mlp, s.image, s.graph, mode, cfg);
    f1 += metrics::topo(pred, s.graph, topo).f1;
    trees += is_tree(pred) ? 1 : 0;
  }
  if (tree_rate_out) *tree_rate_out = val.empty() ? 0.0 : 100.0 * double(trees) / double(val.size());
  return val.empty() ? 0.0 : f1 / double(val.size());
}

using EpochCallback = std::function<void(const EpochRecord&)>;

// Mini-batch Adam on the per-sample edge loss (averaged over the batch). Single-threaded
// and fully determined by (cfg, train, val).
inline TrainResult train(const std::vector<Sample>& train_set, const std::vector<Sample>& val_set,
                         const TrainConfig& cfg, const EpochCallback& on_epoch = {}) {
  if (train_set.empty()) throw std::invalid_argument("train: empty training set");
  if (cfg.epochs < 0 || cfg.batch_size < 1) throw std::invalid_argument("train: bad epoch or batch settings");
  cfg.sfs.check();
  std::vector<Prepared> data;
  data.reserve(train_set.size());
  for (const auto& s : train_set) data.push_back(prepare(s));

  TrainResult result;
  Params current = initialize(cfg.arch, cfg.seed);
  result.params = current;
  double best_f1 = -1.0;
  int since_best = 0;
  Rng order_rng(derive_seed(cfg.seed, 1));
  std::vector<std::size_t> order(data.size());
  for (std::size_t k = 0; k < order.size(); ++k) order[k] = k;

  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    order_rng.shuffle(order);
    EpochRecord rec;
    rec.epoch = epoch;
    for (std::size_t start = 0; start < order.size(); start += std::size_t(cfg.batch_size)) {
      const std::size_t stop = std::min(order.size(), start + std::size_t(cfg.batch_size));
      Vector grad = Vector::Zero(current.mlp.parameters().size());
      for (std::size_t b = start; b < stop; ++b) {
        auto step = loss_and_gradient(current.mlp, data[order[b]], cfg.mode, cfg.sfs);
        grad += step.grad;
        rec.loss_total += step.loss.total;
        rec.loss_unconstrained += step.loss.unconstrained;
        rec.loss_constrained += step.loss.constrained;
      }
      grad /= double(stop - start);
      current.adam.apply(current.mlp.parameters(), grad, cfg.adam);
    }
    const double n = double(data.size());
    rec.loss_total /= n;
    rec.loss_unconstrained /= n;
    rec.loss_constrained /= n;
    if (!val_set.empty()) {
      rec.val_f1 = validation_f1(current.mlp, val_set, cfg.mode, cfg.sfs, cfg.topo, &rec.val_tree_rate);
      if (rec.val_f1 > best_f1) {
        best_f1 = rec.val_f1;
        result.params = current;
        result.best_epoch = epoch;
        since_best = 0;
      } else {
        ++since_best;
      }
    } else {
      result.params = current;
      result.best_epoch = epoch;
    }
    result.history.push_back(rec);
    if (on_epoch) on_epoch(rec);
    if (!val_set.empty() && since_best >= cfg.patience) break;
  }
  return result;
}

// ---------------------------------------------------------------- checkpoints

inline constexpr int kCheckpointVersion = 1;

inline nlohmann::json checkpoint_json(const Params& p, const TrainConfig& cfg, int epoch) {
  const auto& w = p.mlp.parameters();
  return {{"format", "arbor-checkpoint"},
          {"version", kCheckpointVersion},
          {"architecture", {{"layers", p.mlp.architecture().layers}, {"activation", "relu"}}},
          {"seed", p.seed},
          {"mode", to_string(cfg.mode)},
          {"lambda", cfg.sfs.lambda},
          {"epoch", epoch},
          {"weights", std::vector<double>(w.data(), w.data() + w.size())}};
}

class CheckpointError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Checkpoint {
  Params params;
  Mode mode = Mode::sfs;
  double lambda = 10.0;
  int epoch = 0;
};

inline Checkpoint checkpoint_from_json(const nlohmann::json& j) {
  Checkpoint c;
  try {
    if (j.at("format") != "arbor-checkpoint") throw CheckpointError("not an arbor checkpoint");
    if (j.at("version").get<int>() != kCheckpointVersion) throw CheckpointError("unsupported checkpoint version");
    Architecture arch;
    arch.layers = j.at("architecture").at("layers").get<std::vector<int>>();
    if (j.at("architecture").value("activation", "relu") != "relu") throw CheckpointError("unsupported activation");
    try {
      arch.check();
    } catch (const std::invalid_argument& e) {
      throw CheckpointError(std::string("architecture mismatch: ") + e.what());
    }
    const auto w = j.at("weights").get<std::vector<double>>();
    if (w.size() != arch.parameter_count())
      throw CheckpointError("architecture mismatch: " + std::to_string(w.size()) + " weights for a network with " +
                            std::to_string(arch.parameter_count()) + " parameters");
    c.params.mlp = Mlp(arch);
    for (std::size_t k = 0; k < w.size(); ++k) c.params.mlp.parameters()[Eigen::Index(k)] = w[k];
    c.params.seed = j.at("seed").get<std::uint64_t>();
    c.mode = parse_mode(j.at("mode").get<std::string>());
    c.lambda = j.at("lambda").get<double>();
    c.epoch = j.value("epoch", 0);
  } catch (const nlohmann::json::exception& e) {
    throw CheckpointError(std::string("malformed checkpoint: ") + e.what());
  }
  return c;
}

}  // namespace arbor::predictor
