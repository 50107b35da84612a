#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>

#include "json.hpp"

#include "arbor/graph.hpp"
#include "arbor/mst.hpp"
#include "arbor/pairs.hpp"

// Selective feature suppression: the MST projection of the thresholded edge
// prediction is imposed on the edge head by overwriting one logit of every pair
// the projection flips with -lambda, so softmax reproduces the tree while the
// surviving logit keeps a gradient path to the backbone.
namespace arbor::sfs {

struct Config {
  double lambda = 10.0;
  // Divide each loss sum by the pair count. Off by default: the loss is a plain sum.
  bool mean_normalize = false;
  // Multiplier on cross-entropy terms whose target is an edge (1 = unweighted).
  double positive_weight = 1.0;

  void check() const {
    if (!(lambda > 0.0) || !std::isfinite(lambda)) throw std::invalid_argument("sfs: lambda must be positive");
    if (!(positive_weight > 0.0)) throw std::invalid_argument("sfs: positive_weight must be positive");
  }

  double weight(PairValue t) const { return t.pos > t.neg ? positive_weight : 1.0; }
};

// Lambda values of the suppression-magnitude ablation.
inline constexpr double kLambdaPresets[] = {2.0, 5.0, 10.0, 100.0};

// Per-term floor on log-probabilities inside the cross-entropy.
inline constexpr double kLogFloor = -50.0;

inline void check_finite(PairValue f) {
  if (std::isnan(f.pos) || std::isnan(f.neg)) throw std::invalid_argument("sfs: NaN logit");
  if (!std::isfinite(f.pos) || !std::isfinite(f.neg)) throw std::invalid_argument("sfs: non-finite logit");
}

// log(exp(a) + exp(b)) without overflow.
inline double log_sum_exp(double a, double b) {
  const double m = std::max(a, b);
  return m + std::log1p(std::exp(-std::abs(a - b)));
}

inline PairValue log_softmax_pair(PairValue f) {
  check_finite(f);
  const double lse = log_sum_exp(f.pos, f.neg);
  return {f.pos - lse, f.neg - lse};
}

inline PairValue softmax_pair(PairValue f) {
  check_finite(f);
  const double m = std::max(f.pos, f.neg);
  const double ep = std::exp(f.pos - m), en = std::exp(f.neg - m);
  return {ep / (ep + en), en / (ep + en)};
}

inline EdgeProbabilities softmax(const EdgeLogits& logits) {
  EdgeProbabilities y(logits.nodes());
  for (std::size_t k = 0; k < logits.size(); ++k) y[k] = softmax_pair(logits[k]);
  return y;
}

// Pairs whose existence probability strictly exceeds the non-existence probability.
inline EdgeSet threshold_edges(const EdgeProbabilities& probs) {
  EdgeSet out;
  for (std::size_t k = 0; k < probs.size(); ++k)
    if (probs[k].pos > probs[k].neg) out.insert(probs.pair(k));
  return out;
}

// Which logit of a pair was replaced by -lambda.
enum class Slot : std::uint8_t { none, negative, positive };

struct Suppressed {
  EdgeLogits logits;
  PairMap<Slot> slots;
};

// Pairs in E+ lose their non-edge logit, pairs in E- lose their edge logit.
inline Suppressed suppress(const EdgeLogits& logits, const ProjectionDiff& diff, const Config& cfg) {
  cfg.check();
  Suppressed s{logits, PairMap<Slot>(logits.nodes(), Slot::none)};
  for (const auto& e : diff.added) {
    s.slots.at(e) = Slot::negative;
    s.logits.at(e).neg = -cfg.lambda;
  }
  for (const auto& e : diff.removed) {
    if (s.slots.at(e) != Slot::none)
      throw std::invalid_argument("sfs::suppress: pair (" + std::to_string(e.first) + "," + std::to_string(e.second) +
                                  ") is both added and removed");
    s.slots.at(e) = Slot::positive;
    s.logits.at(e).pos = -cfg.lambda;
  }
  return s;
}

struct Forward {
  EdgeProbabilities constrained;
  EdgeProbabilities unconstrained;
  ProjectionDiff diff;
  EdgeSet tree;
  Suppressed suppressed;
};

inline Forward forward(const EdgeLogits& logits, const Config& cfg) {
  Forward out;
  out.unconstrained = softmax(logits);
  auto projection = mst_project(out.unconstrained, threshold_edges(out.unconstrained));
  out.tree = std::move(projection.tree);
  out.diff = std::move(projection.diff);
  out.suppressed = suppress(logits, out.diff, cfg);
  out.constrained = softmax(out.suppressed.logits);
  return out;
}

// Constrained probabilities for a diff held fixed (the projection is piecewise constant).
inline EdgeProbabilities constrained_probabilities(const EdgeLogits& logits, const ProjectionDiff& diff,
                                                   const Config& cfg) {
  return softmax(suppress(logits, diff, cfg).logits);
}

inline double floored_log(double y) { return y > 0.0 ? std::max(std::log(y), kLogFloor) : kLogFloor; }

// -(t+ log y+ + t- log y-), each log floored at -50.
inline double cross_entropy(PairValue y, PairValue t) {
  return -(t.pos * floored_log(y.pos) + t.neg * floored_log(y.neg));
}

// Same loss evaluated from logits through a log-softmax (no rounding of y near 0 or 1).
inline double cross_entropy_logits(PairValue f, PairValue t) {
  const PairValue ly = log_softmax_pair(f);
  return -(t.pos * std::max(ly.pos, kLogFloor) + t.neg * std::max(ly.neg, kLogFloor));
}

// d cross_entropy_logits / d f, consistent with the floor (a floored term is constant).
inline PairValue cross_entropy_logits_grad(PairValue f, PairValue t) {
  const PairValue ly = log_softmax_pair(f);
  const double yp = std::exp(ly.pos), yn = std::exp(ly.neg);
  const double wp = ly.pos > kLogFloor ? t.pos : 0.0;
  const double wn = ly.neg > kLogFloor ? t.neg : 0.0;
  // d log y_c / d f_k = [c == k] - y_k
  return {-(wp * (1.0 - yp) + wn * (-yp)), -(wp * (-yn) + wn * (1.0 - yn))};
}

struct Loss {
  double total = 0.0;
  double unconstrained = 0.0;
  double constrained = 0.0;
};

// Sum over pairs of CE(unconstrained) plus sum of CE(constrained).
inline Loss edge_loss(const EdgeProbabilities& constrained, const EdgeProbabilities& unconstrained,
                      const EdgeTargets& targets, const Config& cfg = {}) {
  if (constrained.size() != targets.size() || unconstrained.size() != targets.size())
    throw std::invalid_argument("sfs::edge_loss: pair sets differ");
  Loss l;
  for (std::size_t k = 0; k < targets.size(); ++k) {
    const double w = cfg.weight(targets[k]);
    l.unconstrained += w * cross_entropy(unconstrained[k], targets[k]);
    l.constrained += w * cross_entropy(constrained[k], targets[k]);
  }
  if (cfg.mean_normalize && targets.size() > 0) {
    l.unconstrained /= double(targets.size());
    l.constrained /= double(targets.size());
  }
  l.total = l.unconstrained + l.constrained;
  return l;
}

// Which parts of the edge loss are active: the unconstrained-only baseline drops the
// constrained term.
struct Terms {
  bool unconstrained = true;
  bool constrained = true;
};

// Loss evaluated directly from raw logits with the diff frozen.
inline Loss edge_loss_from_logits(const EdgeLogits& logits, const ProjectionDiff& diff, const EdgeTargets& targets,
                                  const Config& cfg, Terms terms = {}) {
  if (logits.size() != targets.size()) throw std::invalid_argument("sfs::edge_loss_from_logits: pair sets differ");
  const auto s = suppress(logits, diff, cfg);
  Loss l;
  for (std::size_t k = 0; k < targets.size(); ++k) {
    const double w = cfg.weight(targets[k]);
    if (terms.unconstrained) l.unconstrained += w * cross_entropy_logits(logits[k], targets[k]);
    if (terms.constrained) l.constrained += w * cross_entropy_logits(s.logits[k], targets[k]);
  }
  if (cfg.mean_normalize && targets.size() > 0) {
    l.unconstrained /= double(targets.size());
    l.constrained /= double(targets.size());
  }
  l.total = l.unconstrained + l.constrained;
  return l;
}

struct Gradient {
  EdgeLogits total;
  EdgeLogits unconstrained;
  EdgeLogits constrained;
};

// Exact gradient of the edge loss with respect to the raw logits, with the diff treated
// as a constant and the overwritten logit cut from the graph. For a pair in E+ the
// constrained term yields [(1 - eps) - t+, 0]; in E-, [0, (1 - eps) - t-]; elsewhere
// [y+ - t+, y- - t-].
inline Gradient backward(const EdgeLogits& logits, const ProjectionDiff& diff, const EdgeTargets& targets,
                         const Config& cfg, Terms terms = {}) {
  if (logits.size() != targets.size()) throw std::invalid_argument("sfs::backward: pair sets differ");
  const auto s = suppress(logits, diff, cfg);
  const std::size_t n = logits.nodes();
  Gradient g{EdgeLogits(n), EdgeLogits(n), EdgeLogits(n)};
  const double base_scale = cfg.mean_normalize && targets.size() > 0 ? 1.0 / double(targets.size()) : 1.0;
  for (std::size_t k = 0; k < logits.size(); ++k) {
    const double scale = base_scale * cfg.weight(targets[k]);
    if (terms.unconstrained) {
      const PairValue gu = cross_entropy_logits_grad(logits[k], targets[k]);
      g.unconstrained[k] = {scale * gu.pos, scale * gu.neg};
    }
    if (terms.constrained) {
      PairValue gc = cross_entropy_logits_grad(s.logits[k], targets[k]);
      if (s.slots[k] == Slot::negative) gc.neg = 0.0;
      if (s.slots[k] == Slot::positive) gc.pos = 0.0;
      g.constrained[k] = {scale * gc.pos, scale * gc.neg};
    }
    g.total[k] = {g.unconstrained[k].pos + g.constrained[k].pos, g.unconstrained[k].neg + g.constrained[k].neg};
  }
  return g;
}

// Residual probability left on the suppressed side of a pair whose surviving logit is `kept`.
inline double residual_epsilon(double kept, double lambda) {
  return 1.0 - softmax_pair({kept, -lambda}).pos;
}

enum class Membership { none, added, removed };

// Row 1..8 of the case table: sign of the unconstrained prediction (+ when f+ > f-),
// projection membership and target.
inline int gradient_case(Membership m, bool unconstrained_positive, PairValue t) {
  const bool t_pos = t.pos > t.neg;
  if (unconstrained_positive) {
    if (m == Membership::added) throw std::invalid_argument("gradient_case: E+ pair cannot be predicted positive");
    if (m == Membership::none) return t_pos ? 1 : 2;
    return t_pos ? 3 : 4;
  }
  if (m == Membership::removed) throw std::invalid_argument("gradient_case: E- pair cannot be predicted negative");
  if (m == Membership::none) return t_pos ? 5 : 6;
  return t_pos ? 7 : 8;
}

inline Membership membership(const ProjectionDiff& diff, const Edge& e) {
  if (diff.added.count(e)) return Membership::added;
  if (diff.removed.count(e)) return Membership::removed;
  return Membership::none;
}

inline PairMap<int> gradient_cases(const EdgeLogits& logits, const ProjectionDiff& diff, const EdgeTargets& targets) {
  PairMap<int> cases(logits.nodes(), 0);
  for (std::size_t k = 0; k < logits.size(); ++k)
    cases[k] = gradient_case(membership(diff, logits.pair(k)), logits[k].pos > logits[k].neg, targets[k]);
  return cases;
}

// Debug dump: one record per pair with logits, membership and case row.
inline nlohmann::json diagnostic_dump(const EdgeLogits& logits, const ProjectionDiff& diff, const EdgeTargets& targets) {
  const auto cases = gradient_cases(logits, diff, targets);
  nlohmann::json pairs = nlohmann::json::array();
  for (std::size_t k = 0; k < logits.size(); ++k) {
    const auto& e = logits.pair(k);
    const auto m = membership(diff, e);
    pairs.push_back({{"i", e.first},
                     {"j", e.second},
                     {"logits", {logits[k].pos, logits[k].neg}},
                     {"diff", m == Membership::added ? "E+" : m == Membership::removed ? "E-" : ""},
                     {"case", cases[k]}});
  }
  return {{"nodes", logits.nodes()}, {"pairs", pairs}};
}

}  // namespace arbor::sfs
