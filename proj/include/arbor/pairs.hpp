#pragma once

#include <cstddef>
#include <stdexcept>
#include <utility>
#include <vector>

#include "arbor/graph.hpp"

namespace arbor {

// Two-slot value attached to a node pair: [positive (edge), negative (no edge)].
struct PairValue {
  double pos = 0.0;
  double neg = 0.0;

  friend bool operator==(const PairValue&, const PairValue&) = default;
};

inline std::size_t pair_count(std::size_t n) { return n < 2 ? 0 : n * (n - 1) / 2; }

// Linear index of the unordered pair {i, j}, i != j, in row-major upper-triangle order.
inline std::size_t pair_index(std::size_t n, int i, int j) {
  if (i == j) throw std::invalid_argument("pair_index: i == j");
  if (i > j) std::swap(i, j);
  if (i < 0 || std::size_t(j) >= n) throw std::out_of_range("pair_index: node out of range");
  const auto a = std::size_t(i);
  return a * (2 * n - a - 1) / 2 + (std::size_t(j) - a - 1);
}

// One value per unordered node pair of the complete graph on n nodes.
template <class T>
class PairMap {
 public:
  PairMap() = default;
  explicit PairMap(std::size_t n, T init = T{}) : n_(n), values_(pair_count(n), init), pairs_(make_pairs(n)) {}

  std::size_t nodes() const { return n_; }
  std::size_t size() const { return values_.size(); }

  T& operator[](std::size_t k) { return values_[k]; }
  const T& operator[](std::size_t k) const { return values_[k]; }

  T& at(int i, int j) { return values_[pair_index(n_, i, j)]; }
  const T& at(int i, int j) const { return values_[pair_index(n_, i, j)]; }
  T& at(const Edge& e) { return at(e.first, e.second); }
  const T& at(const Edge& e) const { return at(e.first, e.second); }

  const Edge& pair(std::size_t k) const { return pairs_[k]; }

  auto begin() { return values_.begin(); }
  auto end() { return values_.end(); }
  auto begin() const { return values_.begin(); }
  auto end() const { return values_.end(); }

  friend bool operator==(const PairMap& a, const PairMap& b) { return a.n_ == b.n_ && a.values_ == b.values_; }

 private:
  static std::vector<Edge> make_pairs(std::size_t n) {
    std::vector<Edge> out;
    out.reserve(pair_count(n));
    for (int i = 0; i < int(n); ++i)
      for (int j = i + 1; j < int(n); ++j) out.emplace_back(i, j);
    return out;
  }

  std::size_t n_ = 0;
  std::vector<T> values_;
  std::vector<Edge> pairs_;
};

// Pre-softmax features [f+, f-] per pair.
using EdgeLogits = PairMap<PairValue>;
// Softmax outputs [y+, y-] per pair.
using EdgeProbabilities = PairMap<PairValue>;
// One-hot [t+, t-] per pair.
using EdgeTargets = PairMap<PairValue>;

inline EdgeTargets targets_from_edges(std::size_t n, const EdgeSet& edges) {
  EdgeTargets t(n, PairValue{0.0, 1.0});
  for (const auto& e : edges) t.at(e) = PairValue{1.0, 0.0};
  return t;
}

}  // namespace arbor
