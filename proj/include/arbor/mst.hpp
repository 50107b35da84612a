#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <tuple>
#include <vector>

#include "arbor/graph.hpp"
#include "arbor/pairs.hpp"

namespace arbor {

// Symmetric nonnegative pair costs for the complete graph on n nodes.
class CostMatrix {
 public:
  CostMatrix() = default;
  explicit CostMatrix(std::size_t n, double init = 0.0) : costs_(n, init) {}
  explicit CostMatrix(PairMap<double> costs) : costs_(std::move(costs)) { check(); }

  std::size_t nodes() const { return costs_.nodes(); }
  double operator()(int i, int j) const { return costs_.at(i, j); }
  void set(int i, int j, double c) {
    if (!std::isfinite(c) || c < 0.0) throw std::invalid_argument("CostMatrix: costs must be finite and nonnegative");
    costs_.at(i, j) = c;
  }
  const PairMap<double>& pairs() const { return costs_; }

 private:
  void check() const {
    for (double c : costs_)
      if (!std::isfinite(c) || c < 0.0) throw std::invalid_argument("CostMatrix: costs must be finite and nonnegative");
  }

  PairMap<double> costs_;
};

// Sum of edge costs taken in ascending order, so equal cost multisets give bit-equal totals.
inline double total_cost(const CostMatrix& costs, const EdgeSet& edges) {
  std::vector<double> c;
  c.reserve(edges.size());
  for (const auto& [i, j] : edges) c.push_back(costs(i, j));
  std::sort(c.begin(), c.end());
  double s = 0.0;
  for (double v : c) s += v;
  return s;
}

// Kruskal on the complete graph. Edges are scanned in (cost, i, j) order, which makes
// the result unique under ties.
inline EdgeSet kruskal_mst(const CostMatrix& costs) {
  const std::size_t n = costs.nodes();
  EdgeSet tree;
  if (n < 2) return tree;
  std::vector<std::tuple<double, int, int>> order;
  order.reserve(pair_count(n));
  for (std::size_t k = 0; k < costs.pairs().size(); ++k) {
    const auto& [i, j] = costs.pairs().pair(k);
    order.emplace_back(costs.pairs()[k], i, j);
  }
  std::sort(order.begin(), order.end());
  UnionFind uf(n);
  for (const auto& [c, i, j] : order) {
    if (uf.unite(std::size_t(i), std::size_t(j))) {
      tree.emplace(i, j);
      if (tree.size() == n - 1) break;
    }
  }
  return tree;
}

class OracleLimitError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

namespace detail {

// Decodes a Pruefer sequence into the edge set of its labelled tree.
inline EdgeSet pruefer_to_tree(const std::vector<int>& seq, int n) {
  std::vector<int> degree(std::size_t(n), 1);
  for (int v : seq) ++degree[std::size_t(v)];
  EdgeSet edges;
  for (int v : seq) {
    for (int leaf = 0; leaf < n; ++leaf) {
      if (degree[std::size_t(leaf)] == 1) {
        edges.insert(make_edge(leaf, v));
        --degree[std::size_t(leaf)];
        --degree[std::size_t(v)];
        break;
      }
    }
  }
  int u = -1;
  for (int w = 0; w < n; ++w) {
    if (degree[std::size_t(w)] == 1) {
      if (u < 0) {
        u = w;
      } else {
        edges.insert(make_edge(u, w));
        break;
      }
    }
  }
  return edges;
}

inline std::vector<std::tuple<double, int, int>> sorted_keys(const CostMatrix& costs, const EdgeSet& edges) {
  std::vector<std::tuple<double, int, int>> keys;
  for (const auto& [i, j] : edges) keys.emplace_back(costs(i, j), i, j);
  std::sort(keys.begin(), keys.end());
  return keys;
}

}  // namespace detail

// Exhaustive oracle: enumerates all n^(n-2) labelled spanning trees (Pruefer codes) and
// returns one of minimum total cost. Among equal totals the tree whose ascending
// (cost, i, j) key list is lexicographically smallest wins, matching kruskal_mst.
inline EdgeSet brute_force_mst(const CostMatrix& costs) {
  const int n = int(costs.nodes());
  if (n > 8) throw OracleLimitError("brute_force_mst: n > 8 refused");
  if (n < 2) return {};
  if (n == 2) return {Edge{0, 1}};
  std::vector<int> seq(std::size_t(n - 2), 0);
  EdgeSet best;
  double best_cost = 0.0;
  std::vector<std::tuple<double, int, int>> best_keys;
  bool have = false;
  for (;;) {
    EdgeSet tree = detail::pruefer_to_tree(seq, n);
    const double c = total_cost(costs, tree);
    if (!have || c < best_cost) {
      best = std::move(tree);
      best_cost = c;
      best_keys = detail::sorted_keys(costs, best);
      have = true;
    } else if (c == best_cost) {
      auto keys = detail::sorted_keys(costs, tree);
      if (keys < best_keys) {
        best = std::move(tree);
        best_keys = std::move(keys);
      }
    }
    std::size_t k = 0;
    while (k < seq.size() && ++seq[k] == n) seq[k++] = 0;
    if (k == seq.size()) break;
  }
  return best;
}

// Edges added (E+) and removed (E-) by a projection.
struct ProjectionDiff {
  EdgeSet added;
  EdgeSet removed;

  bool empty() const { return added.empty() && removed.empty(); }
  friend bool operator==(const ProjectionDiff&, const ProjectionDiff&) = default;
};

struct Projection {
  EdgeSet tree;
  ProjectionDiff diff;
};

// MST over all node pairs with the non-existence probability y- as the cost.
inline Projection mst_project(const EdgeProbabilities& probs, const EdgeSet& unconstrained_edges) {
  PairMap<double> cost(probs.nodes());
  for (std::size_t k = 0; k < probs.size(); ++k) cost[k] = std::clamp(probs[k].neg, 0.0, 1.0);
  Projection p;
  p.tree = kruskal_mst(CostMatrix(std::move(cost)));
  p.diff.added = set_difference(p.tree, unconstrained_edges);
  p.diff.removed = set_difference(unconstrained_edges, p.tree);
  return p;
}

}  // namespace arbor
