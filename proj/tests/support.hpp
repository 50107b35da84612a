#pragma once

// Independent oracles and random instance generators shared by the unit and
// acceptance tests. Nothing here calls the routine it is used to check.

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>
#include <vector>

#include "arbor/graph.hpp"
#include "arbor/mst.hpp"
#include "arbor/pairs.hpp"
#include "arbor/rng.hpp"

namespace arbor::oracle {

inline CostMatrix random_costs(Rng& rng, int n, bool distinct) {
  CostMatrix c(static_cast<std::size_t>(n), 0.0);
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      c.set(i, j, distinct ? rng.uniform() : double(rng.below(3)) / 4.0);
  return c;
}

inline EdgeLogits random_logits(Rng& rng, int n, double lo, double hi) {
  EdgeLogits f(static_cast<std::size_t>(n));
  for (auto& v : f) v = {rng.uniform(lo, hi), rng.uniform(lo, hi)};
  return f;
}

// Random labelled tree: nodes in shuffled order each attach to a uniformly chosen
// earlier node.
inline EdgeSet random_tree(Rng& rng, int n) {
  std::vector<int> label(static_cast<std::size_t>(n));
  std::iota(label.begin(), label.end(), 0);
  rng.shuffle(label);
  EdgeSet e;
  for (int k = 1; k < n; ++k) {
    const int parent = int(rng.below(std::uint64_t(k)));
    e.insert(make_edge(label[std::size_t(k)], label[std::size_t(parent)]));
  }
  return e;
}

// Cycle check by depth-first search with parent tracking, plus a reachability count.
inline bool dfs_is_tree(std::size_t n, const EdgeSet& edges) {
  if (n == 0) return true;
  std::vector<std::vector<int>> adj(n);
  for (const auto& [a, b] : edges) {
    adj[std::size_t(a)].push_back(b);
    adj[std::size_t(b)].push_back(a);
  }
  std::vector<int> parent(n, -2);
  std::vector<std::pair<int, int>> stack{{0, -1}};
  std::size_t seen = 0;
  while (!stack.empty()) {
    auto [v, p] = stack.back();
    stack.pop_back();
    if (parent[std::size_t(v)] != -2) return false;  // reached twice: a cycle
    parent[std::size_t(v)] = p;
    ++seen;
    for (int w : adj[std::size_t(v)])
      if (w != p) stack.push_back({w, v});
  }
  return seen == n;
}

// Minimum mean squared matching cost by enumerating every permutation.
inline double brute_force_matching(const std::vector<Point>& a, const std::vector<Point>& b) {
  std::vector<int> perm(a.size());
  std::iota(perm.begin(), perm.end(), 0);
  double best = std::numeric_limits<double>::infinity();
  do {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
      const Point q = b[std::size_t(perm[i])];
      s += (a[i].x - q.x) * (a[i].x - q.x) + (a[i].y - q.y) * (a[i].y - q.y);
    }
    best = std::min(best, s);
  } while (std::next_permutation(perm.begin(), perm.end()));
  return a.empty() ? 0.0 : best / double(a.size());
}

// Central difference of f along coordinate k of x.
inline double central_difference(const std::function<double(const std::vector<double>&)>& f, std::vector<double> x,
                                 std::size_t k, double h) {
  const double x0 = x[k];
  x[k] = x0 + h;
  const double up = f(x);
  x[k] = x0 - h;
  const double down = f(x);
  return (up - down) / (2.0 * h);
}

// ||a - b|| / max(||a||, ||b||), 0 when both vanish.
inline double relative_error(const std::vector<double>& a, const std::vector<double>& b) {
  double diff = 0.0, na = 0.0, nb = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    diff += (a[k] - b[k]) * (a[k] - b[k]);
    na += a[k] * a[k];
    nb += b[k] * b[k];
  }
  const double scale = std::sqrt(std::max(na, nb));
  return scale > 0.0 ? std::sqrt(diff) / scale : 0.0;
}

inline Graph path_graph(const std::vector<Point>& pts, Canvas canvas) {
  Graph g;
  g.canvas = canvas;
  for (const auto& p : pts) g.add_node(p);
  for (int k = 1; k < int(pts.size()); ++k) g.add_edge(k - 1, k);
  return g;
}

// Y-shaped tree: trunk from the base up to a junction, two arms of two 20 px edges.
inline Graph y_tree(Point base = {60, 100}) {
  Graph g;
  g.canvas = {128, 128};
  const int b = g.add_node(base);
  const int j = g.add_node({base.x, base.y - 40});
  g.add_edge(b, j);
  for (double sx : {-1.0, 1.0}) {
    const double d = 20.0 / std::sqrt(2.0);
    const int m = g.add_node({base.x + sx * d, base.y - 40 - d});
    const int t = g.add_node({base.x + sx * 2 * d, base.y - 40 - 2 * d});
    g.add_edge(j, m);
    g.add_edge(m, t);
  }
  return g;
}

}  // namespace arbor::oracle
