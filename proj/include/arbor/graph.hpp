#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <iterator>
#include <numeric>
#include <queue>
#include <set>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace arbor {

struct Point {
  double x = 0.0;
  double y = 0.0;

  friend bool operator==(const Point&, const Point&) = default;
};

inline double distance(Point a, Point b) { return std::hypot(a.x - b.x, a.y - b.y); }

struct Canvas {
  int width = 0;
  int height = 0;

  double diagonal() const { return std::hypot(double(width), double(height)); }
  bool contains(Point p) const { return p.x >= 0.0 && p.y >= 0.0 && p.x < width && p.y < height; }

  friend bool operator==(const Canvas&, const Canvas&) = default;
};

struct Node {
  int id = 0;
  double x = 0.0;
  double y = 0.0;

  Point pos() const { return {x, y}; }

  friend bool operator==(const Node&, const Node&) = default;
};

// Undirected edge stored with first < second.
using Edge = std::pair<int, int>;
using EdgeSet = std::set<Edge>;

inline Edge make_edge(int a, int b) { return a < b ? Edge{a, b} : Edge{b, a}; }

// Node positions plus an undirected edge set. Node ids equal their index.
struct Graph {
  std::vector<Node> nodes;
  EdgeSet edges;
  Canvas canvas;

  std::size_t size() const { return nodes.size(); }
  Point pos(int i) const { return nodes.at(static_cast<std::size_t>(i)).pos(); }

  int add_node(Point p) {
    const int id = static_cast<int>(nodes.size());
    nodes.push_back({id, p.x, p.y});
    return id;
  }

  void add_edge(int a, int b) { edges.insert(make_edge(a, b)); }

  friend bool operator==(const Graph&, const Graph&) = default;
};

class GraphError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Throws GraphError naming the first violated invariant.
inline void validate(const Graph& g) {
  const int n = static_cast<int>(g.nodes.size());
  for (int i = 0; i < n; ++i) {
    const Node& v = g.nodes[static_cast<std::size_t>(i)];
    if (v.id != i) throw GraphError("node " + std::to_string(i) + " has id " + std::to_string(v.id));
    if (!std::isfinite(v.x) || !std::isfinite(v.y) || !g.canvas.contains(v.pos()))
      throw GraphError("node " + std::to_string(i) + " lies outside the canvas");
  }
  for (const auto& [a, b] : g.edges) {
    if (a == b) throw GraphError("self-loop at node " + std::to_string(a));
    if (a > b) throw GraphError("edge not normalized");
    if (a < 0 || b >= n) throw GraphError("edge endpoint out of range");
  }
}

// Disjoint-set forest with path halving and union by size.
class UnionFind {
 public:
  explicit UnionFind(std::size_t n) : parent_(n), size_(n, 1), components_(n) {
    std::iota(parent_.begin(), parent_.end(), std::size_t{0});
  }

  std::size_t find(std::size_t x) {
    while (parent_[x] != x) {
      parent_[x] = parent_[parent_[x]];
      x = parent_[x];
    }
    return x;
  }

  // Returns false when a and b were already joined.
  bool unite(std::size_t a, std::size_t b) {
    a = find(a);
    b = find(b);
    if (a == b) return false;
    if (size_[a] < size_[b]) std::swap(a, b);
    parent_[b] = a;
    size_[a] += size_[b];
    --components_;
    return true;
  }

  std::size_t components() const { return components_; }

 private:
  std::vector<std::size_t> parent_;
  std::vector<std::size_t> size_;
  std::size_t components_;
};

inline std::vector<std::vector<int>> adjacency(std::size_t n, const EdgeSet& edges) {
  std::vector<std::vector<int>> adj(n);
  for (const auto& [a, b] : edges) {
    adj[static_cast<std::size_t>(a)].push_back(b);
    adj[static_cast<std::size_t>(b)].push_back(a);
  }
  return adj;
}

inline std::vector<int> degrees(const Graph& g) {
  std::vector<int> deg(g.size(), 0);
  for (const auto& [a, b] : g.edges) {
    ++deg[static_cast<std::size_t>(a)];
    ++deg[static_cast<std::size_t>(b)];
  }
  return deg;
}

// Number of connected components, counted by breadth-first search.
inline std::size_t component_count(std::size_t n, const EdgeSet& edges) {
  const auto adj = adjacency(n, edges);
  std::vector<char> seen(n, 0);
  std::size_t count = 0;
  for (std::size_t s = 0; s < n; ++s) {
    if (seen[s]) continue;
    ++count;
    std::queue<std::size_t> q;
    q.push(s);
    seen[s] = 1;
    while (!q.empty()) {
      const auto u = q.front();
      q.pop();
      for (int v : adj[u]) {
        if (!seen[static_cast<std::size_t>(v)]) {
          seen[static_cast<std::size_t>(v)] = 1;
          q.push(static_cast<std::size_t>(v));
        }
      }
    }
  }
  return count;
}

// Connected and |E| = |V| - 1. The empty graph counts as a tree.
inline bool is_tree(std::size_t n, const EdgeSet& edges) {
  if (n == 0) return edges.empty();
  if (edges.size() != n - 1) return false;
  UnionFind uf(n);
  for (const auto& [a, b] : edges) {
    if (a < 0 || b < 0 || std::size_t(a) >= n || std::size_t(b) >= n) return false;
    if (!uf.unite(std::size_t(a), std::size_t(b))) return false;
  }
  return uf.components() == 1;
}

inline bool is_tree(const Graph& g) { return is_tree(g.size(), g.edges); }

// Junctions, leaves and isolated nodes (every node whose degree is not 2).
inline std::vector<int> keypoints(const Graph& g) {
  const auto deg = degrees(g);
  std::vector<int> out;
  for (std::size_t i = 0; i < deg.size(); ++i)
    if (deg[i] != 2) out.push_back(static_cast<int>(i));
  return out;
}

inline double edge_length(const Graph& g, const Edge& e) { return distance(g.pos(e.first), g.pos(e.second)); }

inline double total_length(const Graph& g) {
  double s = 0.0;
  for (const auto& e : g.edges) s += edge_length(g, e);
  return s;
}

inline EdgeSet set_difference(const EdgeSet& a, const EdgeSet& b) {
  EdgeSet out;
  std::set_difference(a.begin(), a.end(), b.begin(), b.end(), std::inserter(out, out.end()));
  return out;
}

}  // namespace arbor
