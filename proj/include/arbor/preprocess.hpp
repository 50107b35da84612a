#pragma once

#include <cmath>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "arbor/graph.hpp"
#include "arbor/image.hpp"

namespace arbor {

using Polyline = std::vector<Point>;

// Raised when an input that must be a tree is not one; carries a pixel on the offending structure.
class TopologyError : public GraphError {
 public:
  TopologyError(const std::string& what, Point where) : GraphError(what), where_(where) {}
  Point where() const { return where_; }

 private:
  Point where_;
};

inline double arc_length(const Polyline& line) {
  double s = 0.0;
  for (std::size_t k = 1; k < line.size(); ++k) s += distance(line[k - 1], line[k]);
  return s;
}

// Point at arc length s along the polyline (clamped to its ends).
inline Point point_at_arc_length(const Polyline& line, double s) {
  if (line.empty()) throw std::invalid_argument("point_at_arc_length: empty polyline");
  for (std::size_t k = 1; k < line.size(); ++k) {
    const double seg = distance(line[k - 1], line[k]);
    if (s <= seg && seg > 0.0) {
      const double t = s / seg;
      return {line[k - 1].x + t * (line[k].x - line[k - 1].x), line[k - 1].y + t * (line[k].y - line[k - 1].y)};
    }
    s -= seg;
  }
  return line.back();
}

// Maximal keypoint-to-keypoint chains of a tree, each as a list of node indices.
inline std::vector<std::vector<int>> keypoint_chains(const Graph& g) {
  const auto adj = adjacency(g.size(), g.edges);
  const auto deg = degrees(g);
  EdgeSet visited;
  std::vector<std::vector<int>> chains;
  for (int k : keypoints(g)) {
    for (int first : adj[std::size_t(k)]) {
      if (visited.count(make_edge(k, first))) continue;
      std::vector<int> chain{k, first};
      visited.insert(make_edge(k, first));
      int prev = k, cur = first;
      while (deg[std::size_t(cur)] == 2) {
        const auto& nb = adj[std::size_t(cur)];
        const int next = nb[0] == prev ? nb[1] : nb[0];
        visited.insert(make_edge(cur, next));
        chain.push_back(next);
        prev = cur;
        cur = next;
      }
      chains.push_back(std::move(chain));
    }
  }
  return chains;
}

// Keeps every keypoint (degree != 2) in place and redistributes each chain between
// keypoints of arc length L into max(1, round(L / interval)) equal-arc-length pieces.
// Keypoints come first in the output, in their original order.
inline Graph resample_graph(const Graph& g, double interval) {
  if (!(interval > 0.0)) throw std::invalid_argument("resample_graph: interval must be positive");
  validate(g);
  if (!is_tree(g)) throw GraphError("resample_graph: input is not a tree");
  Graph out;
  out.canvas = g.canvas;
  const auto keys = keypoints(g);
  std::vector<int> remap(g.size(), -1);
  for (int k : keys) remap[std::size_t(k)] = out.add_node(g.pos(k));
  for (const auto& chain : keypoint_chains(g)) {
    Polyline line;
    for (int v : chain) line.push_back(g.pos(v));
    const double length = arc_length(line);
    const long pieces = std::max(1L, std::lround(length / interval));
    int prev = remap[std::size_t(chain.front())];
    for (long m = 1; m < pieces; ++m) {
      const int v = out.add_node(point_at_arc_length(line, length * double(m) / double(pieces)));
      out.add_edge(prev, v);
      prev = v;
    }
    out.add_edge(prev, remap[std::size_t(chain.back())]);
  }
  return out;
}

// Replaces every degree-2 chain by a single edge between its keypoints.
inline Graph collapse_chains(const Graph& g) {
  return resample_graph(g, std::numeric_limits<double>::infinity());
}

inline double point_segment_distance(Point p, Point a, Point b) {
  const double vx = b.x - a.x, vy = b.y - a.y;
  const double len2 = vx * vx + vy * vy;
  double t = len2 > 0.0 ? ((p.x - a.x) * vx + (p.y - a.y) * vy) / len2 : 0.0;
  t = std::clamp(t, 0.0, 1.0);
  return distance(p, {a.x + t * vx, a.y + t * vy});
}

// Greedy branch-to-tree assembly: the longest branch seeds the tree; then the branch
// whose nearer endpoint is closest to any tree segment is attached at that endpoint
// to the nearest existing tree node, until every branch is in.
inline Graph greedy_assemble(const std::vector<Polyline>& branches, Canvas canvas) {
  if (branches.empty()) throw std::invalid_argument("greedy_assemble: no branches");
  for (const auto& b : branches)
    if (b.size() < 2) throw std::invalid_argument("greedy_assemble: branch with fewer than 2 points");

  Graph g;
  g.canvas = canvas;
  auto append_chain = [&](int start, const Polyline& pts, std::size_t from) {
    int prev = start;
    for (std::size_t k = from; k < pts.size(); ++k) {
      if (pts[k] == g.pos(prev)) continue;
      const int v = g.add_node(pts[k]);
      g.add_edge(prev, v);
      prev = v;
    }
  };

  std::size_t seed = 0;
  for (std::size_t b = 1; b < branches.size(); ++b)
    if (arc_length(branches[b]) > arc_length(branches[seed])) seed = b;
  append_chain(g.add_node(branches[seed].front()), branches[seed], 1);

  auto distance_to_tree = [&](Point p) {
    double best = std::numeric_limits<double>::infinity();
    for (const auto& [a, b] : g.edges) best = std::min(best, point_segment_distance(p, g.pos(a), g.pos(b)));
    for (const auto& v : g.nodes) best = std::min(best, distance(p, v.pos()));
    return best;
  };

  std::vector<char> attached(branches.size(), 0);
  attached[seed] = 1;
  for (std::size_t round = 1; round < branches.size(); ++round) {
    double best = std::numeric_limits<double>::infinity();
    std::size_t pick = 0;
    bool from_back = false;
    for (std::size_t b = 0; b < branches.size(); ++b) {
      if (attached[b]) continue;
      const double df = distance_to_tree(branches[b].front());
      const double db = distance_to_tree(branches[b].back());
      if (df < best) best = df, pick = b, from_back = false;
      if (db < best) best = db, pick = b, from_back = true;
    }
    attached[pick] = 1;
    Polyline pts = branches[pick];
    if (from_back) std::reverse(pts.begin(), pts.end());

    int nearest = 0;
    double nd = std::numeric_limits<double>::infinity();
    for (const auto& v : g.nodes) {
      const double d = distance(pts.front(), v.pos());
      if (d < nd) nd = d, nearest = v.id;
    }
    int start = nearest;
    if (nd > 0.0) {
      start = g.add_node(pts.front());
      g.add_edge(nearest, start);
    }
    append_chain(start, pts, 1);
  }
  return g;
}

// Pixel graph of a one-pixel-wide skeleton: ink pixels are nodes, 4-neighbours are
// joined, and diagonal neighbours only when no shared 4-neighbour is inked (which would
// otherwise close a 3-cycle at every corner). The result must be a single tree; its
// degree-2 chains are then resampled at `interval`.
inline Graph skeleton_mask_to_graph(const Image& mask, double interval) {
  Graph g;
  g.canvas = {mask.width, mask.height};
  std::vector<int> index(mask.pixels.size(), -1);
  for (int y = 0; y < mask.height; ++y)
    for (int x = 0; x < mask.width; ++x)
      if (mask.ink(x, y)) index[std::size_t(y) * std::size_t(mask.width) + std::size_t(x)] = g.add_node({double(x), double(y)});
  if (g.size() == 0) return g;

  auto id = [&](int x, int y) { return mask.ink(x, y) ? index[std::size_t(y) * std::size_t(mask.width) + std::size_t(x)] : -1; };
  UnionFind uf(g.size());
  auto join = [&](int a, int b) {
    if (!uf.unite(std::size_t(a), std::size_t(b)))
      throw TopologyError("skeleton mask contains a cycle through pixel (" + std::to_string(int(g.pos(b).x)) + ", " +
                              std::to_string(int(g.pos(b).y)) + ")",
                          g.pos(b));
    g.add_edge(a, b);
  };
  for (int y = 0; y < mask.height; ++y) {
    for (int x = 0; x < mask.width; ++x) {
      const int a = id(x, y);
      if (a < 0) continue;
      if (id(x + 1, y) >= 0 && id(x, y + 1) >= 0 && id(x + 1, y + 1) >= 0)
        throw TopologyError("skeleton mask is not one pixel wide at (" + std::to_string(x) + ", " + std::to_string(y) + ")",
                            {double(x), double(y)});
      if (int b = id(x + 1, y); b >= 0) join(a, b);
      if (int b = id(x, y + 1); b >= 0) join(a, b);
      if (int b = id(x + 1, y + 1); b >= 0 && id(x + 1, y) < 0 && id(x, y + 1) < 0) join(a, b);
      if (int b = id(x - 1, y + 1); b >= 0 && id(x - 1, y) < 0 && id(x, y + 1) < 0) join(a, b);
    }
  }
  if (uf.components() != 1)
    throw TopologyError("skeleton mask has " + std::to_string(uf.components()) + " disconnected components", g.pos(0));
  return resample_graph(g, interval);
}

}  // namespace arbor
