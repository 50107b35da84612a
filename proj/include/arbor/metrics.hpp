#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <iomanip>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

#include "arbor/assignment.hpp"
#include "arbor/graph.hpp"
#include "arbor/rng.hpp"

namespace arbor::metrics {

inline constexpr double kPi = 3.14159265358979323846;

// ---------------------------------------------------------------- SMD

struct SmdConfig {
  int points = 100;
  std::uint64_t seed = 0;
};

struct SmdResult {
  double value = 0.0;
  // Set when one side had no nodes at all; value is then the sentinel 1.0.
  bool empty = false;
};

// m points along the edges of g, allocated by arc length (stratified, one jittered
// draw per stratum), in coordinates divided by the canvas diagonal. Graphs without
// edges contribute their node positions, cycled.
inline std::vector<Point> sample_edge_points(const Graph& g, int m, std::uint64_t seed) {
  std::vector<Point> pts;
  if (g.size() == 0 || m <= 0) return pts;
  const double diag = g.canvas.diagonal();
  const double scale = diag > 0.0 ? 1.0 / diag : 1.0;
  std::vector<Edge> edges(g.edges.begin(), g.edges.end());
  std::vector<double> cum;
  double total = 0.0;
  for (const auto& e : edges) {
    total += edge_length(g, e);
    cum.push_back(total);
  }
  if (edges.empty() || !(total > 0.0)) {
    std::vector<int> ids;
    if (edges.empty())
      for (const auto& v : g.nodes) ids.push_back(v.id);
    else
      for (const auto& [a, b] : edges) ids.push_back(a), ids.push_back(b);
    for (int k = 0; k < m; ++k) {
      const Point p = g.pos(ids[std::size_t(k) % ids.size()]);
      pts.push_back({p.x * scale, p.y * scale});
    }
    return pts;
  }
  Rng rng(seed);
  for (int k = 0; k < m; ++k) {
    const double s = (double(k) + rng.uniform()) / double(m) * total;
    std::size_t e = std::size_t(std::lower_bound(cum.begin(), cum.end(), s) - cum.begin());
    e = std::min(e, edges.size() - 1);
    const double start = e == 0 ? 0.0 : cum[e - 1];
    const double len = cum[e] - start;
    const double t = len > 0.0 ? std::clamp((s - start) / len, 0.0, 1.0) : 0.0;
    const Point a = g.pos(edges[e].first), b = g.pos(edges[e].second);
    pts.push_back({(a.x + t * (b.x - a.x)) * scale, (a.y + t * (b.y - a.y)) * scale});
  }
  return pts;
}

// Mean squared distance of the optimal one-to-one matching between two equal-size clouds.
inline double matched_mean_squared_distance(const std::vector<Point>& a, const std::vector<Point>& b) {
  if (a.size() != b.size()) throw std::invalid_argument("matched_mean_squared_distance: size mismatch");
  const std::size_t n = a.size();
  if (n == 0) return 0.0;
  std::vector<double> cost(n * n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      const double dx = a[i].x - b[j].x, dy = a[i].y - b[j].y;
      cost[i * n + j] = dx * dx + dy * dy;
    }
  return solve_assignment(cost, n).cost / double(n);
}

// Street mover's distance: optimal-transport distance between point clouds sampled
// along the two edge sets (squared Euclidean ground cost, diagonal-normalised).
inline SmdResult smd(const Graph& pred, const Graph& gt, const SmdConfig& cfg = {}) {
  if (!(pred.canvas == gt.canvas)) throw std::invalid_argument("smd: graphs are on different canvases");
  if (pred.size() == 0 && gt.size() == 0) return {0.0, false};
  if (pred.size() == 0 || gt.size() == 0) return {1.0, true};
  return {matched_mean_squared_distance(sample_edge_points(pred, cfg.points, cfg.seed),
                                        sample_edge_points(gt, cfg.points, cfg.seed)),
          false};
}

// ---------------------------------------------------------------- TOPO

struct TopoConfig {
  double radius = 13.0;        // pixels
  double angle_tol_deg = 30.0;  // degrees
};

struct TopoScore {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  int matched = 0;
  int pred_keypoints = 0;
  int gt_keypoints = 0;
};

inline double f1_score(double p, double r) { return p + r > 0.0 ? 2.0 * p * r / (p + r) : 0.0; }

// Directions (radians, ascending) from node v towards each neighbour.
inline std::vector<double> incident_directions(const Graph& g, const std::vector<std::vector<int>>& adj, int v) {
  std::vector<double> out;
  const Point p = g.pos(v);
  for (int w : adj[std::size_t(v)]) {
    const Point q = g.pos(w);
    out.push_back(std::atan2(q.y - p.y, q.x - p.x));
  }
  std::sort(out.begin(), out.end());
  return out;
}

inline double angle_between(double a, double b) {
  double d = std::fmod(std::abs(a - b), 2.0 * kPi);
  return d > kPi ? 2.0 * kPi - d : d;
}

// Equal degree, and some rotation of the angularly sorted direction lists pairs every
// direction within tol.
inline bool directions_compatible(const std::vector<double>& a, const std::vector<double>& b, double tol_rad) {
  if (a.size() != b.size()) return false;
  const std::size_t d = a.size();
  if (d == 0) return true;
  for (std::size_t r = 0; r < d; ++r) {
    bool ok = true;
    for (std::size_t k = 0; k < d && ok; ++k) ok = angle_between(a[k], b[(k + r) % d]) <= tol_rad;
    if (ok) return true;
  }
  return false;
}

// Precision/recall/F1 over keypoints (degree != 2). A predicted and a ground-truth
// keypoint may match when they lie within `radius`, have the same degree and their
// incident edge directions align within `angle_tol_deg`; the matching is one-to-one,
// of maximum cardinality, ties broken by minimum total distance.
inline TopoScore topo(const Graph& pred, const Graph& gt, const TopoConfig& cfg = {}) {
  const auto pk = keypoints(pred), gk = keypoints(gt);
  TopoScore s;
  s.pred_keypoints = int(pk.size());
  s.gt_keypoints = int(gk.size());
  if (pk.empty() && gk.empty()) {
    s.precision = s.recall = s.f1 = 1.0;
    return s;
  }
  if (pk.empty() || gk.empty()) return s;

  const auto padj = adjacency(pred.size(), pred.edges), gadj = adjacency(gt.size(), gt.edges);
  std::vector<std::vector<double>> pdir, gdir;
  for (int v : pk) pdir.push_back(incident_directions(pred, padj, v));
  for (int v : gk) gdir.push_back(incident_directions(gt, gadj, v));

  const double tol = cfg.angle_tol_deg * kPi / 180.0;
  const std::size_t n = std::max(pk.size(), gk.size());
  // Any compatible match is cheaper than all distance savings combined, so the optimum
  // first maximises the number of matches and then minimises total distance.
  const double unmatched = double(std::min(pk.size(), gk.size()) + 1) * (cfg.radius + 1.0);
  std::vector<double> cost(n * n, unmatched);
  std::vector<char> compatible(n * n, 0);
  for (std::size_t i = 0; i < pk.size(); ++i)
    for (std::size_t j = 0; j < gk.size(); ++j) {
      const double d = distance(pred.pos(pk[i]), gt.pos(gk[j]));
      if (d <= cfg.radius && directions_compatible(pdir[i], gdir[j], tol)) {
        cost[i * n + j] = d;
        compatible[i * n + j] = 1;
      }
    }
  const auto a = solve_assignment(cost, n);
  for (std::size_t i = 0; i < pk.size(); ++i) {
    const auto j = std::size_t(a.row_to_col[i]);
    if (j < gk.size() && compatible[i * n + j]) ++s.matched;
  }
  s.precision = double(s.matched) / double(pk.size());
  s.recall = double(s.matched) / double(gk.size());
  s.f1 = f1_score(s.precision, s.recall);
  return s;
}

// ---------------------------------------------------------------- tree rate

inline double tree_rate(const std::vector<Graph>& graphs) {
  if (graphs.empty()) throw std::invalid_argument("tree_rate: empty list");
  std::size_t trees = 0;
  for (const auto& g : graphs) trees += is_tree(g) ? 1 : 0;
  return 100.0 * double(trees) / double(graphs.size());
}

// ---------------------------------------------------------------- batch report

struct EvalConfig {
  SmdConfig smd;
  TopoConfig topo;
};

struct SampleMetrics {
  double smd = 0.0;
  bool smd_empty = false;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  bool tree = false;
};

struct MetricReport {
  double smd = 0.0;
  double topo_precision = 0.0;
  double topo_recall = 0.0;
  double topo_f1 = 0.0;
  double tree_rate = 0.0;  // percent
  std::vector<SampleMetrics> samples;
};

inline MetricReport evaluate(const std::vector<Graph>& preds, const std::vector<Graph>& gts, const EvalConfig& cfg = {}) {
  if (preds.size() != gts.size()) throw std::invalid_argument("evaluate: prediction/ground-truth count mismatch");
  if (preds.empty()) throw std::invalid_argument("evaluate: empty sample list");
  MetricReport r;
  for (std::size_t k = 0; k < preds.size(); ++k) {
    SampleMetrics m;
    const auto d = smd(preds[k], gts[k], cfg.smd);
    m.smd = d.value;
    m.smd_empty = d.empty;
    const auto t = topo(preds[k], gts[k], cfg.topo);
    m.precision = t.precision;
    m.recall = t.recall;
    m.f1 = t.f1;
    m.tree = is_tree(preds[k]);
    r.samples.push_back(m);
  }
  const double n = double(r.samples.size());
  std::size_t trees = 0;
  for (const auto& m : r.samples) {
    r.smd += m.smd;
    r.topo_precision += m.precision;
    r.topo_recall += m.recall;
    r.topo_f1 += m.f1;
    trees += m.tree ? 1 : 0;
  }
  r.smd /= n;
  r.topo_precision /= n;
  r.topo_recall /= n;
  r.topo_f1 /= n;
  r.tree_rate = 100.0 * double(trees) / n;
  return r;
}

inline nlohmann::json report_to_json(const MetricReport& r) {
  nlohmann::json samples = nlohmann::json::array();
  for (const auto& m : r.samples)
    samples.push_back({{"smd", m.smd},
                       {"smd_empty", m.smd_empty},
                       {"precision", m.precision},
                       {"recall", m.recall},
                       {"f1", m.f1},
                       {"tree", m.tree}});
  return {{"smd", r.smd},
          {"topo_precision", r.topo_precision},
          {"topo_recall", r.topo_recall},
          {"topo_f1", r.topo_f1},
          {"tree_rate", r.tree_rate},
          {"samples", samples}};
}

// Aligned plain-text table, one row per method.
inline std::string format_table(const std::vector<std::pair<std::string, MetricReport>>& rows) {
  std::size_t w = 6;
  for (const auto& [name, _] : rows) w = std::max(w, name.size());
  std::ostringstream os;
  os << std::left << std::setw(int(w)) << "Method" << std::right << "  " << std::setw(11) << "SMD" << "  "
     << std::setw(6) << "Prec." << "  " << std::setw(6) << "Rec." << "  " << std::setw(6) << "F1" << "  "
     << std::setw(13) << "Tree rate [%]" << "\n";
  for (const auto& [name, r] : rows) {
    os << std::left << std::setw(int(w)) << name << std::right << "  " << std::setw(11) << std::scientific
       << std::setprecision(3) << r.smd << std::fixed << "  " << std::setw(6) << r.topo_precision << "  "
       << std::setw(6) << r.topo_recall << "  " << std::setw(6) << r.topo_f1 << "  " << std::setw(13)
       << std::setprecision(1) << r.tree_rate << "\n";
  }
  return os.str();
}

}  // namespace arbor::metrics
