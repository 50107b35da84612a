#include <gtest/gtest.h>

#include "arbor/metrics.hpp"
#include "support.hpp"

using namespace arbor;
using namespace arbor::metrics;

namespace {

Graph random_tree_graph(Rng& rng, int n, Canvas c) {
  Graph g;
  g.canvas = c;
  for (int k = 0; k < n; ++k) g.add_node({rng.uniform(0, c.width - 1), rng.uniform(0, c.height - 1)});
  g.edges = oracle::random_tree(rng, n);
  return g;
}

Graph translated(const Graph& g, double dx, double dy) {
  Graph out = g;
  for (auto& v : out.nodes) v.x += dx, v.y += dy;
  return out;
}

}  // namespace

TEST(Smd, IdenticalGraphsGiveZero) {
  Rng rng(1);
  for (int trial = 0; trial < 10; ++trial) {
    const auto g = random_tree_graph(rng, 2 + int(rng.below(10)), {128, 128});
    EXPECT_LE(smd(g, g).value, 1e-12);
  }
}

TEST(Smd, TranslationGivesSquaredOffset) {
  // A vertical segment shifted sideways; the oracle enumerates all matchings.
  Graph a = oracle::path_graph({{10, 50}, {10, 60}}, {100, 100});
  Graph b = translated(a, 30, 0);
  const double delta = 30.0 / Canvas{100, 100}.diagonal();
  const SmdConfig cfg{8, 3};
  const auto pa = sample_edge_points(a, 8, 3), pb = sample_edge_points(b, 8, 3);
  EXPECT_NEAR(oracle::brute_force_matching(pa, pb), delta * delta, 1e-12);
  EXPECT_NEAR(smd(a, b, cfg).value, delta * delta, 1e-12);
}

TEST(Smd, ExactAssignmentMatchesPermutationBruteForce) {
  Rng rng(2);
  for (int trial = 0; trial < 200; ++trial) {
    const int m = 1 + int(rng.below(6));
    std::vector<Point> a(static_cast<std::size_t>(m)), b(static_cast<std::size_t>(m));
    for (auto& p : a) p = {rng.uniform(), rng.uniform()};
    for (auto& p : b) p = {rng.uniform(), rng.uniform()};
    EXPECT_NEAR(matched_mean_squared_distance(a, b), oracle::brute_force_matching(a, b), 1e-12);
  }
  Rng graphs(3);
  for (int trial = 0; trial < 50; ++trial) {
    const auto g = random_tree_graph(graphs, 2 + int(graphs.below(6)), {64, 64});
    const auto h = random_tree_graph(graphs, 2 + int(graphs.below(6)), {64, 64});
    const int m = 1 + int(graphs.below(6));
    const SmdConfig cfg{m, 11};
    EXPECT_NEAR(smd(g, h, cfg).value,
                oracle::brute_force_matching(sample_edge_points(g, m, 11), sample_edge_points(h, m, 11)), 1e-12);
  }
}

TEST(Smd, SymmetricAndTranslationInvariant) {
  Rng rng(4);
  for (int trial = 0; trial < 20; ++trial) {
    const auto g = random_tree_graph(rng, 2 + int(rng.below(8)), {200, 200});
    const auto h = random_tree_graph(rng, 2 + int(rng.below(8)), {200, 200});
    EXPECT_NEAR(smd(g, h).value, smd(h, g).value, 1e-12);
    Graph g2 = g, h2 = h;
    g2.canvas = h2.canvas = {400, 400};
    const double before = smd(g2, h2).value;
    EXPECT_NEAR(smd(translated(g2, 50, 70), translated(h2, 50, 70)).value, before, 1e-9);
  }
}

TEST(Smd, EmptySidesAndEdgelessPredictions) {
  Graph empty;
  empty.canvas = {64, 64};
  const Graph g = oracle::path_graph({{5, 5}, {40, 5}}, {64, 64});
  const auto r = smd(empty, g);
  EXPECT_TRUE(r.empty);
  EXPECT_EQ(r.value, 1.0);
  EXPECT_EQ(smd(empty, empty).value, 0.0);
  Graph nodes_only = g;
  nodes_only.edges.clear();
  const auto pts = sample_edge_points(nodes_only, 4, 0);
  ASSERT_EQ(pts.size(), 4u);
  EXPECT_FALSE(smd(nodes_only, g).empty);
  Graph other = g;
  other.canvas = {32, 32};
  EXPECT_THROW(smd(g, other), std::invalid_argument);
}

TEST(Topo, IdenticalGraphsScoreOne) {
  const auto y = oracle::y_tree();
  const auto s = topo(y, y);
  EXPECT_EQ(s.precision, 1.0);
  EXPECT_EQ(s.recall, 1.0);
  EXPECT_EQ(s.f1, 1.0);
  Graph none;
  none.canvas = {8, 8};
  EXPECT_EQ(topo(none, none).f1, 1.0);
  EXPECT_EQ(topo(none, y).recall, 0.0);
}

TEST(Topo, MissingLeafGivesRecallThreeQuarters) {
  const auto gt = oracle::y_tree();
  // Drop the last edge of one arm; its middle node becomes a leaf 20 px short of the tip.
  Graph pred;
  pred.canvas = gt.canvas;
  for (int k : {0, 1, 2, 4, 5}) pred.add_node(gt.pos(k));
  pred.add_edge(0, 1);
  pred.add_edge(1, 2);
  pred.add_edge(1, 3);
  pred.add_edge(3, 4);
  const auto s = topo(pred, gt);
  EXPECT_EQ(s.gt_keypoints, 4);
  EXPECT_DOUBLE_EQ(s.recall, 0.75);
  EXPECT_DOUBLE_EQ(s.precision, 0.75);
}

TEST(Topo, FarPredictionOnlyHurtsPrecision) {
  const auto gt = oracle::y_tree();
  Graph pred = gt;
  pred.add_node({120, 5});
  const auto s = topo(pred, gt);
  EXPECT_DOUBLE_EQ(s.recall, 1.0);
  EXPECT_DOUBLE_EQ(s.precision, 4.0 / 5.0);
}

TEST(Topo, DirectionMismatchBlocksMatch) {
  const Graph a = oracle::path_graph({{50, 50}, {70, 50}}, {128, 128});
  const Graph b = oracle::path_graph({{50, 50}, {50, 70}}, {128, 128});
  // Endpoint (50, 50) points right in a and down in b; the other ends are far apart.
  EXPECT_EQ(topo(a, b).matched, 0);
  EXPECT_TRUE(directions_compatible({0.1, 2.0}, {2.1, 0.05}, 0.2));
  EXPECT_FALSE(directions_compatible({0.1}, {0.1, 1.0}, 0.2));
  EXPECT_NEAR(angle_between(3.1, -3.1), 2 * kPi - 6.2, 1e-12);
}

TEST(Topo, SwapExchangesPrecisionAndRecall) {
  Rng rng(5);
  for (int trial = 0; trial < 50; ++trial) {
    const auto g = random_tree_graph(rng, 2 + int(rng.below(8)), {64, 64});
    const auto h = random_tree_graph(rng, 2 + int(rng.below(8)), {64, 64});
    const auto a = topo(g, h), b = topo(h, g);
    EXPECT_DOUBLE_EQ(a.precision, b.recall);
    EXPECT_DOUBLE_EQ(a.recall, b.precision);
    EXPECT_GE(a.precision, 0.0);
    EXPECT_LE(a.precision, 1.0);
  }
}

TEST(TreeRate, Mixes) {
  const auto y = oracle::y_tree();
  Graph tri = oracle::path_graph({{1, 1}, {5, 1}, {3, 4}}, {8, 8});
  tri.add_edge(0, 2);
  EXPECT_EQ(tree_rate({y}), 100.0);
  EXPECT_EQ(tree_rate({y, tri}), 50.0);
  EXPECT_THROW(tree_rate({}), std::invalid_argument);
}

TEST(Evaluate, SelfAndOneCorruptedSample) {
  Rng rng(6);
  std::vector<Graph> gts;
  for (int k = 0; k < 10; ++k) gts.push_back(random_tree_graph(rng, 3 + int(rng.below(6)), {64, 64}));
  const auto self = evaluate(gts, gts);
  EXPECT_LE(self.smd, 1e-12);
  EXPECT_EQ(self.topo_f1, 1.0);
  EXPECT_EQ(self.tree_rate, 100.0);

  auto preds = gts;
  preds[4].edges.clear();
  const auto r = evaluate(preds, gts);
  EXPECT_EQ(r.tree_rate, 90.0);
  double mean = 0.0;
  for (const auto& m : r.samples) mean += m.f1;
  EXPECT_DOUBLE_EQ(r.topo_f1, mean / 10.0);
  EXPECT_THROW(evaluate(preds, {gts[0]}), std::invalid_argument);

  const auto table = format_table({{"a", self}, {"bbbb", r}});
  EXPECT_NE(table.find("Tree rate [%]"), std::string::npos);
  EXPECT_NE(table.find("100.0"), std::string::npos);
  EXPECT_EQ(report_to_json(r)["samples"].size(), 10u);
}
