// Acceptance run: one PASS/FAIL line per criterion, nonzero exit if any fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <sstream>
#include <string>

#include "arbor/dataset.hpp"
#include "arbor/experiment.hpp"
#include "arbor/lsystem.hpp"
#include "arbor/metrics.hpp"
#include "arbor/mst.hpp"
#include "arbor/predictor.hpp"
#include "arbor/sfs.hpp"
#include "support.hpp"

using namespace arbor;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

int failures = 0;

void criterion(int id, const std::string& title, double limit_s, const std::function<Outcome()>& body) {
  const auto t0 = std::chrono::steady_clock::now();
  Outcome o;
  try {
    o = body();
  } catch (const std::exception& e) {
    o = {false, std::string("exception: ") + e.what()};
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (limit_s > 0 && secs > limit_s) {
    o.pass = false;
    o.detail += " [over time limit " + std::to_string(int(limit_s)) + " s]";
  }
  failures += o.pass ? 0 : 1;
  std::printf("%s  %d. %s (%.1f s): %s\n", o.pass ? "PASS" : "FAIL", id, title.c_str(), secs, o.detail.c_str());
  std::fflush(stdout);
}

std::string fmt(double v, int prec = 4) {
  std::ostringstream os;
  os.precision(prec);
  os << v;
  return os.str();
}

std::vector<double> to_std(const predictor::Vector& v) { return {v.data(), v.data() + v.size()}; }

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

bool same_tree_bytes(const fs::path& a, const fs::path& b) {
  for (const auto& e : fs::recursive_directory_iterator(a))
    if (e.is_regular_file() && slurp(e.path()) != slurp(b / fs::relative(e.path(), a))) return false;
  return true;
}

Outcome mst_oracle() {
  Rng rng(1001);
  int distinct_ok = 0, tie_ok = 0, distinct = 0, ties = 0;
  for (int trial = 0; trial < 200; ++trial) {
    const int n = 2 + int(rng.below(5));
    const bool with_ties = trial % 2 == 1;
    const auto c = oracle::random_costs(rng, n, !with_ties);
    const auto k = kruskal_mst(c), b = brute_force_mst(c);
    if (with_ties) {
      ++ties;
      tie_ok += total_cost(c, k) == total_cost(c, b) ? 1 : 0;
    } else {
      ++distinct;
      distinct_ok += k == b ? 1 : 0;
    }
  }
  return {distinct_ok == distinct && tie_ok == ties,
          "edge sets equal " + std::to_string(distinct_ok) + "/" + std::to_string(distinct) +
              " (distinct costs), totals equal " + std::to_string(tie_ok) + "/" + std::to_string(ties) + " (ties)"};
}

Outcome eq9_guarantee() {
  Rng rng(2002);
  int exact = 0;
  std::vector<Graph> outputs;
  for (int trial = 0; trial < 1000; ++trial) {
    const int n = 3 + int(rng.below(18));
    const auto out = sfs::forward(oracle::random_logits(rng, n, -5, 5), {});
    exact += sfs::threshold_edges(out.constrained) == out.tree ? 1 : 0;
    Graph g;
    g.canvas = {1, 1};
    for (int k = 0; k < n; ++k) g.add_node({0, 0});
    g.edges = sfs::threshold_edges(out.constrained);
    outputs.push_back(std::move(g));
  }
  const double rate = metrics::tree_rate(outputs);
  return {exact == 1000 && rate == 100.0,
          "threshold == MST on " + std::to_string(exact) + "/1000, tree rate " + fmt(rate, 5) + " %"};
}

// Random predictor instance: nodes, a noisy image, a random tree target and a network.
struct Instance {
  predictor::Prepared data;
  predictor::Mlp mlp;
};

Instance random_instance(Rng& rng, std::uint64_t seed) {
  const int n = 3 + int(rng.below(5));
  Graph nodes;
  nodes.canvas = {32, 32};
  for (int k = 0; k < n; ++k) nodes.add_node({rng.uniform(0, 31), rng.uniform(0, 31)});
  Image img(32, 32);
  for (auto& p : img.pixels) p = std::uint8_t(rng.below(256));
  Instance in{{std::size_t(n), predictor::all_pair_features(img, nodes),
               targets_from_edges(std::size_t(n), oracle::random_tree(rng, n))},
              predictor::Mlp::initialize({}, seed)};
  // Spread the logits so both signs and all projection outcomes occur.
  in.mlp.weights(2) *= rng.uniform(1.0, 4.0);
  return in;
}

Outcome gradient_correctness() {
  const sfs::Config cfg;
  const double bound = 2.0 * std::exp(-10.0) / (1.0 + std::exp(-10.0));
  Rng rng(3003);

  // (a) End-to-end: parameters -> features -> logits -> suppression -> loss, until every
  // case row has appeared in at least 10 instances.
  std::map<int, int> instances_per_case;
  int instances = 0;
  double worst = 0.0;
  auto covered = [&] {
    for (int c = 1; c <= 8; ++c)
      if (instances_per_case[c] < 10) return false;
    return true;
  };
  while ((instances < 100 || !covered()) && instances < 2000) {
    auto in = random_instance(rng, 9000 + std::uint64_t(instances));
    ++instances;
    const auto logits = predictor::to_logits(in.mlp.forward(in.data.features), in.data.nodes);
    const auto diff = sfs::forward(logits, cfg).diff;
    std::map<int, int> seen;
    for (int c : sfs::gradient_cases(logits, diff, in.data.targets)) seen[c] = 1;
    for (const auto& [c, _] : seen) ++instances_per_case[c];
    const auto step = predictor::loss_and_gradient(in.mlp, in.data, predictor::Mode::sfs, cfg);
    auto loss = [&](const std::vector<double>& w) {
      predictor::Mlp m = in.mlp;
      for (std::size_t k = 0; k < w.size(); ++k) m.parameters()[Eigen::Index(k)] = w[k];
      return sfs::edge_loss_from_logits(predictor::to_logits(m.forward(in.data.features), in.data.nodes), diff,
                                        in.data.targets, cfg)
          .total;
    };
    const auto w0 = to_std(in.mlp.parameters());
    std::vector<double> numeric;
    for (std::size_t k = 0; k < w0.size(); ++k) numeric.push_back(oracle::central_difference(loss, w0, k, 1e-6));
    worst = std::max(worst, oracle::relative_error(to_std(step.grad), numeric));
  }

  // (b) Pair-level case values on layer instances with logits in [-0.5, 0.5].
  std::map<int, int> pairs_per_case;
  double worst47 = 0.0, worst3 = 0.0, worst8 = 0.0;
  for (int trial = 0; trial < 400; ++trial) {
    const int n = 3 + int(rng.below(6));
    const auto f = oracle::random_logits(rng, n, -0.5, 0.5);
    const auto t = targets_from_edges(std::size_t(n), oracle::random_tree(rng, n));
    const auto diff = sfs::forward(f, cfg).diff;
    const auto g = sfs::backward(f, diff, t, cfg).constrained;
    const auto cases = sfs::gradient_cases(f, diff, t);
    for (std::size_t k = 0; k < f.size(); ++k) {
      ++pairs_per_case[cases[k]];
      const auto v = g[k];
      if (cases[k] == 4 || cases[k] == 7) worst47 = std::max(worst47, std::hypot(v.pos, v.neg));
      if (cases[k] == 3) worst3 = std::max({worst3, std::abs(v.pos), std::abs(v.neg - 1.0)});
      if (cases[k] == 8) worst8 = std::max({worst8, std::abs(v.pos - 1.0), std::abs(v.neg)});
    }
  }
  bool all_pairs = true;
  for (int c = 1; c <= 8; ++c) all_pairs = all_pairs && pairs_per_case[c] > 0;

  std::ostringstream os;
  os << instances << " end-to-end instances, max rel. error " << fmt(worst, 3) << " (<= 1e-5); per-case instances";
  for (int c = 1; c <= 8; ++c) os << " " << c << ":" << instances_per_case[c];
  os << "; cases 4/7 max |g| " << fmt(worst47, 3) << " (<= " << fmt(bound, 3) << "), case 3 dev " << fmt(worst3, 3)
     << ", case 8 dev " << fmt(worst8, 3) << " (<= 1e-3)";
  return {covered() && instances >= 100 && worst <= 1e-5 && all_pairs && worst47 <= bound && worst3 <= 1e-3 &&
              worst8 <= 1e-3,
          os.str()};
}

Outcome norm_dominance() {
  const sfs::Config cfg;
  Rng rng(4004);
  int checked3 = 0, checked8 = 0, violations = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    const int n = 3 + int(rng.below(8));
    const auto f = oracle::random_logits(rng, n, -5, 5);
    const auto t = targets_from_edges(std::size_t(n), oracle::random_tree(rng, n));
    const auto diff = sfs::forward(f, cfg).diff;
    const auto g = sfs::backward(f, diff, t, cfg);
    const auto cases = sfs::gradient_cases(f, diff, t);
    for (std::size_t k = 0; k < f.size(); ++k) {
      if (cases[k] != 3 && cases[k] != 8) continue;
      (cases[k] == 3 ? checked3 : checked8) += 1;
      const double nc = std::hypot(g.constrained[k].pos, g.constrained[k].neg);
      const double nu = std::hypot(g.unconstrained[k].pos, g.unconstrained[k].neg);
      if (!(nc > nu)) ++violations;
    }
  }
  return {violations == 0 && checked3 > 0 && checked8 > 0,
          std::to_string(checked3) + " case-3 and " + std::to_string(checked8) + " case-8 pairs over 1000 instances, " +
              std::to_string(violations) + " violations"};
}

Outcome lsystem_fidelity() {
  const auto out = lsystem::to_string(
      lsystem::rewrite(lsystem::parse("F0[+A0]F0[-A0]A0"), lsystem::Production::parse("F->F;A->F[-A]")));
  const bool rewrite_ok = out == "F0[+F1[-A1]]F0[-F1[-A1]]F1[-A1]";

  const auto root = fs::temp_directory_path() / "arbor_acceptance_ds";
  fs::remove_all(root);
  bool reproducible = true;
  int samples = 0, bad = 0;
  for (const char* profile : {"standard", "generalized", "thickened", "mini"}) {
    const auto a = root / (std::string(profile) + "_a"), b = root / (std::string(profile) + "_b");
    generate_dataset(a.string(), profile, 50, 5);
    generate_dataset(b.string(), profile, 50, 5);
    reproducible = reproducible && same_tree_bytes(a, b) && same_tree_bytes(b, a);
    const int cap = make_profile(profile).geom.node_cap;
    for (const auto& s : load_dataset(a.string()).samples) {
      ++samples;
      if (!is_tree(s.graph) || int(s.graph.size()) > cap) ++bad;
    }
  }
  fs::remove_all(root);
  return {rewrite_ok && reproducible && bad == 0,
          "rewrite \"" + out + "\"; 4 profiles x 50 samples byte-identical: " + (reproducible ? "yes" : "no") + "; " +
              std::to_string(samples - bad) + "/" + std::to_string(samples) + " samples are trees within the cap"};
}

Outcome metric_sanity() {
  Rng rng(6006);
  double worst_self = 0.0, worst_assign = 0.0;
  bool topo_ok = true;
  const auto samples = generate_samples(make_profile("mini"), {30, 0, 0}, 6);
  for (const auto& s : samples) {
    worst_self = std::max(worst_self, metrics::smd(s.graph, s.graph).value);
    const auto t = metrics::topo(s.graph, s.graph);
    topo_ok = topo_ok && t.precision == 1.0 && t.recall == 1.0 && t.f1 == 1.0;
  }
  for (int trial = 0; trial < 200; ++trial) {
    const auto& g = samples[rng.below(samples.size())].graph;
    const auto& h = samples[rng.below(samples.size())].graph;
    const int m = 1 + int(rng.below(6));
    const auto pg = metrics::sample_edge_points(g, m, 17), ph = metrics::sample_edge_points(h, m, 17);
    worst_assign = std::max(worst_assign, std::abs(metrics::smd(g, h, {m, 17}).value - oracle::brute_force_matching(pg, ph)));
  }
  Graph cyc = samples[0].graph;
  cyc.add_edge(0, int(cyc.size()) - 1);
  if (is_tree(cyc)) cyc.add_edge(1, int(cyc.size()) - 1);
  const bool rates = metrics::tree_rate({samples[0].graph}) == 100.0 &&
                     metrics::tree_rate({samples[0].graph, cyc}) == 50.0 &&
                     metrics::tree_rate({cyc, cyc, cyc, samples[1].graph}) == 25.0;
  return {worst_self <= 1e-12 && worst_assign <= 1e-12 && topo_ok && rates,
          "max SMD(g,g) " + fmt(worst_self, 3) + ", max |assignment - brute force| " + fmt(worst_assign, 3) +
              ", TOPO(g,g)=(1,1,1): " + (topo_ok ? "yes" : "no") + ", tree-rate mixes exact: " + (rates ? "yes" : "no")};
}

struct Splits {
  std::vector<Sample> train, val, test;
};

Splits split(const std::vector<Sample>& all) {
  Splits s;
  for (const auto& x : all) (x.split == "train" ? s.train : x.split == "val" ? s.val : s.test).push_back(x);
  return s;
}

void log_epoch(const std::string& name, const predictor::EpochRecord& r) {
  if (r.epoch % 20 == 0)
    std::fprintf(stderr, "  [%s] epoch %d loss %.3f val F1 %.4f val tree rate %.1f\n", name.c_str(), r.epoch,
                 r.loss_total, r.val_f1, r.val_tree_rate);
}

Outcome method_trend() {
  const auto d = split(generate_samples(make_profile("mini"), {2000, 200, 200}, 2024));
  std::size_t max_nodes = 0;
  for (const auto& s : d.train) max_nodes = std::max(max_nodes, s.graph.size());
  predictor::TrainConfig cfg;
  cfg.seed = 11;
  cfg.epochs = 80;
  cfg.batch_size = 8;
  const auto rows = experiment::compare_modes(d.train, d.val, d.test, cfg, {}, log_epoch);
  std::printf("%s", experiment::table(rows).c_str());
  const auto& un = rows[0].report;
  const auto& ttc = rows[1].report;
  const auto& ours = rows[2].report;
  const bool a = un.tree_rate < 100.0;
  const bool b = ttc.tree_rate == 100.0 && ours.tree_rate == 100.0;
  const bool c = ours.topo_f1 >= ttc.topo_f1 - 0.02;
  return {a && b && c && max_nodes <= 30,
          "max nodes " + std::to_string(max_nodes) + "; (a) unconstrained tree rate " + fmt(un.tree_rate) +
              " % < 100: " + (a ? "yes" : "no") + "; (b) ttc/sfs tree rate " + fmt(ttc.tree_rate) + "/" +
              fmt(ours.tree_rate) + " %: " + (b ? "yes" : "no") + "; (c) sfs F1 " + fmt(ours.topo_f1) +
              " >= ttc F1 " + fmt(ttc.topo_f1) + " - 0.02: " + (c ? "yes" : "no")};
}

Outcome lambda_ablation() {
  const auto d = split(generate_samples(make_profile("mini"), {400, 50, 100}, 77));
  predictor::TrainConfig cfg;
  cfg.seed = 5;
  cfg.epochs = 20;
  const std::vector<double> lambdas(std::begin(sfs::kLambdaPresets), std::end(sfs::kLambdaPresets));
  const auto rows = experiment::lambda_sweep(d.train, d.val, d.test, cfg, lambdas, {}, log_epoch);
  std::printf("%s", experiment::table(rows).c_str());
  bool finite = true;
  for (const auto& r : rows) finite = finite && std::isfinite(r.report.topo_f1) && std::isfinite(r.report.smd);
  return {rows.size() == 4 && finite, std::to_string(rows.size()) + " rows reported (no ordering asserted)"};
}

}  // namespace

int main() {
  criterion(1, "MST oracle equivalence", 5, mst_oracle);
  criterion(2, "Constrained threshold equals the MST tree", 30, eq9_guarantee);
  criterion(3, "Gradient correctness", 60, gradient_correctness);
  criterion(4, "Gradient-norm dominance", 0, norm_dominance);
  criterion(5, "L-system fidelity and dataset reproducibility", 0, lsystem_fidelity);
  criterion(6, "Metric sanity", 0, metric_sanity);
  criterion(7, "Desk-scale method comparison trend", 1800, method_trend);
  criterion(8, "Lambda ablation harness", 0, lambda_ablation);
  std::printf("%s: %d criteria failed\n", failures == 0 ? "ALL PASS" : "FAILURES", failures);
  return failures == 0 ? 0 : 1;
}
