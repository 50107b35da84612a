// arbor: dataset generation, training, evaluation, projection and plotting.
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "arbor/config.hpp"
#include "arbor/dataset.hpp"
#include "arbor/experiment.hpp"
#include "arbor/graph_io.hpp"
#include "arbor/mst.hpp"
#include "arbor/plot.hpp"
#include "arbor/predictor.hpp"
#include "arbor/sfs.hpp"
#include "png_uri.hpp"

namespace fs = std::filesystem;
using namespace arbor;

namespace {

class UsageError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

using Settings = std::map<std::string, std::string>;

const std::map<std::string, Settings> kDefaults = {
    {"gen", {{"profile", "mini"}, {"count", "100"}, {"seed", "0"}, {"rules", ""}, {"out", ""}, {"force", "false"}}},
    {"train",
     {{"data", ""},
      {"mode", "sfs"},
      {"lambda", "10"},
      {"seed", "0"},
      {"epochs", "50"},
      {"batch_size", "8"},
      {"lr", "0.001"},
      {"patience", "30"},
      {"hidden", "32,32"},
      {"positive_weight", "1"},
      {"mean_normalize", "false"},
      {"topo_radius", "13"},
      {"topo_angle", "30"},
      {"smd_points", "100"},
      {"smd_seed", "0"},
      {"compare", "false"},
      {"lambda_sweep", ""},
      {"out", ""}}},
    {"eval",
     {{"data", ""},
      {"checkpoint", ""},
      {"mode", ""},
      {"lambda", ""},
      {"split", "test"},
      {"self_check", "false"},
      {"hidden", ""},
      {"topo_radius", "13"},
      {"topo_angle", "30"},
      {"smd_points", "100"},
      {"smd_seed", "0"},
      {"out", ""}}},
    {"project", {{"input", ""}, {"out", ""}}},
    {"plot", {{"data", ""}, {"pred", ""}, {"split", "test"}, {"limit", "0"}, {"out", ""}}},
};

struct Invocation {
  std::string command;
  std::string config_path;
  Settings overrides;
  std::vector<std::string> sets;
};

KeyValueConfig resolve(const Invocation& inv) {
  const auto& defaults = kDefaults.at(inv.command);
  KeyValueConfig cfg;
  for (const auto& [k, v] : defaults) cfg.set(k, v);
  auto apply = [&](const std::string& key, const std::string& value, const std::string& origin) {
    if (key == "command") {
      if (value != inv.command) throw UsageError(origin + ": config is for '" + value + "', not '" + inv.command + "'");
      return;
    }
    if (!defaults.count(key)) throw UsageError(origin + ": unknown key '" + key + "' for " + inv.command);
    cfg.set(key, value);
  };
  if (!inv.config_path.empty()) {
    const auto file = KeyValueConfig::load(inv.config_path);
    for (const auto& [k, v] : file.values()) apply(k, v, inv.config_path);
  }
  for (const auto& [k, v] : inv.overrides) apply(k, v, "command line");
  for (const auto& s : inv.sets) {
    const auto eq = s.find('=');
    if (eq == std::string::npos) throw UsageError("--set expects key=value, got '" + s + "'");
    apply(s.substr(0, eq), s.substr(eq + 1), "--set");
  }
  if (cfg.get("out", "").empty()) {
    const char* root = std::getenv("ARBOR_OUT");
    cfg.set("out", (fs::path(root && *root ? root : "runs") / inv.command).string());
  }
  return cfg;
}

// `out` and `force` only say where a run lands, so they stay out of the snapshot and two
// identical runs produce identical directories.
void write_snapshot(const std::string& command, const KeyValueConfig& cfg) {
  KeyValueConfig snap;
  snap.set("command", command);
  for (const auto& [k, v] : cfg.values())
    if (k != "out" && k != "force") snap.set(k, v);
  write_text_file((fs::path(cfg.get("out", ".")) / "resolved_config.txt").string(), snap.dump());
}

std::string required(const KeyValueConfig& cfg, const std::string& key) {
  auto v = cfg.get(key, "");
  if (v.empty()) throw UsageError("missing required setting '" + key + "'");
  return v;
}

std::vector<double> number_list(const std::string& text, const std::string& key) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(item, &used));
      if (item.find_first_not_of(" \t", used) != std::string::npos) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw ConfigError("config key '" + key + "' has bad list entry '" + item + "'");
    }
  }
  return out;
}

predictor::Architecture architecture(const std::string& hidden) {
  predictor::Architecture a;
  a.layers = {predictor::kFeatureCount};
  for (double w : number_list(hidden, "hidden")) a.layers.push_back(int(w));
  a.layers.push_back(2);
  a.check();
  return a;
}

std::string layers_text(const predictor::Architecture& a) {
  std::string s;
  for (int w : a.layers) s += (s.empty() ? "" : "-") + std::to_string(w);
  return s;
}

metrics::EvalConfig eval_config(const KeyValueConfig& cfg) {
  metrics::EvalConfig e;
  e.smd.points = int(cfg.get_int("smd_points", 100));
  e.smd.seed = cfg.get_uint("smd_seed", 0);
  e.topo.radius = cfg.get_double("topo_radius", 13.0);
  e.topo.angle_tol_deg = cfg.get_double("topo_angle", 30.0);
  return e;
}

std::string file_safe(std::string s) {
  for (auto& c : s)
    if (!std::isalnum(static_cast<unsigned char>(c)) && c != '.' && c != '-') c = '_';
  return s;
}

// ---------------------------------------------------------------- gen

int cmd_gen(const KeyValueConfig& cfg) {
  const fs::path out = cfg.get("out", "");
  Profile profile;
  try {
    profile = make_profile(cfg.get("profile", ""));
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  const int count = int(cfg.get_int("count", 100));
  if (count < 1) throw UsageError("count must be >= 1");
  const auto seed = cfg.get_uint("seed", 0);
  const auto rules_path = cfg.get("rules", "");
  const auto rules = rules_path.empty() ? lsystem::default_rules() : lsystem::rules_from_json(read_json_file(rules_path));

  if (fs::exists(out) && !fs::is_empty(out) && !cfg.get_bool("force", false)) {
    std::cerr << "arbor gen: " << out.string() << " is not empty (use --force to overwrite)\n";
    return 1;
  }
  // --force replaces what a previous gen wrote and leaves anything else alone.
  for (const char* stale : {"images", "graphs", "manifest.json", "resolved_config.txt"}) fs::remove_all(out / stale);
  fs::create_directories(out);
  write_snapshot("gen", cfg);

  const auto samples = generate_samples(profile, SplitCounts::from_total(count), seed, rules);
  const auto manifest = write_dataset(out.string(), profile, seed, samples);

  std::size_t min_n = SIZE_MAX, max_n = 0, nodes = 0, edges = 0;
  for (const auto& s : samples) {
    min_n = std::min(min_n, s.graph.size());
    max_n = std::max(max_n, s.graph.size());
    nodes += s.graph.size();
    edges += s.graph.edges.size();
  }
  std::cout << "manifest: " << manifest << "\n"
            << "samples: " << samples.size() << " (profile " << profile.name << ", seed " << seed << ")\n"
            << "nodes per graph: min " << min_n << ", max " << max_n << ", mean " << std::fixed
            << std::setprecision(1) << double(nodes) / double(samples.size()) << "\n"
            << "edges per graph: mean " << double(edges) / double(samples.size()) << "\n";
  return 0;
}

// ---------------------------------------------------------------- train

std::string history_csv(const std::vector<predictor::EpochRecord>& history) {
  std::ostringstream os;
  os << std::setprecision(17);
  os << "epoch,loss_total,loss_unconstrained,loss_constrained,val_f1,val_tree_rate\n";
  for (const auto& r : history)
    os << r.epoch << "," << r.loss_total << "," << r.loss_unconstrained << "," << r.loss_constrained << ","
       << r.val_f1 << "," << r.val_tree_rate << "\n";
  return os.str();
}

void print_epoch(const std::string& name, const predictor::EpochRecord& r) {
  std::cout << name << " epoch " << r.epoch << "  loss " << std::setprecision(6) << r.loss_total << "  val F1 "
            << std::setprecision(4) << r.val_f1 << "  val tree " << std::setprecision(1) << std::fixed
            << r.val_tree_rate << "%\n"
            << std::defaultfloat;
}

nlohmann::json rows_json(const std::vector<experiment::Row>& rows) {
  nlohmann::json j = nlohmann::json::array();
  for (const auto& r : rows)
    j.push_back({{"name", r.name}, {"best_epoch", r.result.best_epoch}, {"metrics", metrics::report_to_json(r.report)}});
  return j;
}

int cmd_train(const KeyValueConfig& cfg) {
  const fs::path out = cfg.get("out", "");
  const auto data = load_dataset(required(cfg, "data"));

  predictor::TrainConfig tc;
  tc.seed = cfg.get_uint("seed", 0);
  tc.epochs = int(cfg.get_int("epochs", 50));
  tc.batch_size = int(cfg.get_int("batch_size", 8));
  tc.adam.learning_rate = cfg.get_double("lr", 1e-3);
  tc.patience = int(cfg.get_int("patience", 30));
  tc.arch = architecture(cfg.get("hidden", ""));
  tc.sfs.lambda = cfg.get_double("lambda", 10.0);
  tc.sfs.positive_weight = cfg.get_double("positive_weight", 1.0);
  tc.sfs.mean_normalize = cfg.get_bool("mean_normalize", false);
  const auto eval = eval_config(cfg);
  tc.topo = eval.topo;
  try {
    tc.mode = predictor::parse_mode(cfg.get("mode", "sfs"));
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  tc.sfs.check();

  const bool compare = cfg.get_bool("compare", false);
  const auto sweep = number_list(cfg.get("lambda_sweep", ""), "lambda_sweep");
  if (compare && !sweep.empty()) throw UsageError("--compare and --lambda-sweep are separate runs");

  const auto train_set = data.split("train"), val_set = data.split("val"), test_set = data.split("test");
  fs::create_directories(out);
  write_snapshot("train", cfg);

  if (compare || !sweep.empty()) {
    if (test_set.empty()) throw std::runtime_error("dataset has no test split to compare on");
    const auto rows = compare ? experiment::compare_modes(train_set, val_set, test_set, tc, eval, print_epoch)
                              : experiment::lambda_sweep(train_set, val_set, test_set, tc, sweep, eval, print_epoch);
    fs::create_directories(out / "checkpoints");
    for (const auto& r : rows) {
      auto rc = tc;
      if (compare) {
        rc.mode = predictor::parse_mode(r.name);
      } else {
        rc.mode = predictor::Mode::sfs;
        rc.sfs.lambda = sweep[std::size_t(&r - rows.data())];
      }
      write_json_file((out / "checkpoints" / (file_safe(r.name) + ".json")).string(),
                      predictor::checkpoint_json(r.result.params, rc, r.result.best_epoch));
      write_text_file((out / ("history_" + file_safe(r.name) + ".csv")).string(), history_csv(r.result.history));
    }
    const auto table = experiment::table(rows);
    write_text_file((out / "comparison.txt").string(), table);
    write_json_file((out / "comparison.json").string(), {{"split", "test"}, {"rows", rows_json(rows)}});
    std::cout << "\n" << table;
    return 0;
  }

  const auto result = predictor::train(train_set, val_set, tc, [&](const predictor::EpochRecord& r) {
    print_epoch(predictor::to_string(tc.mode), r);
  });
  write_json_file((out / "checkpoint.json").string(), predictor::checkpoint_json(result.params, tc, result.best_epoch));
  write_text_file((out / "history.csv").string(), history_csv(result.history));
  std::cout << "checkpoint: " << (out / "checkpoint.json").string() << " (epoch " << result.best_epoch << ")\n";
  return 0;
}

// ---------------------------------------------------------------- eval

int cmd_eval(KeyValueConfig cfg) {
  const fs::path out = cfg.get("out", "");
  const auto data = load_dataset(required(cfg, "data"));
  const auto split = cfg.get("split", "test");
  const auto samples = data.split(split);
  if (samples.empty()) throw std::runtime_error("dataset has no '" + split + "' samples");
  const auto eval = eval_config(cfg);
  const bool self_check = cfg.get_bool("self_check", false);

  std::vector<Graph> preds, gts;
  std::string name = "ground truth";
  if (self_check) {
    for (const auto& s : samples) preds.push_back(s.graph);
  } else {
    const auto path = required(cfg, "checkpoint");
    predictor::Checkpoint ck;
    try {
      ck = predictor::checkpoint_from_json(read_json_file(path));
    } catch (const std::exception& e) {
      throw predictor::CheckpointError(path + ": " + e.what());
    }
    const auto& arch = ck.params.mlp.architecture();
    if (!cfg.get("hidden", "").empty() && !(architecture(cfg.get("hidden", "")) == arch))
      throw predictor::CheckpointError(path + ": architecture mismatch: checkpoint is " + layers_text(arch) +
                                       ", config expects " + layers_text(architecture(cfg.get("hidden", ""))));
    if (cfg.get("mode", "").empty()) cfg.set("mode", predictor::to_string(ck.mode));
    if (cfg.get("lambda", "").empty()) {
      std::ostringstream os;
      os << std::setprecision(17) << ck.lambda;
      cfg.set("lambda", os.str());
    }
    predictor::Mode mode;
    try {
      mode = predictor::parse_mode(cfg.get("mode", ""));
    } catch (const std::invalid_argument& e) {
      throw UsageError(e.what());
    }
    sfs::Config sc;
    sc.lambda = cfg.get_double("lambda", 10.0);
    sc.check();
    name = predictor::to_string(mode);
    for (const auto& s : samples) preds.push_back(predictor::infer(ck.params.mlp, s.image, s.graph, mode, sc));
  }
  for (const auto& s : samples) gts.push_back(s.graph);

  fs::create_directories(out / "predictions");
  write_snapshot("eval", cfg);
  for (std::size_t k = 0; k < samples.size(); ++k)
    write_graph((out / "predictions" / (samples[k].id + ".json")).string(), preds[k]);

  const auto report = metrics::evaluate(preds, gts, eval);
  const auto table = metrics::format_table({{name, report}});
  auto j = metrics::report_to_json(report);
  j["name"] = name;
  j["split"] = split;
  write_json_file((out / "report.json").string(), j);
  write_text_file((out / "report.txt").string(), table);
  std::cout << table;
  return 0;
}

// ---------------------------------------------------------------- project

// Accepts a graph file (its edges become probability 1, every other pair 0) or
// {"canvas", "nodes", "edge_prob": n x n matrix of edge probabilities}.
int cmd_project(const KeyValueConfig& cfg) {
  const fs::path out = cfg.get("out", "");
  const auto input = required(cfg, "input");
  const json j = read_json_file(input);

  Graph g;
  EdgeProbabilities probs(0);
  EdgeSet predicted;
  try {
    if (j.contains("edge_prob")) {
      g = graph_from_json({{"canvas", j.at("canvas")}, {"nodes", j.at("nodes")}, {"edges", json::array()}});
      const auto& m = j.at("edge_prob");
      const std::size_t n = g.size();
      if (!m.is_array() || m.size() != n) throw GraphError("edge_prob must be a " + std::to_string(n) + " x " + std::to_string(n) + " matrix");
      probs = EdgeProbabilities(n);
      for (std::size_t i = 0; i < n; ++i) {
        if (!m[i].is_array() || m[i].size() != n) throw GraphError("edge_prob row " + std::to_string(i) + " has the wrong length");
        for (std::size_t k = i + 1; k < n; ++k) {
          const double p = m[i][k].get<double>();
          if (!(p >= 0.0 && p <= 1.0)) throw GraphError("edge_prob[" + std::to_string(i) + "][" + std::to_string(k) + "] outside [0, 1]");
          if (m[k][i].get<double>() != p) throw GraphError("edge_prob is not symmetric at (" + std::to_string(i) + ", " + std::to_string(k) + ")");
          probs.at(int(i), int(k)) = {p, 1.0 - p};
        }
      }
      predicted = sfs::threshold_edges(probs);
    } else {
      g = graph_from_json(j);
      probs = EdgeProbabilities(g.size(), PairValue{0.0, 1.0});
      for (const auto& e : g.edges) probs.at(e) = {1.0, 0.0};
      predicted = g.edges;
    }
  } catch (const json::exception& e) {
    throw GraphError(input + ": " + e.what());
  }

  const auto p = mst_project(probs, predicted);
  g.edges = p.tree;
  fs::create_directories(out);
  write_snapshot("project", cfg);
  write_graph((out / "tree.json").string(), g);
  auto edge_list = [](const EdgeSet& s) {
    json a = json::array();
    for (const auto& [u, v] : s) a.push_back({u, v});
    return a;
  };
  write_json_file((out / "diff.json").string(), {{"added", edge_list(p.diff.added)}, {"removed", edge_list(p.diff.removed)}});
  std::cout << "|E+| = " << p.diff.added.size() << "  |E-| = " << p.diff.removed.size() << "\n"
            << "tree: " << (out / "tree.json").string() << "\n";
  return 0;
}

// ---------------------------------------------------------------- plot

int cmd_plot(const KeyValueConfig& cfg) {
  const fs::path out = cfg.get("out", "");
  const auto data = load_dataset(required(cfg, "data"));
  const fs::path pred_dir = required(cfg, "pred");
  auto samples = data.split(cfg.get("split", "test"));
  const auto limit = cfg.get_uint("limit", 0);
  if (limit > 0 && samples.size() > limit) samples.resize(limit);
  if (samples.empty()) throw std::runtime_error("no samples in split '" + cfg.get("split", "test") + "'");

  fs::create_directories(out);
  write_snapshot("plot", cfg);
  std::size_t written = 0, skipped = 0;
  for (const auto& s : samples) {
    const auto path = pred_dir / (s.id + ".json");
    Graph pred;
    try {
      pred = read_graph(path.string());
    } catch (const std::exception& e) {
      std::cerr << "warning: skipping " << s.id << ": " << e.what() << "\n";
      ++skipped;
      continue;
    }
    write_text_file((out / (s.id + ".svg")).string(), overlay_svg(s.graph, pred, tools::png_data_uri(s.image)));
    ++written;
  }
  std::cout << "plotted " << written << ", skipped " << skipped << " -> " << out.string() << "\n";
  return skipped == 0 ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Tree-constrained graph prediction: data generation, training, evaluation and plots."};
  app.require_subcommand(1);
  Invocation inv;

  auto common = [&](CLI::App* sub) {
    sub->add_option("--config", inv.config_path, "key = value settings file")->check(CLI::ExistingFile);
    sub->add_option("--set", inv.sets, "override any setting, key=value (repeatable)");
    sub->add_option_function<std::string>(
        "--out", [&](const std::string& v) { inv.overrides["out"] = v; }, "output directory (default $ARBOR_OUT/<command>)");
  };
  auto option = [&](CLI::App* sub, const std::string& flag, const std::string& key, const std::string& help) {
    return sub->add_option_function<std::string>(flag, [&inv, key](const std::string& v) { inv.overrides[key] = v; }, help);
  };
  auto flag = [&](CLI::App* sub, const std::string& name, const std::string& key, const std::string& help) {
    sub->add_flag_callback(name, [&inv, key]() { inv.overrides[key] = "true"; }, help);
  };
  const std::vector<std::string> modes{"unconstrained", "ttc", "sfs"};

  auto* gen = app.add_subcommand("gen", "generate a synthetic L-system dataset");
  common(gen);
  option(gen, "--profile", "profile", "standard | generalized | thickened | mini")
      ->check(CLI::IsMember({"standard", "generalized", "thickened", "mini"}));
  option(gen, "--seed", "seed", "master seed");
  option(gen, "--count", "count", "number of samples (80/10/10 split)");
  option(gen, "--rules", "rules", "L-system rule file (JSON)");
  flag(gen, "--force", "force", "replace a non-empty output directory");

  auto* train = app.add_subcommand("train", "train the edge predictor");
  common(train);
  option(train, "--data", "data", "dataset directory");
  option(train, "--mode", "mode", "unconstrained | ttc | sfs")->check(CLI::IsMember(modes));
  option(train, "--lambda", "lambda", "suppression magnitude");
  option(train, "--seed", "seed", "training seed");
  option(train, "--epochs", "epochs", "maximum epochs");
  flag(train, "--compare", "compare", "train and test all three modes with shared seeds");
  option(train, "--lambda-sweep", "lambda_sweep", "comma-separated suppression magnitudes to train with sfs");

  auto* eval = app.add_subcommand("eval", "evaluate a checkpoint on a dataset split");
  common(eval);
  option(eval, "--data", "data", "dataset directory");
  option(eval, "--checkpoint", "checkpoint", "checkpoint JSON");
  option(eval, "--mode", "mode", "inference mode (default: the checkpoint's)")->check(CLI::IsMember(modes));
  option(eval, "--lambda", "lambda", "suppression magnitude (default: the checkpoint's)");
  option(eval, "--seed", "smd_seed", "SMD sampling seed");
  option(eval, "--split", "split", "train | val | test");
  flag(eval, "--self-check", "self_check", "score the ground truth against itself");

  auto* project = app.add_subcommand("project", "project a graph or probability matrix onto its MST");
  common(project);
  project->add_option_function<std::string>(
      "input", [&](const std::string& v) { inv.overrides["input"] = v; }, "graph JSON or probability matrix JSON");

  auto* plot = app.add_subcommand("plot", "SVG overlays of predictions on ground truth");
  common(plot);
  option(plot, "--data", "data", "dataset directory");
  option(plot, "--pred", "pred", "directory of predicted graphs named <id>.json");
  option(plot, "--split", "split", "train | val | test");
  option(plot, "--limit", "limit", "plot at most this many samples");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }
  for (auto* sub : app.get_subcommands()) inv.command = sub->get_name();

  try {
    const auto cfg = resolve(inv);
    if (inv.command == "gen") return cmd_gen(cfg);
    if (inv.command == "train") return cmd_train(cfg);
    if (inv.command == "eval") return cmd_eval(cfg);
    if (inv.command == "project") return cmd_project(cfg);
    return cmd_plot(cfg);
  } catch (const UsageError& e) {
    std::cerr << "arbor " << inv.command << ": " << e.what() << "\n";
    return 2;
  } catch (const ConfigError& e) {
    std::cerr << "arbor " << inv.command << ": " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "arbor " << inv.command << ": " << e.what() << "\n";
    return 1;
  }
}
