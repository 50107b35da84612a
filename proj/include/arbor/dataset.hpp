#pragma once

#include <cstdint>
#include <filesystem>
#include <iomanip>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

#include "arbor/graph_io.hpp"
#include "arbor/image.hpp"
#include "arbor/lsystem.hpp"
#include "arbor/preprocess.hpp"
#include "arbor/raster.hpp"
#include "arbor/rng.hpp"

namespace arbor {

// Rasterised image plus its ground-truth graph.
struct Sample {
  std::string id;
  std::string split;
  std::uint64_t seed = 0;
  Image image;
  Graph graph;
};

struct Profile {
  std::string name;
  lsystem::GeomConfig geom;
};

// standard: 512^2, stroke 1, cap 100. generalized: 256^2, resampled at 13 px, cap 384.
// thickened: generalized geometry drawn with stroke 3 and fixed turn angles.
// mini: 128^2, cap 30, for quick experiments.
inline Profile make_profile(const std::string& name) {
  Profile p{name, {}};
  auto& g = p.geom;
  if (name == "standard") {
    g.canvas = {512, 512};
    g.base_length = 24.0;
    g.node_cap = 100;
  } else if (name == "generalized" || name == "thickened") {
    g.canvas = {256, 256};
    g.base_length = 20.0;
    g.node_cap = 384;
    g.resample_interval = 13.0;
    if (name == "thickened") {
      g.stroke = 3;
      g.fixed_angle = true;
    }
  } else if (name == "mini") {
    g.canvas = {128, 128};
    g.base_length = 10.0;
    g.node_cap = 30;
  } else {
    throw std::invalid_argument("unknown profile '" + name + "' (standard, generalized, thickened, mini)");
  }
  return p;
}

inline constexpr int kMaxRetries = 100;

class RetryExhausted : public std::runtime_error {
 public:
  RetryExhausted(const std::string& what, std::uint64_t seed) : std::runtime_error(what), seed_(seed) {}
  std::uint64_t seed() const { return seed_; }

 private:
  std::uint64_t seed_;
};

// Shortest keypoint-to-keypoint arc length; infinity for graphs without chains.
inline double shortest_chain(const Graph& g) {
  double best = std::numeric_limits<double>::infinity();
  for (const auto& chain : keypoint_chains(g)) {
    Polyline line;
    for (int v : chain) line.push_back(g.pos(v));
    best = std::min(best, arc_length(line));
  }
  return best;
}

// One sample from its own seed. A draw is rejected and redrawn (same random stream)
// when it exceeds the node cap or, for resampled profiles, has a chain shorter than half
// the interval (such a chain cannot be expressed at that spacing).
inline Sample generate_sample(const Profile& profile, const lsystem::RuleSet& rules, std::uint64_t seed) {
  const auto& geom = profile.geom;
  geom.check();
  rules.check();
  Rng rng(seed);
  for (int attempt = 0; attempt < kMaxRetries; ++attempt) {
    const auto& axiom = rules.axioms[std::size_t(rng.below(rules.axioms.size()))];
    auto seq = lsystem::parse(axiom, 0);
    const int iterations = geom.max_iterations > 0 ? rng.between(1, geom.max_iterations) : 0;
    for (int it = 0; it < iterations; ++it) seq = lsystem::rewrite(seq, rules.productions, rng);
    auto g = lsystem::interpret(seq, geom, rng);
    if (!g) continue;
    if (geom.resample_interval > 0.0) {
      if (shortest_chain(*g) < 0.5 * geom.resample_interval) continue;
      g = resample_graph(*g, geom.resample_interval);
      if (int(g->size()) > geom.node_cap) continue;
    }
    Sample s;
    s.seed = seed;
    s.graph = std::move(*g);
    s.image = rasterize(s.graph, geom.stroke);
    return s;
  }
  throw RetryExhausted("sample generation gave up after " + std::to_string(kMaxRetries) + " retries (seed " +
                           std::to_string(seed) + ")",
                       seed);
}

struct SplitCounts {
  int train = 0;
  int val = 0;
  int test = 0;

  int total() const { return train + val + test; }

  // 80 / 10 / 10 with the remainder going to train.
  static SplitCounts from_total(int count) {
    SplitCounts s;
    s.val = count / 10;
    s.test = count / 10;
    s.train = count - s.val - s.test;
    return s;
  }
};

inline std::string sample_id(int index) {
  std::ostringstream os;
  os << std::setw(6) << std::setfill('0') << index;
  return os.str();
}

// Samples in index order: train first, then val, then test. Per-sample seeds are
// derived from the master seed by counter.
inline std::vector<Sample> generate_samples(const Profile& profile, SplitCounts counts, std::uint64_t seed,
                                            const lsystem::RuleSet& rules = lsystem::default_rules()) {
  if (counts.total() < 1) throw std::invalid_argument("generate_samples: count must be >= 1");
  std::vector<Sample> out;
  out.reserve(std::size_t(counts.total()));
  for (int k = 0; k < counts.total(); ++k) {
    Sample s = generate_sample(profile, rules, derive_seed(seed, std::uint64_t(k)));
    s.id = sample_id(k);
    s.split = k < counts.train ? "train" : k < counts.train + counts.val ? "val" : "test";
    out.push_back(std::move(s));
  }
  return out;
}

inline nlohmann::json manifest_json(const Profile& profile, std::uint64_t seed, const std::vector<Sample>& samples) {
  nlohmann::json list = nlohmann::json::array();
  for (const auto& s : samples)
    list.push_back({{"id", s.id},
                    {"image", "images/" + s.id + ".pgm"},
                    {"graph", "graphs/" + s.id + ".json"},
                    {"split", s.split},
                    {"seed", s.seed}});
  const auto& g = profile.geom;
  return {{"profile", profile.name},
          {"seed", seed},
          {"canvas", {g.canvas.width, g.canvas.height}},
          {"node_cap", g.node_cap},
          {"stroke", g.stroke},
          {"resample_interval", g.resample_interval},
          {"samples", list}};
}

// Writes images/, graphs/ and manifest.json under dir.
inline std::string write_dataset(const std::string& dir, const Profile& profile, std::uint64_t seed,
                                 const std::vector<Sample>& samples) {
  namespace fs = std::filesystem;
  fs::create_directories(fs::path(dir) / "images");
  fs::create_directories(fs::path(dir) / "graphs");
  for (const auto& s : samples) {
    write_pgm((fs::path(dir) / "images" / (s.id + ".pgm")).string(), s.image);
    write_graph((fs::path(dir) / "graphs" / (s.id + ".json")).string(), s.graph);
  }
  const auto manifest = (fs::path(dir) / "manifest.json").string();
  write_json_file(manifest, manifest_json(profile, seed, samples));
  return manifest;
}

inline std::string generate_dataset(const std::string& dir, const std::string& profile, int count, std::uint64_t seed) {
  const auto p = make_profile(profile);
  return write_dataset(dir, p, seed, generate_samples(p, SplitCounts::from_total(count), seed));
}

struct Dataset {
  std::string root;
  nlohmann::json manifest;
  std::vector<Sample> samples;

  std::vector<Sample> split(const std::string& name) const {
    std::vector<Sample> out;
    for (const auto& s : samples)
      if (s.split == name) out.push_back(s);
    return out;
  }
};

class ManifestError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Loads a dataset directory (or a manifest path) written by write_dataset.
inline Dataset load_dataset(const std::string& path) {
  namespace fs = std::filesystem;
  fs::path manifest = path;
  if (fs::is_directory(manifest)) manifest /= "manifest.json";
  Dataset d;
  d.root = manifest.parent_path().string();
  try {
    d.manifest = read_json_file(manifest.string());
    for (const auto& e : d.manifest.at("samples")) {
      Sample s;
      s.id = e.at("id").get<std::string>();
      s.split = e.at("split").get<std::string>();
      s.seed = e.at("seed").get<std::uint64_t>();
      s.image = read_pgm((manifest.parent_path() / e.at("image").get<std::string>()).string());
      s.graph = read_graph((manifest.parent_path() / e.at("graph").get<std::string>()).string());
      d.samples.push_back(std::move(s));
    }
  } catch (const std::exception& e) {
    throw ManifestError("corrupt dataset manifest " + manifest.string() + ": " + e.what());
  }
  return d;
}

}  // namespace arbor
