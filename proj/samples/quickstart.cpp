// Generates a small dataset in memory, trains the edge predictor with the MST
// projection in the loop, and scores it against the unconstrained baseline.
#include <iostream>

#include "arbor/dataset.hpp"
#include "arbor/experiment.hpp"
#include "arbor/sfs.hpp"

int main() {
  using namespace arbor;

  const auto samples = generate_samples(make_profile("mini"), {200, 30, 30}, 42);
  std::vector<Sample> train, val, test;
  for (const auto& s : samples) (s.split == "train" ? train : s.split == "val" ? val : test).push_back(s);

  // One prediction through the layer: the thresholded constrained output is a tree.
  const auto& s = test.front();
  const auto init = predictor::initialize(predictor::Architecture{}, 1);
  const auto logits = predictor::to_logits(init.mlp.forward(predictor::all_pair_features(s.image, s.graph)),
                                           s.graph.size());
  const auto out = sfs::forward(logits, sfs::Config{});
  std::cout << "untrained: |E+| = " << out.diff.added.size() << ", |E-| = " << out.diff.removed.size()
            << ", tree: " << std::boolalpha << is_tree(s.graph.size(), out.tree) << "\n\n";

  predictor::TrainConfig cfg;
  cfg.seed = 7;
  cfg.epochs = 15;
  const auto rows = experiment::compare_modes(train, val, test, cfg);
  std::cout << experiment::table(rows);
}
