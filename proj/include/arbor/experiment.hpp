#pragma once

#include <functional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "arbor/dataset.hpp"
#include "arbor/metrics.hpp"
#include "arbor/predictor.hpp"

namespace arbor::experiment {

struct Row {
  std::string name;
  predictor::TrainResult result;
  metrics::MetricReport report;
};

using Progress = std::function<void(const std::string& name, const predictor::EpochRecord&)>;

// Trains with `cfg`, then evaluates the best-validation model on `test`.
inline Row run(const std::string& name, const std::vector<Sample>& train, const std::vector<Sample>& val,
               const std::vector<Sample>& test, const predictor::TrainConfig& cfg,
               const metrics::EvalConfig& eval = {}, const Progress& progress = {}) {
  Row row{name, {}, {}};
  predictor::EpochCallback cb;
  if (progress) cb = [&](const predictor::EpochRecord& r) { progress(name, r); };
  row.result = predictor::train(train, val, cfg, cb);
  row.report = predictor::evaluate_model(row.result.params.mlp, test, cfg.mode, cfg.sfs, eval);
  return row;
}

// The three method rows (unconstrained, test-time constraint, sfs) with shared seeds.
inline std::vector<Row> compare_modes(const std::vector<Sample>& train, const std::vector<Sample>& val,
                                      const std::vector<Sample>& test, predictor::TrainConfig cfg,
                                      const metrics::EvalConfig& eval = {}, const Progress& progress = {}) {
  std::vector<Row> rows;
  for (auto mode : {predictor::Mode::unconstrained, predictor::Mode::test_time_constraint, predictor::Mode::sfs}) {
    cfg.mode = mode;
    rows.push_back(run(predictor::to_string(mode), train, val, test, cfg, eval, progress));
  }
  return rows;
}

// sfs training at each suppression magnitude.
inline std::vector<Row> lambda_sweep(const std::vector<Sample>& train, const std::vector<Sample>& val,
                                     const std::vector<Sample>& test, predictor::TrainConfig cfg,
                                     const std::vector<double>& lambdas, const metrics::EvalConfig& eval = {},
                                     const Progress& progress = {}) {
  std::vector<Row> rows;
  cfg.mode = predictor::Mode::sfs;
  for (double lambda : lambdas) {
    cfg.sfs.lambda = lambda;
    std::ostringstream name;
    name << "sfs lambda=" << lambda;
    rows.push_back(run(name.str(), train, val, test, cfg, eval, progress));
  }
  return rows;
}

inline std::string table(const std::vector<Row>& rows) {
  std::vector<std::pair<std::string, metrics::MetricReport>> t;
  for (const auto& r : rows) t.emplace_back(r.name, r.report);
  return metrics::format_table(t);
}

}  // namespace arbor::experiment
