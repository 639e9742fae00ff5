#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "sqlspace/discovery.hpp"
#include "sqlspace/forest.hpp"
#include "sqlspace/jsonl.hpp"
#include "sqlspace/matrix.hpp"

namespace sqlspace::estimator {

struct TrainOptions {
  int n_trees = 200;
  double train_split = 0.9;
  std::uint64_t seed = 0;
  bool online_only = false;
  int threads = 1;
};

struct CorrectnessModel {
  analytics::ForestModel forest;
  std::vector<std::string> predicate_ids;  // column binding, in matrix order
  bool online_only = false;
  double train_split = 0.9;
  std::vector<size_t> holdout_rows;               // indices into the training matrix
  std::vector<std::string> holdout_example_ids;   // parallel ids when provided
};

struct Metrics {
  double precision = 0.0;  // zero-division conventions: undefined ratios are 0
  double recall = 0.0;
  double f1 = 0.0;
  double accuracy = 0.0;
  size_t n_holdout = 0;
  bool holdout_empty = false;  // true → metrics were computed on the training rows
};

struct TrainResult {
  CorrectnessModel model;
  Metrics metrics;
};

/// Trains the correctness forest on a seeded train/holdout split of the rows.
/// online_only first restricts columns to predicates whose required inputs
/// are a subset of {question, schema}. Both classes must appear among the
/// training rows. When the holdout lands empty, metrics fall back to the
/// training rows with a warning.
TrainResult train_correctness(const Matrix& X, const std::vector<int>& y,
                              const std::vector<discovery::Predicate>& predicates,
                              const std::vector<std::string>& example_ids,
                              const TrainOptions& opts);

struct PredictOutcome {
  double probability = 0.0;
  int label = 0;  // probability >= 0.5
};

PredictOutcome predict_correct(const CorrectnessModel& model, const std::vector<double>& vec);
std::vector<PredictOutcome> predict_correct_all(const CorrectnessModel& model, const Matrix& X,
                                                int threads = 1);

struct ImportanceEntry {
  std::string predicate_id;
  double score = 0.0;
  size_t feature_index = 0;
};
using ImportanceRanking = std::vector<ImportanceEntry>;

/// Permutation importance scored as accuracy over the negative-label rows of
/// the given matrix (typically the holdout). Ranked by descending score with
/// ties broken by feature index. At least one negative row is required.
ImportanceRanking negative_permutation_importance(const CorrectnessModel& model, const Matrix& X,
                                                  const std::vector<int>& y, int repeats,
                                                  std::uint64_t seed, int threads = 1);

struct CalibrationBin {
  double mean_predicted = 0.0;
  double empirical_accuracy = 0.0;
  size_t count = 0;
};

/// Equal-width probability bins over [0,1]; empty bins are omitted.
std::vector<CalibrationBin> calibration_curve(const CorrectnessModel& model, const Matrix& X,
                                              const std::vector<int>& y, int bins = 10,
                                              int threads = 1);

json estimator_to_json(const CorrectnessModel& model);
CorrectnessModel estimator_from_json(const json& j);
json metrics_to_json(const Metrics& m);
json ranking_to_json(const ImportanceRanking& ranking);
ImportanceRanking ranking_from_json(const json& j);

}  // namespace sqlspace::estimator
