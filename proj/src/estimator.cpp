#include "sqlspace/estimator.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "sqlspace/aspects.hpp"
#include "sqlspace/common.hpp"
#include "sqlspace/rng.hpp"

namespace sqlspace::estimator {

namespace {

Metrics compute_metrics(const std::vector<int>& pred, const std::vector<int>& truth) {
  size_t tp = 0, fp = 0, tn = 0, fn = 0;
  for (size_t i = 0; i < pred.size(); ++i) {
    if (truth[i] == 1) {
      pred[i] == 1 ? ++tp : ++fn;
    } else {
      pred[i] == 1 ? ++fp : ++tn;
    }
  }
  Metrics m;
  m.n_holdout = pred.size();
  m.precision = (tp + fp) > 0 ? static_cast<double>(tp) / static_cast<double>(tp + fp) : 0.0;
  m.recall = (tp + fn) > 0 ? static_cast<double>(tp) / static_cast<double>(tp + fn) : 0.0;
  m.f1 = (m.precision + m.recall) > 0.0
             ? 2.0 * m.precision * m.recall / (m.precision + m.recall)
             : 0.0;
  m.accuracy = pred.empty() ? 0.0
                            : static_cast<double>(tp + tn) / static_cast<double>(pred.size());
  return m;
}

}  // namespace

TrainResult train_correctness(const Matrix& X, const std::vector<int>& y,
                              const std::vector<discovery::Predicate>& predicates,
                              const std::vector<std::string>& example_ids,
                              const TrainOptions& opts) {
  if (X.rows == 0) fail("estimator: empty feature matrix");
  if (y.size() != X.rows) fail("estimator: label/row mismatch");
  if (predicates.size() != X.cols) {
    fail("estimator: predicate count ", predicates.size(), " != matrix columns ", X.cols);
  }
  if (!example_ids.empty() && example_ids.size() != X.rows) {
    fail("estimator: example id count ", example_ids.size(), " != rows ", X.rows);
  }
  if (opts.train_split <= 0.0 || opts.train_split > 1.0) {
    fail("estimator: train_split must be in (0, 1], got ", opts.train_split);
  }

  // Column restriction for the online (question+schema only) configuration.
  std::vector<size_t> cols;
  std::vector<std::string> kept_ids;
  for (size_t c = 0; c < predicates.size(); ++c) {
    if (!opts.online_only || is_online(predicates[c].required_inputs)) {
      cols.push_back(c);
      kept_ids.push_back(predicates[c].id);
    }
  }
  if (cols.empty()) fail("estimator: no usable feature columns after online restriction");
  const Matrix Xc = cols.size() == X.cols ? X : X.select_cols(cols);

  // Seeded split: shuffle row indices once, take the leading fraction — the
  // same recipe at the same seed always yields the same split.
  std::vector<size_t> order(X.rows);
  std::iota(order.begin(), order.end(), size_t{0});
  Rng rng(derive_seed(opts.seed, 0x5b17));
  rng.shuffle(order);
  const size_t n_train =
      std::min(X.rows, static_cast<size_t>(std::floor(opts.train_split * static_cast<double>(X.rows))));
  std::vector<size_t> train_rows(order.begin(), order.begin() + static_cast<long>(n_train));
  std::vector<size_t> holdout_rows(order.begin() + static_cast<long>(n_train), order.end());
  if (train_rows.empty()) fail("estimator: training split is empty");

  std::vector<int> y_train;
  y_train.reserve(train_rows.size());
  bool has_pos = false, has_neg = false;
  for (size_t r : train_rows) {
    y_train.push_back(y[r]);
    (y[r] != 0 ? has_pos : has_neg) = true;
  }
  if (!has_pos || !has_neg) {
    fail("estimator: training rows contain a single class; both correct and incorrect "
         "examples are required");
  }

  analytics::ForestOptions fopts;
  fopts.n_trees = opts.n_trees;
  fopts.seed = derive_seed(opts.seed, 0xf03e57);
  fopts.threads = opts.threads;

  TrainResult result;
  result.model.forest = analytics::forest_fit(Xc.select_rows(train_rows), y_train, fopts);
  result.model.predicate_ids = std::move(kept_ids);
  result.model.online_only = opts.online_only;
  result.model.train_split = opts.train_split;
  result.model.holdout_rows = holdout_rows;
  if (!example_ids.empty()) {
    for (size_t r : holdout_rows) result.model.holdout_example_ids.push_back(example_ids[r]);
  }

  std::vector<size_t> eval_rows = holdout_rows;
  if (eval_rows.empty()) {
    log_warn("estimator: holdout split is empty; reporting metrics on the training rows");
    eval_rows = train_rows;
  }
  std::vector<int> y_eval;
  for (size_t r : eval_rows) y_eval.push_back(y[r]);
  const std::vector<int> pred =
      analytics::forest_predict(result.model.forest, Xc.select_rows(eval_rows), opts.threads);
  result.metrics = compute_metrics(pred, y_eval);
  result.metrics.holdout_empty = holdout_rows.empty();
  return result;
}

PredictOutcome predict_correct(const CorrectnessModel& model, const std::vector<double>& vec) {
  if (vec.size() != model.forest.n_features) {
    fail("estimator: vector dimension ", vec.size(), " != model features ",
         model.forest.n_features);
  }
  Matrix X;
  X.rows = 1;
  X.cols = vec.size();
  X.data = vec;
  const std::vector<double> proba = analytics::forest_predict_proba(model.forest, X, 1);
  PredictOutcome out;
  out.probability = proba[0];
  out.label = out.probability >= 0.5 ? 1 : 0;
  return out;
}

std::vector<PredictOutcome> predict_correct_all(const CorrectnessModel& model, const Matrix& X,
                                                int threads) {
  const std::vector<double> proba = analytics::forest_predict_proba(model.forest, X, threads);
  std::vector<PredictOutcome> out(proba.size());
  for (size_t i = 0; i < proba.size(); ++i) {
    out[i].probability = proba[i];
    out[i].label = proba[i] >= 0.5 ? 1 : 0;
  }
  return out;
}

ImportanceRanking negative_permutation_importance(const CorrectnessModel& model, const Matrix& X,
                                                  const std::vector<int>& y, int repeats,
                                                  std::uint64_t seed, int threads) {
  if (y.size() != X.rows) fail("importance: label/row mismatch");
  std::vector<size_t> neg;
  for (size_t i = 0; i < y.size(); ++i) {
    if (y[i] == 0) neg.push_back(i);
  }
  if (neg.empty()) fail("importance: no negative-label rows to score against");

  const Matrix Xneg = X.select_rows(neg);
  const std::vector<int> yneg(neg.size(), 0);
  const std::vector<double> scores =
      analytics::permutation_importance(model.forest, Xneg, yneg, repeats, seed, threads);

  ImportanceRanking ranking(scores.size());
  for (size_t f = 0; f < scores.size(); ++f) {
    ranking[f].predicate_id = model.predicate_ids[f];
    ranking[f].score = scores[f];
    ranking[f].feature_index = f;
  }
  std::stable_sort(ranking.begin(), ranking.end(), [](const auto& a, const auto& b) {
    if (a.score != b.score) return a.score > b.score;
    return a.feature_index < b.feature_index;
  });
  return ranking;
}

std::vector<CalibrationBin> calibration_curve(const CorrectnessModel& model, const Matrix& X,
                                              const std::vector<int>& y, int bins, int threads) {
  if (X.rows == 0) fail("calibration: empty data");
  if (y.size() != X.rows) fail("calibration: label/row mismatch");
  if (bins <= 0) fail("calibration: bins must be positive");

  const std::vector<double> proba = analytics::forest_predict_proba(model.forest, X, threads);
  std::vector<double> prob_sum(static_cast<size_t>(bins), 0.0);
  std::vector<double> label_sum(static_cast<size_t>(bins), 0.0);
  std::vector<size_t> count(static_cast<size_t>(bins), 0);
  for (size_t i = 0; i < proba.size(); ++i) {
    int b = static_cast<int>(proba[i] * bins);
    if (b >= bins) b = bins - 1;  // probability 1.0 lands in the top bin
    prob_sum[static_cast<size_t>(b)] += proba[i];
    label_sum[static_cast<size_t>(b)] += y[i];
    ++count[static_cast<size_t>(b)];
  }
  std::vector<CalibrationBin> out;
  for (int b = 0; b < bins; ++b) {
    const size_t n = count[static_cast<size_t>(b)];
    if (n == 0) continue;
    CalibrationBin bin;
    bin.count = n;
    bin.mean_predicted = prob_sum[static_cast<size_t>(b)] / static_cast<double>(n);
    bin.empirical_accuracy = label_sum[static_cast<size_t>(b)] / static_cast<double>(n);
    out.push_back(bin);
  }
  return out;
}

json estimator_to_json(const CorrectnessModel& model) {
  json j;
  j["forest"] = analytics::forest_to_json(model.forest);
  j["predicate_ids"] = model.predicate_ids;
  j["online_only"] = model.online_only;
  j["train_split"] = model.train_split;
  j["holdout_rows"] = model.holdout_rows;
  j["holdout_example_ids"] = model.holdout_example_ids;
  return j;
}

CorrectnessModel estimator_from_json(const json& j) {
  CorrectnessModel model;
  model.forest = analytics::forest_from_json(j.at("forest"));
  model.predicate_ids = j.at("predicate_ids").get<std::vector<std::string>>();
  model.online_only = j.at("online_only").get<bool>();
  model.train_split = j.at("train_split").get<double>();
  model.holdout_rows = j.at("holdout_rows").get<std::vector<size_t>>();
  model.holdout_example_ids = j.at("holdout_example_ids").get<std::vector<std::string>>();
  if (model.predicate_ids.size() != model.forest.n_features) {
    fail("estimator model: predicate binding does not match forest width");
  }
  return model;
}

json metrics_to_json(const Metrics& m) {
  json j;
  j["precision"] = m.precision;
  j["recall"] = m.recall;
  j["f1"] = m.f1;
  j["accuracy"] = m.accuracy;
  j["n_holdout"] = m.n_holdout;
  j["holdout_empty"] = m.holdout_empty;
  return j;
}

json ranking_to_json(const ImportanceRanking& ranking) {
  json arr = json::array();
  for (const auto& e : ranking) {
    arr.push_back(json{{"predicate_id", e.predicate_id},
                       {"score", e.score},
                       {"feature_index", e.feature_index}});
  }
  return arr;
}

ImportanceRanking ranking_from_json(const json& j) {
  ImportanceRanking out;
  for (const auto& e : j) {
    ImportanceEntry entry;
    entry.predicate_id = e.at("predicate_id").get<std::string>();
    entry.score = e.at("score").get<double>();
    entry.feature_index = e.at("feature_index").get<size_t>();
    out.push_back(std::move(entry));
  }
  return out;
}

}  // namespace sqlspace::estimator
