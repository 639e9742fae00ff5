#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <numeric>

#include "sqlspace/forest.hpp"
#include "sqlspace/rng.hpp"

using namespace sqlspace;
using namespace sqlspace::analytics;

namespace {

struct Synthetic {
  Matrix X;
  std::vector<int> y;
};

/// Binary features where y depends on a couple of planted columns plus noise.
Synthetic planted_problem(size_t n, size_t d, std::uint64_t seed, double flip = 0.0) {
  Rng rng(seed);
  Synthetic s;
  s.X = Matrix(n, d);
  s.y.resize(n);
  for (size_t i = 0; i < n; ++i) {
    for (size_t j = 0; j < d; ++j) s.X.at(i, j) = rng.unit() < 0.5 ? 1.0 : 0.0;
    int label = (s.X.at(i, 0) > 0.5 && s.X.at(i, 1) > 0.5) || s.X.at(i, 2) > 0.5 ? 1 : 0;
    if (flip > 0.0 && rng.unit() < flip) label = 1 - label;
    s.y[i] = label;
  }
  return s;
}

double accuracy(const std::vector<int>& pred, const std::vector<int>& truth) {
  size_t hits = 0;
  for (size_t i = 0; i < pred.size(); ++i) hits += pred[i] == truth[i];
  return static_cast<double>(hits) / static_cast<double>(pred.size());
}

}  // namespace

TEST_CASE("forest reaches high holdout accuracy on a separable problem") {
  const Synthetic train = planted_problem(1200, 20, 1);
  const Synthetic test = planted_problem(400, 20, 2);
  ForestOptions opts;
  opts.n_trees = 60;
  opts.seed = 7;
  const ForestModel model = forest_fit(train.X, train.y, opts);
  CHECK(accuracy(forest_predict(model, test.X), test.y) >= 0.95);
}

TEST_CASE("probabilities are tree-vote fractions in [0,1] consistent with labels") {
  const Synthetic s = planted_problem(300, 10, 3, 0.1);
  ForestOptions opts;
  opts.n_trees = 25;
  opts.seed = 11;
  const ForestModel model = forest_fit(s.X, s.y, opts);
  const std::vector<double> proba = forest_predict_proba(model, s.X);
  const std::vector<int> pred = forest_predict(model, s.X);
  REQUIRE(proba.size() == s.X.rows);
  for (size_t i = 0; i < proba.size(); ++i) {
    CHECK(proba[i] >= 0.0);
    CHECK(proba[i] <= 1.0);
    CHECK(pred[i] == (proba[i] >= 0.5 ? 1 : 0));
  }
}

TEST_CASE("training is bit-identical across thread counts") {
  const Synthetic s = planted_problem(400, 15, 5, 0.05);
  ForestOptions opts;
  opts.n_trees = 30;
  opts.seed = 13;
  opts.threads = 1;
  const ForestModel serial = forest_fit(s.X, s.y, opts);
  opts.threads = 4;
  const ForestModel parallel = forest_fit(s.X, s.y, opts);

  REQUIRE(serial.trees.size() == parallel.trees.size());
  for (size_t t = 0; t < serial.trees.size(); ++t) {
    const auto& a = serial.trees[t].nodes;
    const auto& b = parallel.trees[t].nodes;
    REQUIRE(a.size() == b.size());
    for (size_t n = 0; n < a.size(); ++n) {
      CHECK(a[n].feature == b[n].feature);
      CHECK(a[n].threshold == b[n].threshold);
      CHECK(a[n].left == b[n].left);
      CHECK(a[n].right == b[n].right);
      CHECK(a[n].value == b[n].value);
    }
  }
  CHECK(serial.importances == parallel.importances);
  CHECK(forest_predict_proba(serial, s.X, 1) == forest_predict_proba(parallel, s.X, 4));
}

TEST_CASE("planted signal dominates permutation importance") {
  const Synthetic s = planted_problem(800, 12, 17, 0.02);
  ForestOptions opts;
  opts.n_trees = 40;
  opts.seed = 19;
  const ForestModel model = forest_fit(s.X, s.y, opts);
  const std::vector<double> imp = permutation_importance(model, s.X, s.y, 5, 23);
  REQUIRE(imp.size() == s.X.cols);

  // Column 2 flips the label on its own half the time; it must rank first.
  const size_t top = static_cast<size_t>(
      std::max_element(imp.begin(), imp.end()) - imp.begin());
  CHECK(top == 2);
  // The planted AND-pair must beat every noise column.
  double best_noise = 0.0;
  for (size_t j = 3; j < imp.size(); ++j) best_noise = std::max(best_noise, imp[j]);
  CHECK(imp[0] > best_noise);
  CHECK(imp[1] > best_noise);
}

TEST_CASE("features never split on have exactly zero permutation importance") {
  // Constant columns can never be chosen as splits.
  Synthetic s = planted_problem(200, 6, 29);
  for (size_t i = 0; i < s.X.rows; ++i) {
    s.X.at(i, 4) = 1.0;
    s.X.at(i, 5) = 0.0;
  }
  ForestOptions opts;
  opts.n_trees = 20;
  opts.seed = 31;
  const ForestModel model = forest_fit(s.X, s.y, opts);
  for (const Tree& tree : model.trees) {
    for (const TreeNode& node : tree.nodes) {
      CHECK(node.feature != 4);
      CHECK(node.feature != 5);
    }
  }
  const std::vector<double> imp = permutation_importance(model, s.X, s.y, 3, 37);
  CHECK(imp[4] == 0.0);
  CHECK(imp[5] == 0.0);
  CHECK(model.importances[4] == 0.0);
  CHECK(model.importances[5] == 0.0);
}

TEST_CASE("permutation importance is deterministic in its seed") {
  const Synthetic s = planted_problem(300, 8, 41, 0.05);
  ForestOptions opts;
  opts.n_trees = 15;
  opts.seed = 43;
  const ForestModel model = forest_fit(s.X, s.y, opts);
  const auto a = permutation_importance(model, s.X, s.y, 4, 47, 1);
  const auto b = permutation_importance(model, s.X, s.y, 4, 47, 4);
  CHECK(a == b);
  const auto c = permutation_importance(model, s.X, s.y, 4, 48);
  CHECK(a != c);
}

TEST_CASE("serialized model reloads to bit-identical predictions") {
  const Synthetic s = planted_problem(250, 10, 53, 0.1);
  ForestOptions opts;
  opts.n_trees = 18;
  opts.seed = 59;
  const ForestModel model = forest_fit(s.X, s.y, opts);
  const ForestModel reloaded = forest_from_json(forest_to_json(model));

  CHECK(reloaded.n_features == model.n_features);
  CHECK(reloaded.options.n_trees == model.options.n_trees);
  CHECK(reloaded.options.seed == model.options.seed);
  CHECK(reloaded.importances == model.importances);
  REQUIRE(reloaded.trees.size() == model.trees.size());
  CHECK(forest_predict_proba(reloaded, s.X) == forest_predict_proba(model, s.X));

  // Round-tripping through the serialized text again changes nothing.
  const json once = forest_to_json(model);
  const json twice = forest_to_json(forest_from_json(once));
  CHECK(once.dump() == twice.dump());
}

TEST_CASE("impurity importances are normalized and concentrated on the signal") {
  const Synthetic s = planted_problem(600, 10, 61);
  ForestOptions opts;
  opts.n_trees = 30;
  opts.seed = 67;
  const ForestModel model = forest_fit(s.X, s.y, opts);
  const double total = std::accumulate(model.importances.begin(), model.importances.end(), 0.0);
  CHECK(total == doctest::Approx(1.0).epsilon(1e-9));
  const double signal = model.importances[0] + model.importances[1] + model.importances[2];
  CHECK(signal > 0.5);
}

TEST_CASE("degenerate training inputs are rejected") {
  Matrix X(4, 2);
  std::vector<int> y = {0, 1, 0};
  ForestOptions opts;
  CHECK_THROWS_AS(forest_fit(X, y, opts), Error);  // size mismatch
  y = {0, 1, 0, 2};
  CHECK_THROWS_AS(forest_fit(X, y, opts), Error);  // non-binary label
  Matrix empty(0, 2);
  CHECK_THROWS_AS(forest_fit(empty, {}, opts), Error);
}

TEST_CASE("single-class training yields constant predictions") {
  const Synthetic s = planted_problem(50, 5, 71);
  std::vector<int> ones(50, 1);
  ForestOptions opts;
  opts.n_trees = 10;
  opts.seed = 73;
  const ForestModel model = forest_fit(s.X, ones, opts);
  for (double p : forest_predict_proba(model, s.X)) CHECK(p == 1.0);
}
