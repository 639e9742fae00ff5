#pragma once

#include <cstdint>
#include <vector>

#include "sqlspace/jsonl.hpp"
#include "sqlspace/matrix.hpp"

namespace sqlspace::analytics {

struct ForestOptions {
  int n_trees = 200;
  int max_depth = 0;         // 0 = unlimited
  int min_samples_split = 2;
  int min_samples_leaf = 1;
  int max_features = 0;      // 0 = floor(sqrt(d)), at least 1
  std::uint64_t seed = 0;
  int threads = 1;           // 1 = serial reference path
};

struct TreeNode {
  int feature = -1;          // -1 marks a leaf
  double threshold = 0.0;    // go left when x[feature] <= threshold
  int left = -1;
  int right = -1;
  double value = 0.0;        // positive-class fraction at the node
};

struct Tree {
  std::vector<TreeNode> nodes;  // node 0 is the root
};

struct ForestModel {
  ForestOptions options;
  size_t n_features = 0;
  std::vector<Tree> trees;
  std::vector<double> importances;  // mean decrease in impurity, per feature
};

/// Random forest of CART trees on binary labels. Trees bootstrap their rows
/// and scan a per-node shuffled feature order until `max_features`
/// non-constant candidates have been evaluated; splits need a Gini gain above
/// 1e-12 to count. Every tree draws from its own seed derived from
/// (opts.seed, tree index), so the result is bit-identical at any thread
/// count. Importances are each tree's impurity decreases normalized to sum
/// one, averaged across trees.
ForestModel forest_fit(const Matrix& X, const std::vector<int>& y, const ForestOptions& opts);

/// Fraction of trees whose leaf majority votes positive.
std::vector<double> forest_predict_proba(const ForestModel& model, const Matrix& X,
                                         int threads = 1);

/// Hard labels: probability >= 0.5.
std::vector<int> forest_predict(const ForestModel& model, const Matrix& X, int threads = 1);

json forest_to_json(const ForestModel& model);
ForestModel forest_from_json(const json& j);

/// Mean accuracy drop over `n_repeats` seeded column shuffles. Features no
/// tree ever split on are exactly 0 without any shuffling.
std::vector<double> permutation_importance(const ForestModel& model, const Matrix& X,
                                           const std::vector<int>& y, int n_repeats,
                                           std::uint64_t seed, int threads = 1);

}  // namespace sqlspace::analytics
