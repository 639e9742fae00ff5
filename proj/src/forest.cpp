#include "sqlspace/forest.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "sqlspace/common.hpp"
#include "sqlspace/parallel.hpp"
#include "sqlspace/rng.hpp"

namespace sqlspace::analytics {

namespace {

constexpr double kMinGain = 1e-12;

double gini(size_t pos, size_t n) {
  if (n == 0) return 0.0;
  const double p = static_cast<double>(pos) / static_cast<double>(n);
  return 1.0 - p * p - (1.0 - p) * (1.0 - p);
}

struct TreeBuilder {
  const Matrix& X;
  const std::vector<int>& y;
  const ForestOptions& opts;
  size_t n_total;
  int max_features;
  Rng& rng;
  Tree tree;
  std::vector<double> raw_importance;  // impurity decrease weighted by node size
  std::vector<size_t> feature_order;

  TreeBuilder(const Matrix& x, const std::vector<int>& labels, const ForestOptions& o,
              int mf, Rng& r)
      : X(x), y(labels), opts(o), n_total(0), max_features(mf), rng(r) {
    raw_importance.assign(X.cols, 0.0);
    feature_order.resize(X.cols);
  }

  int build(std::vector<size_t>& idx, int depth) {
    const size_t n = idx.size();
    size_t pos = 0;
    for (size_t i : idx) pos += static_cast<size_t>(y[i] != 0);

    const int node_id = static_cast<int>(tree.nodes.size());
    tree.nodes.emplace_back();
    tree.nodes[static_cast<size_t>(node_id)].value =
        static_cast<double>(pos) / static_cast<double>(n);

    const double impurity = gini(pos, n);
    const bool can_split = impurity > 0.0 &&
                           n >= static_cast<size_t>(opts.min_samples_split) &&
                           (opts.max_depth == 0 || depth < opts.max_depth);
    if (!can_split) return node_id;

    // Scan features in a fresh shuffled order, skipping constants, until
    // max_features candidates have been evaluated.
    std::iota(feature_order.begin(), feature_order.end(), size_t{0});
    rng.shuffle(feature_order);
    std::vector<size_t> order = feature_order;  // recursion below reuses the scratch buffer

    int best_feature = -1;
    double best_threshold = 0.0;
    double best_gain = kMinGain;
    int evaluated = 0;

    std::vector<std::pair<double, int>> vals;
    for (size_t f : order) {
      if (evaluated >= max_features) break;
      vals.clear();
      vals.reserve(n);
      for (size_t i : idx) vals.emplace_back(X.at(i, f), y[i]);
      std::sort(vals.begin(), vals.end(),
                [](const auto& a, const auto& b) { return a.first < b.first; });
      if (vals.front().first == vals.back().first) continue;  // constant here
      ++evaluated;

      size_t left_pos = 0;
      for (size_t i = 0; i + 1 < n; ++i) {
        left_pos += static_cast<size_t>(vals[i].second != 0);
        if (vals[i].first == vals[i + 1].first) continue;
        const size_t nl = i + 1;
        const size_t nr = n - nl;
        if (nl < static_cast<size_t>(opts.min_samples_leaf) ||
            nr < static_cast<size_t>(opts.min_samples_leaf)) {
          continue;
        }
        const double gain = impurity -
                            (static_cast<double>(nl) / static_cast<double>(n)) * gini(left_pos, nl) -
                            (static_cast<double>(nr) / static_cast<double>(n)) *
                                gini(pos - left_pos, nr);
        if (gain > best_gain) {
          best_gain = gain;
          best_feature = static_cast<int>(f);
          best_threshold = (vals[i].first + vals[i + 1].first) / 2.0;
        }
      }
    }

    if (best_feature < 0) return node_id;

    raw_importance[static_cast<size_t>(best_feature)] +=
        (static_cast<double>(n) / static_cast<double>(n_total)) * best_gain;

    std::vector<size_t> left_idx, right_idx;
    left_idx.reserve(n);
    right_idx.reserve(n);
    for (size_t i : idx) {
      if (X.at(i, static_cast<size_t>(best_feature)) <= best_threshold) {
        left_idx.push_back(i);
      } else {
        right_idx.push_back(i);
      }
    }
    idx.clear();
    idx.shrink_to_fit();

    const int left = build(left_idx, depth + 1);
    const int right = build(right_idx, depth + 1);
    tree.nodes[static_cast<size_t>(node_id)].feature = best_feature;
    tree.nodes[static_cast<size_t>(node_id)].threshold = best_threshold;
    tree.nodes[static_cast<size_t>(node_id)].left = left;
    tree.nodes[static_cast<size_t>(node_id)].right = right;
    return node_id;
  }
};

double tree_leaf_value(const Tree& tree, const double* row) {
  int node = 0;
  while (tree.nodes[static_cast<size_t>(node)].feature >= 0) {
    const TreeNode& n = tree.nodes[static_cast<size_t>(node)];
    node = row[n.feature] <= n.threshold ? n.left : n.right;
  }
  return tree.nodes[static_cast<size_t>(node)].value;
}

}  // namespace

ForestModel forest_fit(const Matrix& X, const std::vector<int>& y, const ForestOptions& opts) {
  if (X.rows == 0 || X.cols == 0) fail("forest: empty training matrix");
  if (y.size() != X.rows) fail("forest: label count ", y.size(), " != row count ", X.rows);
  for (int v : y) {
    if (v != 0 && v != 1) fail("forest: labels must be 0/1, got ", v);
  }
  if (opts.n_trees <= 0) fail("forest: n_trees must be positive, got ", opts.n_trees);

  int max_features = opts.max_features;
  if (max_features <= 0) {
    max_features = std::max(1, static_cast<int>(std::sqrt(static_cast<double>(X.cols))));
  }
  max_features = std::min(max_features, static_cast<int>(X.cols));

  ForestModel model;
  model.options = opts;
  model.options.max_features = max_features;
  model.n_features = X.cols;
  model.trees.resize(static_cast<size_t>(opts.n_trees));

  std::vector<std::vector<double>> per_tree_importance(
      static_cast<size_t>(opts.n_trees));

  // Each slot depends only on its own derived seed, so the parallel fill is
  // bit-identical to the serial one.
  parallel_for_indexed(static_cast<size_t>(opts.n_trees), opts.threads, [&](size_t t) {
    Rng rng(derive_seed(opts.seed, 0x7472, static_cast<std::uint64_t>(t)));
    std::vector<size_t> idx(X.rows);
    for (size_t i = 0; i < X.rows; ++i) idx[i] = rng.below(X.rows);  // bootstrap

    TreeBuilder builder(X, y, model.options, max_features, rng);
    builder.n_total = X.rows;
    builder.build(idx, 0);

    // Normalize this tree's impurity decreases to sum one before averaging.
    double total = 0.0;
    for (double v : builder.raw_importance) total += v;
    if (total > 0.0) {
      for (double& v : builder.raw_importance) v /= total;
    }
    per_tree_importance[t] = std::move(builder.raw_importance);
    model.trees[t] = std::move(builder.tree);
  });

  model.importances.assign(X.cols, 0.0);
  for (const auto& imp : per_tree_importance) {
    for (size_t f = 0; f < X.cols; ++f) model.importances[f] += imp[f];
  }
  for (double& v : model.importances) v /= static_cast<double>(opts.n_trees);
  return model;
}

std::vector<double> forest_predict_proba(const ForestModel& model, const Matrix& X,
                                         int threads) {
  if (X.cols != model.n_features) {
    fail("forest: feature count mismatch (", X.cols, " vs ", model.n_features, ")");
  }
  std::vector<double> proba(X.rows, 0.0);
  parallel_for_indexed(X.rows, threads, [&](size_t i) {
    size_t votes = 0;
    for (const Tree& tree : model.trees) {
      if (tree_leaf_value(tree, X.row(i)) >= 0.5) ++votes;
    }
    proba[i] = static_cast<double>(votes) / static_cast<double>(model.trees.size());
  });
  return proba;
}

std::vector<int> forest_predict(const ForestModel& model, const Matrix& X, int threads) {
  const std::vector<double> proba = forest_predict_proba(model, X, threads);
  std::vector<int> labels(proba.size());
  for (size_t i = 0; i < proba.size(); ++i) labels[i] = proba[i] >= 0.5 ? 1 : 0;
  return labels;
}

json forest_to_json(const ForestModel& model) {
  json j;
  j["n_trees"] = model.options.n_trees;
  j["max_depth"] = model.options.max_depth;
  j["min_samples_split"] = model.options.min_samples_split;
  j["min_samples_leaf"] = model.options.min_samples_leaf;
  j["max_features"] = model.options.max_features;
  j["seed"] = model.options.seed;
  j["n_features"] = model.n_features;
  j["importances"] = model.importances;
  j["trees"] = json::array();
  for (const Tree& tree : model.trees) {
    json nodes = json::array();
    for (const TreeNode& n : tree.nodes) {
      nodes.push_back(json::array({n.feature, n.threshold, n.left, n.right, n.value}));
    }
    j["trees"].push_back(std::move(nodes));
  }
  return j;
}

ForestModel forest_from_json(const json& j) {
  ForestModel model;
  model.options.n_trees = j.at("n_trees").get<int>();
  model.options.max_depth = j.at("max_depth").get<int>();
  model.options.min_samples_split = j.at("min_samples_split").get<int>();
  model.options.min_samples_leaf = j.at("min_samples_leaf").get<int>();
  model.options.max_features = j.at("max_features").get<int>();
  model.options.seed = j.at("seed").get<std::uint64_t>();
  model.n_features = j.at("n_features").get<size_t>();
  model.importances = j.at("importances").get<std::vector<double>>();
  for (const auto& tnodes : j.at("trees")) {
    Tree tree;
    for (const auto& n : tnodes) {
      if (n.size() != 5) fail("forest model: malformed node");
      TreeNode node;
      node.feature = n[0].get<int>();
      node.threshold = n[1].get<double>();
      node.left = n[2].get<int>();
      node.right = n[3].get<int>();
      node.value = n[4].get<double>();
      tree.nodes.push_back(node);
    }
    model.trees.push_back(std::move(tree));
  }
  return model;
}

std::vector<double> permutation_importance(const ForestModel& model, const Matrix& X,
                                           const std::vector<int>& y, int n_repeats,
                                           std::uint64_t seed, int threads) {
  if (y.size() != X.rows) fail("permutation importance: label/row mismatch");
  if (n_repeats <= 0) fail("permutation importance: n_repeats must be positive");
  if (X.rows == 0) fail("permutation importance: empty evaluation set");

  std::vector<bool> used(model.n_features, false);
  for (const Tree& tree : model.trees) {
    for (const TreeNode& n : tree.nodes) {
      if (n.feature >= 0) used[static_cast<size_t>(n.feature)] = true;
    }
  }

  auto accuracy_of = [&](const Matrix& M) {
    // Serial prediction inside the per-feature task; the outer loop is the
    // parallel axis.
    const std::vector<int> pred = forest_predict(model, M, 1);
    size_t hits = 0;
    for (size_t i = 0; i < pred.size(); ++i) hits += static_cast<size_t>(pred[i] == y[i]);
    return static_cast<double>(hits) / static_cast<double>(pred.size());
  };
  const double baseline = accuracy_of(X);

  std::vector<double> importance(model.n_features, 0.0);
  parallel_for_indexed(model.n_features, threads, [&](size_t f) {
    if (!used[f]) return;  // never split on: exactly zero
    Matrix shuffled = X;
    std::vector<size_t> perm(X.rows);
    double drop_sum = 0.0;
    for (int r = 0; r < n_repeats; ++r) {
      Rng rng(derive_seed(seed, static_cast<std::uint64_t>(f), static_cast<std::uint64_t>(r)));
      std::iota(perm.begin(), perm.end(), size_t{0});
      rng.shuffle(perm);
      for (size_t i = 0; i < X.rows; ++i) {
        shuffled.data[i * X.cols + f] = X.at(perm[i], f);
      }
      drop_sum += baseline - accuracy_of(shuffled);
    }
    importance[f] = drop_sum / static_cast<double>(n_repeats);
  });
  return importance;
}

}  // namespace sqlspace::analytics
