#include "sqlspace/cluster_importance.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include "sqlspace/common.hpp"
#include "sqlspace/rng.hpp"

namespace sqlspace::analytics {

namespace {
constexpr int kTopFeatures = 10;
constexpr int kPermutationRepeats = 10;
constexpr double kHoldoutFraction = 0.1;
}  // namespace

ImportanceMethod parse_importance_method(const std::string& name) {
  if (name == "mdi") return ImportanceMethod::mdi;
  if (name == "permutation") return ImportanceMethod::permutation;
  fail("unknown importance method '", name, "' (expected mdi or permutation)");
}

const char* importance_method_name(ImportanceMethod m) {
  return m == ImportanceMethod::mdi ? "mdi" : "permutation";
}

std::vector<ClusterImportance> cluster_feature_importance(
    const Matrix& X, const std::vector<int>& labels, const std::vector<std::string>& feature_ids,
    ImportanceMethod method, int n_trees, std::uint64_t seed, int threads) {
  if (labels.size() != X.rows) fail("cluster importance: label/row mismatch");
  if (feature_ids.size() != X.cols) fail("cluster importance: feature id/column mismatch");
  std::set<int> distinct(labels.begin(), labels.end());
  if (distinct.size() < 2) {
    fail("cluster importance: needs at least two clusters, got ", distinct.size());
  }

  std::vector<ClusterImportance> out;
  for (int c : distinct) {
    std::vector<int> y(labels.size());
    for (size_t i = 0; i < labels.size(); ++i) y[i] = labels[i] == c ? 1 : 0;

    ForestOptions fopts;
    fopts.n_trees = n_trees;
    fopts.seed = derive_seed(seed, 0xc1f5, static_cast<std::uint64_t>(c));
    fopts.threads = threads;

    std::vector<double> scores;
    if (method == ImportanceMethod::mdi) {
      const ForestModel forest = forest_fit(X, y, fopts);
      scores = forest.importances;
    } else {
      // Train on a seeded split and permute columns on the held-out rows.
      std::vector<size_t> order(X.rows);
      std::iota(order.begin(), order.end(), size_t{0});
      Rng rng(derive_seed(seed, 0x5b1700, static_cast<std::uint64_t>(c)));
      rng.shuffle(order);
      size_t n_holdout = static_cast<size_t>(
          std::floor(kHoldoutFraction * static_cast<double>(X.rows)));
      const size_t n_train = X.rows - n_holdout;
      std::vector<size_t> train_rows(order.begin(), order.begin() + static_cast<long>(n_train));
      std::vector<size_t> holdout_rows(order.begin() + static_cast<long>(n_train), order.end());
      if (holdout_rows.empty()) {
        log_warn("cluster importance: holdout empty for cluster ", c,
                 "; scoring on the training rows");
        holdout_rows = train_rows;
      }

      std::vector<int> y_train;
      for (size_t r : train_rows) y_train.push_back(y[r]);
      bool has_pos = false, has_neg = false;
      for (int v : y_train) (v != 0 ? has_pos : has_neg) = true;
      if (!has_pos || !has_neg) {
        // The split isolated the cluster entirely; fall back to all rows.
        log_warn("cluster importance: split left one class for cluster ", c,
                 "; training on all rows");
        train_rows.assign(order.begin(), order.end());
        holdout_rows = train_rows;
        y_train = y;
      }

      const ForestModel forest = forest_fit(X.select_rows(train_rows), y_train, fopts);
      std::vector<int> y_holdout;
      for (size_t r : holdout_rows) y_holdout.push_back(y[r]);
      scores = permutation_importance(forest, X.select_rows(holdout_rows), y_holdout,
                                      kPermutationRepeats,
                                      derive_seed(seed, 0x993, static_cast<std::uint64_t>(c)),
                                      threads);
    }

    std::vector<size_t> rank(scores.size());
    std::iota(rank.begin(), rank.end(), size_t{0});
    std::stable_sort(rank.begin(), rank.end(), [&](size_t a, size_t b) {
      if (scores[a] != scores[b]) return scores[a] > scores[b];
      return a < b;
    });

    ClusterImportance ci;
    ci.cluster = c;
    for (size_t i = 0; i < rank.size() && i < kTopFeatures; ++i) {
      ci.top_features.push_back({feature_ids[rank[i]], scores[rank[i]], rank[i]});
    }
    out.push_back(std::move(ci));
  }
  return out;
}

json cluster_importance_to_json(const std::vector<ClusterImportance>& imp) {
  json arr = json::array();
  for (const auto& ci : imp) {
    json features = json::array();
    for (const auto& f : ci.top_features) {
      features.push_back(json{{"id", f.id}, {"index", f.index}, {"score", f.score}});
    }
    arr.push_back(json{{"cluster", ci.cluster}, {"top_features", std::move(features)}});
  }
  return arr;
}

}  // namespace sqlspace::analytics
