#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "sqlspace/forest.hpp"
#include "sqlspace/jsonl.hpp"
#include "sqlspace/matrix.hpp"

namespace sqlspace::analytics {

enum class ImportanceMethod { mdi, permutation };
ImportanceMethod parse_importance_method(const std::string& name);
const char* importance_method_name(ImportanceMethod m);

struct RankedFeature {
  std::string id;
  double score = 0.0;
  size_t index = 0;  // column in the feature matrix
};

struct ClusterImportance {
  int cluster = 0;
  std::vector<RankedFeature> top_features;  // descending score, at most 10
};

/// What makes each cluster distinctive: a one-vs-rest forest per cluster,
/// scored by MDI, or by permutation importance on a seeded held-out split.
/// Needs at least two distinct cluster labels.
std::vector<ClusterImportance> cluster_feature_importance(
    const Matrix& X, const std::vector<int>& labels, const std::vector<std::string>& feature_ids,
    ImportanceMethod method, int n_trees = 100, std::uint64_t seed = 0, int threads = 1);

json cluster_importance_to_json(const std::vector<ClusterImportance>& imp);

}  // namespace sqlspace::analytics
