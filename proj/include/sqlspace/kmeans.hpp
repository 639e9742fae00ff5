#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "sqlspace/jsonl.hpp"
#include "sqlspace/matrix.hpp"

namespace sqlspace::analytics {

struct KMeansOptions {
  int k = 0;
  std::uint64_t seed = 0;
  int max_iter = 300;
  int restarts = 10;
  int threads = 1;  // 1 = serial reference path; >1 or 0(auto) = OpenMP
};

struct KMeansModel {
  int k = 0;
  std::uint64_t seed = 0;
  double inertia = 0.0;
  Matrix centroids;                   // k x d
  std::vector<int> labels;            // assignment of the fit rows
  std::vector<double> inertia_trace;  // per-Lloyd-iteration inertia of the winning restart
};

/// Lloyd's algorithm with k-means++ seeding, empty-cluster repair (reseed
/// from the farthest point), and seeded restarts; the best restart by
/// (inertia, restart index) wins. The assignment step is the parallel kernel;
/// reductions are ordered so thread count never changes the result.
KMeansModel kmeans_fit(const Matrix& X, const KMeansOptions& opts);

/// Nearest-centroid assignment (ties -> lowest centroid index).
std::vector<int> kmeans_assign(const Matrix& centroids, const Matrix& X, int threads = 1);

struct ElbowResult {
  int k = 0;
  std::vector<int> ks;
  std::vector<double> inertias;
};

/// Fits every k in [k_min, k_max] and picks the curve point with the largest
/// perpendicular distance to the chord between the endpoints (axes normalized
/// to [0,1]); ties prefer the smaller k.
ElbowResult elbow_select_k(const Matrix& X, int k_min, int k_max, const KMeansOptions& base);

json kmeans_to_json(const KMeansModel& model);
KMeansModel kmeans_from_json(const json& j);

struct ClusterAccuracy {
  int cluster = 0;
  size_t n = 0;
  double mean = 0.0;
  double variance = 0.0;  // population variance of the 0/1 outcomes: m(1-m)
};

/// Per-cluster accuracy over 0/1 correctness; empty clusters yield no entry.
std::vector<ClusterAccuracy> cluster_accuracy(const std::vector<int>& labels,
                                              const std::vector<int>& correct, int k);

}  // namespace sqlspace::analytics
