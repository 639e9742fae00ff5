#include "sqlspace/kmeans.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "sqlspace/common.hpp"
#include "sqlspace/rng.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace sqlspace::analytics {

namespace {

double sq_dist(const double* a, const double* b, size_t d) {
  double s = 0.0;
  for (size_t i = 0; i < d; ++i) {
    const double diff = a[i] - b[i];
    s += diff * diff;
  }
  return s;
}

int nearest_centroid(const Matrix& centroids, const double* x, double* out_dist) {
  int best = 0;
  double best_dist = std::numeric_limits<double>::infinity();
  for (size_t c = 0; c < centroids.rows; ++c) {
    const double dist = sq_dist(centroids.row(c), x, centroids.cols);
    if (dist < best_dist) {
      best_dist = dist;
      best = static_cast<int>(c);
    }
  }
  if (out_dist != nullptr) *out_dist = best_dist;
  return best;
}

// k-means++: first centroid uniform, the rest by a cumulative walk over the
// D^2 weights. Serial on purpose — it is cheap and must not depend on the
// thread count.
Matrix kmeanspp_init(const Matrix& X, int k, Rng& rng) {
  Matrix centroids;
  centroids.rows = static_cast<size_t>(k);
  centroids.cols = X.cols;
  centroids.data.resize(centroids.rows * centroids.cols);

  const size_t first = rng.below(X.rows);
  std::copy_n(X.row(first), X.cols, centroids.data.begin());

  std::vector<double> d2(X.rows);
  for (int c = 1; c < k; ++c) {
    double total = 0.0;
    for (size_t i = 0; i < X.rows; ++i) {
      double best = std::numeric_limits<double>::infinity();
      for (int j = 0; j < c; ++j) {
        best = std::min(best, sq_dist(centroids.row(static_cast<size_t>(j)), X.row(i), X.cols));
      }
      d2[i] = best;
      total += best;
    }
    size_t chosen;
    if (total <= 0.0) {
      chosen = rng.below(X.rows);  // all points coincide with centroids
    } else {
      const double target = rng.unit() * total;
      double acc = 0.0;
      chosen = X.rows - 1;
      for (size_t i = 0; i < X.rows; ++i) {
        acc += d2[i];
        if (acc >= target) {
          chosen = i;
          break;
        }
      }
    }
    std::copy_n(X.row(chosen), X.cols, centroids.data.begin() + static_cast<size_t>(c) * X.cols);
  }
  return centroids;
}

struct LloydResult {
  Matrix centroids;
  std::vector<int> labels;
  double inertia = 0.0;
  std::vector<double> trace;
};

LloydResult lloyd(const Matrix& X, Matrix centroids, int max_iter, int threads, Rng& rng) {
  const int k = static_cast<int>(centroids.rows);
  std::vector<int> labels(X.rows, 0);
  std::vector<double> dists(X.rows, 0.0);
  std::vector<double> trace;

  auto assign_all = [&]() {
    const long n = static_cast<long>(X.rows);
#ifdef _OPENMP
#pragma omp parallel for schedule(static) num_threads(std::max(threads, 1)) if (threads != 1)
#endif
    for (long i = 0; i < n; ++i) {
      labels[static_cast<size_t>(i)] =
          nearest_centroid(centroids, X.row(static_cast<size_t>(i)), &dists[static_cast<size_t>(i)]);
    }
  };

  for (int iter = 0; iter < max_iter; ++iter) {
    assign_all();

    // Inertia and centroid sums accumulate serially in row order so the
    // floating-point result is independent of the thread count.
    double inertia = 0.0;
    for (size_t i = 0; i < X.rows; ++i) inertia += dists[i];
    trace.push_back(inertia);

    Matrix sums;
    sums.rows = static_cast<size_t>(k);
    sums.cols = X.cols;
    sums.data.assign(sums.rows * sums.cols, 0.0);
    std::vector<size_t> counts(static_cast<size_t>(k), 0);
    for (size_t i = 0; i < X.rows; ++i) {
      const int c = labels[i];
      ++counts[static_cast<size_t>(c)];
      double* dst = sums.data.data() + static_cast<size_t>(c) * sums.cols;
      const double* src = X.row(i);
      for (size_t j = 0; j < X.cols; ++j) dst[j] += src[j];
    }

    Matrix next = centroids;
    for (int c = 0; c < k; ++c) {
      if (counts[static_cast<size_t>(c)] == 0) {
        // Empty cluster: reseed from the point farthest from its centroid.
        size_t far_idx = 0;
        double far_dist = -1.0;
        for (size_t i = 0; i < X.rows; ++i) {
          if (dists[i] > far_dist) {
            far_dist = dists[i];
            far_idx = i;
          }
        }
        std::copy_n(X.row(far_idx), X.cols, next.data.begin() + static_cast<size_t>(c) * next.cols);
        dists[far_idx] = 0.0;  // don't hand the same point to the next empty cluster
        continue;
      }
      const double inv = 1.0 / static_cast<double>(counts[static_cast<size_t>(c)]);
      const double* src = sums.data.data() + static_cast<size_t>(c) * sums.cols;
      double* dst = next.data.data() + static_cast<size_t>(c) * next.cols;
      for (size_t j = 0; j < X.cols; ++j) dst[j] = src[j] * inv;
    }

    if (next.data == centroids.data) break;
    centroids = std::move(next);
  }

  // Final assignment against the converged centroids.
  assign_all();
  double inertia = 0.0;
  for (size_t i = 0; i < X.rows; ++i) inertia += dists[i];
  if (trace.empty() || inertia != trace.back()) trace.push_back(inertia);

  (void)rng;
  LloydResult result;
  result.centroids = std::move(centroids);
  result.labels = std::move(labels);
  result.inertia = inertia;
  result.trace = std::move(trace);
  return result;
}

}  // namespace

KMeansModel kmeans_fit(const Matrix& X, const KMeansOptions& opts) {
  if (X.rows == 0 || X.cols == 0) fail("kmeans: empty input matrix");
  if (opts.k <= 0) fail("kmeans: k must be positive, got ", opts.k);
  if (static_cast<size_t>(opts.k) > X.rows) {
    fail("kmeans: k=", opts.k, " exceeds number of points (", X.rows, ")");
  }
  if (opts.restarts <= 0) fail("kmeans: restarts must be positive, got ", opts.restarts);

  KMeansModel best;
  bool have_best = false;
  for (int r = 0; r < opts.restarts; ++r) {
    Rng rng(derive_seed(opts.seed, 0x6b6d, static_cast<std::uint64_t>(r)));
    Matrix init = kmeanspp_init(X, opts.k, rng);
    LloydResult run = lloyd(X, std::move(init), opts.max_iter, opts.threads, rng);
    if (!have_best || run.inertia < best.inertia) {
      have_best = true;
      best.k = opts.k;
      best.seed = opts.seed;
      best.inertia = run.inertia;
      best.centroids = std::move(run.centroids);
      best.labels = std::move(run.labels);
      best.inertia_trace = std::move(run.trace);
    }
  }
  return best;
}

std::vector<int> kmeans_assign(const Matrix& centroids, const Matrix& X, int threads) {
  if (centroids.rows == 0) fail("kmeans_assign: no centroids");
  if (X.cols != centroids.cols) {
    fail("kmeans_assign: dimension mismatch (", X.cols, " vs ", centroids.cols, ")");
  }
  std::vector<int> labels(X.rows, 0);
  const long n = static_cast<long>(X.rows);
#ifdef _OPENMP
#pragma omp parallel for schedule(static) num_threads(std::max(threads, 1)) if (threads != 1)
#endif
  for (long i = 0; i < n; ++i) {
    labels[static_cast<size_t>(i)] = nearest_centroid(centroids, X.row(static_cast<size_t>(i)), nullptr);
  }
  return labels;
}

ElbowResult elbow_select_k(const Matrix& X, int k_min, int k_max, const KMeansOptions& base) {
  if (k_min <= 0 || k_max < k_min) fail("elbow: invalid k range [", k_min, ", ", k_max, "]");

  ElbowResult result;
  for (int k = k_min; k <= k_max; ++k) {
    if (static_cast<size_t>(k) > X.rows) break;
    KMeansOptions opts = base;
    opts.k = k;
    KMeansModel model = kmeans_fit(X, opts);
    result.ks.push_back(k);
    result.inertias.push_back(model.inertia);
  }
  if (result.ks.empty()) fail("elbow: no feasible k in [", k_min, ", ", k_max, "]");

  const size_t m = result.ks.size();
  if (m < 3) {
    log_warn("elbow: only ", m, " candidate k values; defaulting to k=", result.ks.front());
    result.k = result.ks.front();
    return result;
  }

  // Normalize both axes to [0,1], then measure each point's perpendicular
  // distance to the chord through the first and last points.
  const double x0 = result.ks.front(), x1 = result.ks.back();
  const double ymin = *std::min_element(result.inertias.begin(), result.inertias.end());
  const double ymax = *std::max_element(result.inertias.begin(), result.inertias.end());
  const double xspan = x1 - x0;
  const double yspan = ymax - ymin;
  if (yspan <= 0.0) {
    log_warn("elbow: inertia curve is flat; defaulting to k=", result.ks.front());
    result.k = result.ks.front();
    return result;
  }

  const double ax = 0.0, ay = (result.inertias.front() - ymin) / yspan;
  const double bx = 1.0, by = (result.inertias.back() - ymin) / yspan;
  const double len = std::sqrt((bx - ax) * (bx - ax) + (by - ay) * (by - ay));

  size_t best_idx = 0;
  double best_dist = -1.0;
  for (size_t i = 0; i < m; ++i) {
    const double px = (result.ks[i] - x0) / xspan;
    const double py = (result.inertias[i] - ymin) / yspan;
    const double dist = std::abs((bx - ax) * (ay - py) - (ax - px) * (by - ay)) / len;
    if (dist > best_dist + 1e-12) {
      best_dist = dist;
      best_idx = i;
    }
  }
  result.k = result.ks[best_idx];
  return result;
}

json kmeans_to_json(const KMeansModel& model) {
  json j;
  j["k"] = model.k;
  j["seed"] = model.seed;
  j["inertia"] = model.inertia;
  j["dims"] = model.centroids.cols;
  j["centroids"] = json::array();
  for (size_t c = 0; c < model.centroids.rows; ++c) {
    json row = json::array();
    for (size_t d = 0; d < model.centroids.cols; ++d) row.push_back(model.centroids.at(c, d));
    j["centroids"].push_back(std::move(row));
  }
  j["labels"] = model.labels;
  j["inertia_trace"] = model.inertia_trace;
  return j;
}

KMeansModel kmeans_from_json(const json& j) {
  KMeansModel model;
  model.k = j.at("k").get<int>();
  model.seed = j.at("seed").get<std::uint64_t>();
  model.inertia = j.at("inertia").get<double>();
  model.centroids.cols = j.at("dims").get<size_t>();
  const auto& rows = j.at("centroids");
  model.centroids.rows = rows.size();
  model.centroids.data.reserve(model.centroids.rows * model.centroids.cols);
  for (const auto& row : rows) {
    if (row.size() != model.centroids.cols) fail("kmeans model: ragged centroid row");
    for (const auto& v : row) model.centroids.data.push_back(v.get<double>());
  }
  model.labels = j.at("labels").get<std::vector<int>>();
  model.inertia_trace = j.at("inertia_trace").get<std::vector<double>>();
  return model;
}

std::vector<ClusterAccuracy> cluster_accuracy(const std::vector<int>& labels,
                                              const std::vector<int>& correct, int k) {
  if (labels.size() != correct.size()) {
    fail("cluster_accuracy: size mismatch (", labels.size(), " vs ", correct.size(), ")");
  }
  std::vector<size_t> n(static_cast<size_t>(k), 0);
  std::vector<size_t> hits(static_cast<size_t>(k), 0);
  for (size_t i = 0; i < labels.size(); ++i) {
    const int c = labels[i];
    if (c < 0 || c >= k) fail("cluster_accuracy: label ", c, " out of range [0, ", k, ")");
    ++n[static_cast<size_t>(c)];
    if (correct[i] != 0) ++hits[static_cast<size_t>(c)];
  }
  std::vector<ClusterAccuracy> out;
  for (int c = 0; c < k; ++c) {
    if (n[static_cast<size_t>(c)] == 0) continue;  // empty clusters are omitted
    ClusterAccuracy acc;
    acc.cluster = c;
    acc.n = n[static_cast<size_t>(c)];
    acc.mean = static_cast<double>(hits[static_cast<size_t>(c)]) / static_cast<double>(acc.n);
    acc.variance = acc.mean * (1.0 - acc.mean);
    out.push_back(acc);
  }
  return out;
}

}  // namespace sqlspace::analytics
