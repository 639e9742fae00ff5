// Times the OpenMP kernels against their serial reference paths on synthetic
// inputs and checks that both produce identical bytes.

#include <chrono>
#include <cstdio>
#include <functional>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "sqlspace/discovery.hpp"
#include "sqlspace/estimator.hpp"
#include "sqlspace/forest.hpp"
#include "sqlspace/kmeans.hpp"
#include "sqlspace/matrix.hpp"
#include "sqlspace/rng.hpp"

namespace {

using clock_type = std::chrono::steady_clock;

double time_ms(const std::function<void()>& fn) {
  const auto t0 = clock_type::now();
  fn();
  const auto t1 = clock_type::now();
  return std::chrono::duration<double, std::milli>(t1 - t0).count();
}

void report(const std::string& name, double serial_ms, double parallel_ms, bool identical) {
  std::printf("%-28s serial %9.1f ms   parallel %9.1f ms   speedup %5.2fx   %s\n", name.c_str(),
              serial_ms, parallel_ms, serial_ms / parallel_ms,
              identical ? "identical" : "OUTPUTS DIFFER");
}

std::vector<std::string> synthetic_texts(size_t n, std::uint64_t seed) {
  static const char* words[] = {"the",    "query",  "uses",   "a",      "join",     "nested",
                                "select", "count",  "group",  "by",     "question", "asks",
                                "for",    "column", "table",  "schema", "order",    "limit",
                                "value",  "filter", "where",  "clause", "contains", "数",
                                "max",    "min",    "sum",    "avg",    "distinct", "alias"};
  sqlspace::Rng rng(seed);
  std::vector<std::string> texts;
  for (size_t i = 0; i < n; ++i) {
    std::string t;
    const size_t len = 4 + rng.below(10);
    for (size_t w = 0; w < len; ++w) {
      if (w != 0) t += ' ';
      t += words[rng.below(std::size(words))];
    }
    texts.push_back(std::move(t));
  }
  return texts;
}

sqlspace::Matrix synthetic_binary(size_t rows, size_t cols, std::uint64_t seed) {
  sqlspace::Rng rng(seed);
  sqlspace::Matrix X(rows, cols);
  for (double& v : X.data) v = rng.unit() < 0.3 ? 1.0 : 0.0;
  return X;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"sqlspace kernel benchmarks (serial reference vs OpenMP)"};
  int threads = static_cast<int>(std::thread::hardware_concurrency());
  size_t n_texts = 600;
  size_t n_rows = 4000;
  size_t n_cols = 89;
  app.add_option("--threads", threads, "parallel worker count");
  app.add_option("--texts", n_texts, "texts for pairwise similarity");
  app.add_option("--rows", n_rows, "rows for kmeans/forest inputs");
  CLI11_PARSE(app, argc, argv);
  if (threads < 2) threads = 2;

  std::printf("threads: %d\n\n", threads);

  {
    const std::vector<std::string> texts = synthetic_texts(n_texts, 11);
    sqlspace::Matrix serial_out, parallel_out;
    const double s = time_ms([&] { serial_out = sqlspace::discovery::pairwise_similarity(texts, 1); });
    const double p =
        time_ms([&] { parallel_out = sqlspace::discovery::pairwise_similarity(texts, threads); });
    report("pairwise_similarity", s, p, serial_out.data == parallel_out.data);
  }

  const sqlspace::Matrix X = synthetic_binary(n_rows, n_cols, 22);

  {
    sqlspace::analytics::KMeansOptions opts;
    opts.k = 8;
    opts.seed = 33;
    sqlspace::analytics::KMeansModel serial_model, parallel_model;
    opts.threads = 1;
    const double s = time_ms([&] { serial_model = sqlspace::analytics::kmeans_fit(X, opts); });
    opts.threads = threads;
    const double p = time_ms([&] { parallel_model = sqlspace::analytics::kmeans_fit(X, opts); });
    report("kmeans_fit", s, p,
           serial_model.centroids.data == parallel_model.centroids.data &&
               serial_model.labels == parallel_model.labels &&
               serial_model.inertia == parallel_model.inertia);
  }

  std::vector<int> y;
  {
    sqlspace::Rng rng(44);
    for (size_t r = 0; r < X.rows; ++r) {
      const double signal = X.at(r, 0) + X.at(r, 1) - X.at(r, 2);
      y.push_back(signal + rng.unit() > 1.0 ? 1 : 0);
    }
  }

  sqlspace::analytics::ForestModel serial_forest;
  {
    sqlspace::analytics::ForestOptions opts;
    opts.n_trees = 200;
    opts.seed = 55;
    sqlspace::analytics::ForestModel parallel_forest;
    opts.threads = 1;
    const double s = time_ms([&] { serial_forest = sqlspace::analytics::forest_fit(X, y, opts); });
    opts.threads = threads;
    const double p =
        time_ms([&] { parallel_forest = sqlspace::analytics::forest_fit(X, y, opts); });
    report("forest_fit", s, p,
           sqlspace::analytics::forest_to_json(serial_forest) ==
               sqlspace::analytics::forest_to_json(parallel_forest));
  }

  {
    std::vector<double> serial_imp, parallel_imp;
    const double s = time_ms([&] {
      serial_imp = sqlspace::analytics::permutation_importance(serial_forest, X, y, 10, 66, 1);
    });
    const double p = time_ms([&] {
      parallel_imp =
          sqlspace::analytics::permutation_importance(serial_forest, X, y, 10, 66, threads);
    });
    report("permutation_importance", s, p, serial_imp == parallel_imp);
  }

  return 0;
}
