#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "sqlspace/pca.hpp"
#include "sqlspace/rng.hpp"

using namespace sqlspace;
using namespace sqlspace::analytics;

namespace {

/// Points along a known direction plus small isotropic noise.
Matrix line_cloud(size_t n, double dx, double dy, double noise, std::uint64_t seed) {
  Rng rng(seed);
  const double len = std::sqrt(dx * dx + dy * dy);
  Matrix X(n, 2);
  for (size_t i = 0; i < n; ++i) {
    const double t = rng.normal() * 5.0;
    X.at(i, 0) = t * dx / len + rng.normal() * noise + 3.0;
    X.at(i, 1) = t * dy / len + rng.normal() * noise - 1.0;
  }
  return X;
}

}  // namespace

TEST_CASE("first component recovers the dominant direction") {
  const Matrix X = line_cloud(400, 3.0, 4.0, 0.05, 42);
  const PcaModel model = pca_fit(X, 2);
  REQUIRE(model.components.rows == 2);
  REQUIRE(model.components.cols == 2);

  // Expected axis (3,4)/5; PCA sign is fixed so the largest loading is positive.
  const double cx = model.components.at(0, 0);
  const double cy = model.components.at(0, 1);
  CHECK(std::abs(cx * 0.6 + cy * 0.8) == doctest::Approx(1.0).epsilon(1e-3));
  CHECK(model.eigenvalues.size() == 2);
  CHECK(model.eigenvalues[0] > model.eigenvalues[1]);
  CHECK(model.eigenvalues[0] > 10.0 * model.eigenvalues[1]);
}

TEST_CASE("components are orthonormal") {
  Rng rng(7);
  Matrix X(100, 4);
  for (double& v : X.data) v = rng.normal();
  const PcaModel model = pca_fit(X, 4);
  for (size_t a = 0; a < 4; ++a) {
    for (size_t b = 0; b < 4; ++b) {
      double dot = 0.0;
      for (size_t c = 0; c < 4; ++c) dot += model.components.at(a, c) * model.components.at(b, c);
      CHECK(dot == doctest::Approx(a == b ? 1.0 : 0.0).epsilon(1e-9));
    }
  }
}

TEST_CASE("transform centers the data: projected means are zero") {
  const Matrix X = line_cloud(200, 1.0, 0.0, 0.3, 11);
  const PcaModel model = pca_fit(X, 2);
  const Matrix Y = pca_transform(model, X);
  REQUIRE(Y.rows == X.rows);
  REQUIRE(Y.cols == 2);
  double m0 = 0.0, m1 = 0.0;
  for (size_t i = 0; i < Y.rows; ++i) {
    m0 += Y.at(i, 0);
    m1 += Y.at(i, 1);
  }
  CHECK(std::abs(m0 / static_cast<double>(Y.rows)) < 1e-9);
  CHECK(std::abs(m1 / static_cast<double>(Y.rows)) < 1e-9);
}

TEST_CASE("projection preserves total variance when all components are kept") {
  Rng rng(19);
  Matrix X(150, 3);
  for (double& v : X.data) v = rng.normal() * (1.0 + rng.unit());
  const PcaModel model = pca_fit(X, 3);
  const Matrix Y = pca_transform(model, X);

  auto total_variance = [](const Matrix& M) {
    double total = 0.0;
    for (size_t c = 0; c < M.cols; ++c) {
      double mean = 0.0;
      for (size_t r = 0; r < M.rows; ++r) mean += M.at(r, c);
      mean /= static_cast<double>(M.rows);
      for (size_t r = 0; r < M.rows; ++r) {
        const double d = M.at(r, c) - mean;
        total += d * d;
      }
    }
    return total / static_cast<double>(M.rows - 1);
  };
  CHECK(total_variance(Y) == doctest::Approx(total_variance(X)).epsilon(1e-9));

  // Eigenvalues are exactly the per-column variances of the projection.
  for (size_t c = 0; c < 3; ++c) {
    double v = 0.0;
    for (size_t r = 0; r < Y.rows; ++r) v += Y.at(r, c) * Y.at(r, c);
    v /= static_cast<double>(Y.rows - 1);
    CHECK(v == doctest::Approx(model.eigenvalues[c]).epsilon(1e-9));
  }
}

TEST_CASE("rank-deficient data pads the trailing components with zeros") {
  // All points on a 1-D line in 3-D: only one non-degenerate direction.
  Matrix X(50, 3);
  Rng rng(23);
  for (size_t i = 0; i < X.rows; ++i) {
    const double t = rng.normal();
    X.at(i, 0) = t;
    X.at(i, 1) = 2.0 * t;
    X.at(i, 2) = -t;
  }
  const PcaModel model = pca_fit(X, 3);
  CHECK(model.eigenvalues[0] > 1e-6);
  CHECK(model.eigenvalues[1] == doctest::Approx(0.0).epsilon(1e-9));
  CHECK(model.eigenvalues[2] == doctest::Approx(0.0).epsilon(1e-9));
}

TEST_CASE("zero-padded components project to exactly zero coordinates") {
  // Rank-1 data with 3 requested components: rows 1 and 2 are zero vectors,
  // so the projection's trailing coordinates are exactly 0.
  Matrix X(30, 3);
  Rng rng(29);
  for (size_t i = 0; i < X.rows; ++i) {
    const double t = rng.normal();
    X.at(i, 0) = t;
    X.at(i, 1) = -t;
    X.at(i, 2) = 0.5 * t;
  }
  const PcaModel model = pca_fit(X, 3);
  const Matrix Y = pca_transform(model, X);
  for (size_t i = 0; i < Y.rows; ++i) {
    CHECK(Y.at(i, 1) == 0.0);
    CHECK(Y.at(i, 2) == 0.0);
  }
}

TEST_CASE("degenerate inputs are rejected") {
  Matrix empty(0, 3);
  CHECK_THROWS_AS(pca_fit(empty, 2), Error);
  Matrix ok(5, 3);
  CHECK_THROWS_AS(pca_fit(ok, 0), Error);
  CHECK_THROWS_AS(pca_fit(ok, 4), Error);  // more components than dimensions
  const PcaModel model = pca_fit(ok, 2);
  Matrix wrong(5, 2);
  CHECK_THROWS_AS(pca_transform(model, wrong), Error);
}
