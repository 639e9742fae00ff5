#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "sqlspace/matrix.hpp"
#include "sqlspace/stats.hpp"

using namespace sqlspace;
using namespace sqlspace::analytics;

namespace {

/// Closed-form chi-square tails, coded independently of the production
/// incomplete-gamma path: df=1 via the error function, df=2 analytically,
/// df=4 via the exponential-sum form for even df.
double oracle_sf(double x, int df) {
  switch (df) {
    case 1: return std::erfc(std::sqrt(x / 2.0));
    case 2: return std::exp(-x / 2.0);
    case 4: return std::exp(-x / 2.0) * (1.0 + x / 2.0);
    default: return -1.0;
  }
}

}  // namespace

TEST_CASE("chi-square survival function matches closed forms") {
  for (double x : {0.1, 0.5, 1.0, 2.0, 3.841, 6.667, 10.0, 20.0}) {
    for (int df : {1, 2, 4}) {
      CAPTURE(x);
      CAPTURE(df);
      CHECK(chi_square_sf(x, df) == doctest::Approx(oracle_sf(x, df)).epsilon(1e-9));
    }
  }
  CHECK(chi_square_sf(0.0, 1) == doctest::Approx(1.0));
}

TEST_CASE("the frozen 2x2 table reproduces its hand-derived values") {
  const ChiSquareResult r = chi_square_table({{20, 10}, {10, 20}});
  CHECK(r.statistic == doctest::Approx(6.6667).epsilon(1e-4));
  CHECK(r.p_value == doctest::Approx(0.00982).epsilon(1e-2));
  CHECK(std::abs(r.p_value - 0.00982) < 1e-4);
  CHECK(r.df == 1);
  CHECK(r.significant);
}

TEST_CASE("proportional tables score a statistic of exactly zero") {
  const ChiSquareResult r = chi_square_table({{10, 30}, {20, 60}, {5, 15}});
  CHECK(r.statistic == 0.0);
  CHECK(r.df == 2);
  CHECK(r.p_value == 1.0);
  CHECK(!r.significant);
}

TEST_CASE("statistic grows with divergence and df follows the row count") {
  const ChiSquareResult weak = chi_square_table({{16, 14}, {14, 16}});
  const ChiSquareResult strong = chi_square_table({{28, 2}, {2, 28}});
  CHECK(strong.statistic > weak.statistic);
  CHECK(chi_square_table({{5, 5}, {6, 4}, {4, 6}, {5, 5}}).df == 3);
}

TEST_CASE("significance respects alpha") {
  const std::vector<std::array<std::int64_t, 2>> counts = {{20, 10}, {10, 20}};
  CHECK(chi_square_table(counts, 0.05).significant);
  CHECK(!chi_square_table(counts, 0.001).significant);
}

TEST_CASE("degenerate tables are rejected") {
  CHECK_THROWS_AS(chi_square_table({{10, 5}}), Error);           // one row
  CHECK_THROWS_AS(chi_square_table({{0, 0}, {10, 5}}), Error);   // zero row marginal
  CHECK_THROWS_AS(chi_square_table({{10, 0}, {5, 0}}), Error);   // zero column marginal
  CHECK_THROWS_AS(chi_square_table({{-1, 3}, {2, 2}}), Error);   // negative count
}

TEST_CASE("feature proportions group rows by dataset label") {
  Matrix X(5, 2);
  // rows: a, a, b, b, b
  X.at(0, 0) = 1;
  X.at(1, 0) = 1;
  X.at(2, 0) = 1;
  X.at(0, 1) = 1;
  const ProportionTable t =
      feature_proportions(X, {"a", "a", "b", "b", "b"});
  CHECK(t.datasets == std::vector<std::string>{"a", "b"});
  CHECK(t.counts.at("a") == 2);
  CHECK(t.counts.at("b") == 3);
  CHECK(t.props.at("a")[0] == doctest::Approx(1.0));
  CHECK(t.props.at("b")[0] == doctest::Approx(1.0 / 3.0));
  CHECK(t.props.at("a")[1] == doctest::Approx(0.5));
  CHECK(t.props.at("b")[1] == doctest::Approx(0.0));
}

TEST_CASE("proportions reject label/row mismatches") {
  Matrix X(2, 1);
  CHECK_THROWS_AS(feature_proportions(X, {"a"}), Error);
}
