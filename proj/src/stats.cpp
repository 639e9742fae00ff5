#include "sqlspace/stats.hpp"

#include <cmath>

#include "sqlspace/common.hpp"

namespace sqlspace::analytics {

ProportionTable feature_proportions(const Matrix& X, const std::vector<std::string>& dataset_of) {
  if (dataset_of.size() != X.rows) {
    fail("feature_proportions: ", dataset_of.size(), " labels for ", X.rows, " rows");
  }
  ProportionTable out;
  std::map<std::string, std::vector<std::int64_t>> ones;
  for (size_t r = 0; r < X.rows; ++r) {
    const std::string& ds = dataset_of[r];
    auto [it, inserted] = ones.try_emplace(ds, X.cols, 0);
    out.counts[ds] += 1;
    const double* row = X.row(r);
    for (size_t c = 0; c < X.cols; ++c) {
      if (row[c] != 0.0) it->second[c] += 1;
    }
  }
  for (const auto& [ds, counts1] : ones) {
    out.datasets.push_back(ds);
    std::vector<double> p(X.cols, 0.0);
    double n = static_cast<double>(out.counts[ds]);
    for (size_t c = 0; c < X.cols; ++c) p[c] = static_cast<double>(counts1[c]) / n;
    out.props[ds] = std::move(p);
  }
  return out;
}

namespace {

constexpr int kMaxIter = 500;
constexpr double kEps = 1e-15;

/// Regularized lower incomplete gamma P(a, x), series expansion (x < a + 1).
double gamma_p_series(double a, double x) {
  double ap = a;
  double sum = 1.0 / a;
  double del = sum;
  for (int i = 0; i < kMaxIter; ++i) {
    ap += 1.0;
    del *= x / ap;
    sum += del;
    if (std::fabs(del) < std::fabs(sum) * kEps) break;
  }
  return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

/// Regularized upper incomplete gamma Q(a, x), continued fraction (x >= a + 1).
double gamma_q_cf(double a, double x) {
  const double fpmin = 1e-300;
  double b = x + 1.0 - a;
  double c = 1.0 / fpmin;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i <= kMaxIter; ++i) {
    double an = -static_cast<double>(i) * (static_cast<double>(i) - a);
    b += 2.0;
    d = an * d + b;
    if (std::fabs(d) < fpmin) d = fpmin;
    c = b + an / c;
    if (std::fabs(c) < fpmin) c = fpmin;
    d = 1.0 / d;
    double del = d * c;
    h *= del;
    if (std::fabs(del - 1.0) < kEps) break;
  }
  return std::exp(-x + a * std::log(x) - std::lgamma(a)) * h;
}

double gamma_q(double a, double x) {
  if (x < 0.0 || a <= 0.0) fail("gamma_q: invalid arguments a=", a, " x=", x);
  if (x == 0.0) return 1.0;
  if (x < a + 1.0) return 1.0 - gamma_p_series(a, x);
  return gamma_q_cf(a, x);
}

}  // namespace

double chi_square_sf(double x, int df) {
  if (df < 1) fail("chi_square_sf: df must be >= 1, got ", df);
  if (x <= 0.0) return 1.0;
  return gamma_q(0.5 * df, 0.5 * x);
}

ChiSquareResult chi_square_table(const std::vector<std::array<std::int64_t, 2>>& counts,
                                 double alpha) {
  const size_t d = counts.size();
  if (d < 2) fail("chi_square_table: need at least 2 datasets, got ", d);

  std::array<std::int64_t, 2> col_totals = {0, 0};
  std::vector<std::int64_t> row_totals(d, 0);
  std::int64_t grand = 0;
  for (size_t r = 0; r < d; ++r) {
    for (size_t c = 0; c < 2; ++c) {
      if (counts[r][c] < 0) fail("chi_square_table: negative count at row ", r);
      row_totals[r] += counts[r][c];
      col_totals[c] += counts[r][c];
      grand += counts[r][c];
    }
    if (row_totals[r] == 0) fail("chi_square_table: row ", r, " has zero marginal total");
  }
  if (col_totals[0] == 0 || col_totals[1] == 0) {
    fail("chi_square_table: a column has zero marginal total (feature constant everywhere)");
  }

  double stat = 0.0;
  for (size_t r = 0; r < d; ++r) {
    for (size_t c = 0; c < 2; ++c) {
      double expected = static_cast<double>(row_totals[r]) * static_cast<double>(col_totals[c]) /
                        static_cast<double>(grand);
      double diff = static_cast<double>(counts[r][c]) - expected;
      if (diff != 0.0) stat += diff * diff / expected;
    }
  }

  ChiSquareResult out;
  out.statistic = stat;
  out.df = static_cast<int>(d) - 1;
  out.p_value = chi_square_sf(stat, out.df);
  out.significant = out.p_value < alpha;
  return out;
}

}  // namespace sqlspace::analytics
