#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "sqlspace/matrix.hpp"

namespace sqlspace::analytics {

/// Per-dataset fraction of examples exhibiting each feature.
/// `dataset_of[i]` labels row i of X; X is binary.
/// Returns dataset -> per-feature proportions, plus per-dataset counts.
struct ProportionTable {
  std::vector<std::string> datasets;                 // sorted
  std::map<std::string, size_t> counts;              // dataset -> #examples
  std::map<std::string, std::vector<double>> props;  // dataset -> per-feature fraction
};
ProportionTable feature_proportions(const Matrix& X, const std::vector<std::string>& dataset_of);

struct ChiSquareResult {
  double statistic = 0.0;
  int df = 0;
  double p_value = 1.0;
  bool significant = false;
};

/// Pearson chi-square on a D x 2 contingency table (rows = datasets,
/// columns = {has feature, lacks feature}); df = D - 1. Zero row or column
/// marginals error. Proportional tables yield a statistic of exactly 0.
ChiSquareResult chi_square_table(const std::vector<std::array<std::int64_t, 2>>& counts,
                                 double alpha = 0.05);

/// Survival function of the chi-square distribution (upper tail), computed
/// via the regularized incomplete gamma function.
double chi_square_sf(double x, int df);

}  // namespace sqlspace::analytics
