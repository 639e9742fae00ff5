#pragma once

#include <vector>

#include "sqlspace/matrix.hpp"

namespace sqlspace::analytics {

struct PcaModel {
  std::vector<double> mean;         // column means of the fit data
  Matrix components;                // n_components x d, row-major principal axes
  std::vector<double> eigenvalues;  // matching variances, descending
};

/// PCA of the column-centered data via cyclic Jacobi rotation of the
/// covariance matrix. Components are sorted by eigenvalue (descending) and
/// sign-fixed so each component's largest-magnitude loading is positive.
/// If the data has fewer non-degenerate directions than requested, the
/// remaining components are zero vectors and a warning is logged.
PcaModel pca_fit(const Matrix& X, int n_components);

/// Projects rows of X onto the model's components (after centering).
Matrix pca_transform(const PcaModel& model, const Matrix& X);

}  // namespace sqlspace::analytics
