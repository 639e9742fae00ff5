#include "sqlspace/pca.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "sqlspace/common.hpp"

namespace sqlspace::analytics {

namespace {

// Cyclic Jacobi eigen-decomposition of a symmetric matrix A (d x d).
// Returns eigenvalues in `evals` and eigenvectors as columns of `V`.
void jacobi_eigen(std::vector<double>& A, size_t d, std::vector<double>& evals,
                  std::vector<double>& V) {
  V.assign(d * d, 0.0);
  for (size_t i = 0; i < d; ++i) V[i * d + i] = 1.0;

  const int max_sweeps = 100;
  for (int sweep = 0; sweep < max_sweeps; ++sweep) {
    double off = 0.0;
    for (size_t p = 0; p < d; ++p) {
      for (size_t q = p + 1; q < d; ++q) off += A[p * d + q] * A[p * d + q];
    }
    if (off < 1e-24) break;

    for (size_t p = 0; p < d; ++p) {
      for (size_t q = p + 1; q < d; ++q) {
        const double apq = A[p * d + q];
        if (std::abs(apq) < 1e-300) continue;
        const double app = A[p * d + p];
        const double aqq = A[q * d + q];
        const double theta = (aqq - app) / (2.0 * apq);
        const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                         (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;

        for (size_t i = 0; i < d; ++i) {
          const double aip = A[i * d + p];
          const double aiq = A[i * d + q];
          A[i * d + p] = c * aip - s * aiq;
          A[i * d + q] = s * aip + c * aiq;
        }
        for (size_t i = 0; i < d; ++i) {
          const double api = A[p * d + i];
          const double aqi = A[q * d + i];
          A[p * d + i] = c * api - s * aqi;
          A[q * d + i] = s * api + c * aqi;
        }
        for (size_t i = 0; i < d; ++i) {
          const double vip = V[i * d + p];
          const double viq = V[i * d + q];
          V[i * d + p] = c * vip - s * viq;
          V[i * d + q] = s * vip + c * viq;
        }
      }
    }
  }

  evals.resize(d);
  for (size_t i = 0; i < d; ++i) evals[i] = A[i * d + i];
}

}  // namespace

PcaModel pca_fit(const Matrix& X, int n_components) {
  if (X.rows == 0 || X.cols == 0) fail("pca: empty input matrix");
  if (n_components <= 0) fail("pca: n_components must be positive, got ", n_components);
  const size_t d = X.cols;
  const size_t nc = static_cast<size_t>(n_components);
  if (nc > d) fail("pca: n_components=", n_components, " exceeds dimensionality (", d, ")");

  PcaModel model;
  model.mean.assign(d, 0.0);
  for (size_t i = 0; i < X.rows; ++i) {
    const double* row = X.row(i);
    for (size_t j = 0; j < d; ++j) model.mean[j] += row[j];
  }
  for (size_t j = 0; j < d; ++j) model.mean[j] /= static_cast<double>(X.rows);

  // Covariance (divides by n-1; falls back to n when a single row is given).
  std::vector<double> cov(d * d, 0.0);
  for (size_t i = 0; i < X.rows; ++i) {
    const double* row = X.row(i);
    for (size_t a = 0; a < d; ++a) {
      const double da = row[a] - model.mean[a];
      for (size_t b = a; b < d; ++b) {
        cov[a * d + b] += da * (row[b] - model.mean[b]);
      }
    }
  }
  const double denom = X.rows > 1 ? static_cast<double>(X.rows - 1) : 1.0;
  for (size_t a = 0; a < d; ++a) {
    for (size_t b = a; b < d; ++b) {
      cov[a * d + b] /= denom;
      cov[b * d + a] = cov[a * d + b];
    }
  }

  std::vector<double> evals;
  std::vector<double> V;
  jacobi_eigen(cov, d, evals, V);

  std::vector<size_t> order(d);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](size_t a, size_t b) { return evals[a] > evals[b]; });

  model.components.rows = nc;
  model.components.cols = d;
  model.components.data.assign(nc * d, 0.0);
  model.eigenvalues.assign(nc, 0.0);

  size_t filled = 0;
  for (size_t r = 0; r < nc; ++r) {
    const size_t src = order[r];
    if (evals[src] <= 1e-12) break;  // rank exhausted; leave the rest zeroed
    double* dst = model.components.data.data() + r * d;
    for (size_t j = 0; j < d; ++j) dst[j] = V[j * d + src];
    // Sign convention: the largest-|loading| entry is positive.
    size_t arg = 0;
    for (size_t j = 1; j < d; ++j) {
      if (std::abs(dst[j]) > std::abs(dst[arg])) arg = j;
    }
    if (dst[arg] < 0.0) {
      for (size_t j = 0; j < d; ++j) dst[j] = -dst[j];
    }
    model.eigenvalues[r] = evals[src];
    ++filled;
  }
  if (filled < nc) {
    log_warn("pca: data rank ", filled, " below requested components ", nc,
             "; trailing components are zero");
  }
  return model;
}

Matrix pca_transform(const PcaModel& model, const Matrix& X) {
  if (X.cols != model.components.cols) {
    fail("pca_transform: dimension mismatch (", X.cols, " vs ", model.components.cols, ")");
  }
  Matrix out;
  out.rows = X.rows;
  out.cols = model.components.rows;
  out.data.assign(out.rows * out.cols, 0.0);
  for (size_t i = 0; i < X.rows; ++i) {
    const double* row = X.row(i);
    for (size_t c = 0; c < out.cols; ++c) {
      const double* comp = model.components.row(c);
      double s = 0.0;
      for (size_t j = 0; j < X.cols; ++j) s += (row[j] - model.mean[j]) * comp[j];
      out.data[i * out.cols + c] = s;
    }
  }
  return out;
}

}  // namespace sqlspace::analytics
