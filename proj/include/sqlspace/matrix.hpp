#pragma once

#include <cstddef>
#include <vector>

#include "sqlspace/common.hpp"

namespace sqlspace {

/// Dense row-major matrix of doubles. Feature matrices are binary-valued,
/// which several kernels exploit for exact (order-independent) arithmetic.
struct Matrix {
  size_t rows = 0;
  size_t cols = 0;
  std::vector<double> data;

  Matrix() = default;
  Matrix(size_t r, size_t c, double fill = 0.0) : rows(r), cols(c), data(r * c, fill) {}

  double* row(size_t i) { return data.data() + i * cols; }
  const double* row(size_t i) const { return data.data() + i * cols; }

  double& at(size_t r, size_t c) { return data[r * cols + c]; }
  double at(size_t r, size_t c) const { return data[r * cols + c]; }

  Matrix select_rows(const std::vector<size_t>& idx) const {
    Matrix out(idx.size(), cols);
    for (size_t i = 0; i < idx.size(); ++i) {
      if (idx[i] >= rows) fail("select_rows: index ", idx[i], " out of range");
      const double* src = row(idx[i]);
      double* dst = out.row(i);
      for (size_t c = 0; c < cols; ++c) dst[c] = src[c];
    }
    return out;
  }

  Matrix select_cols(const std::vector<size_t>& idx) const {
    Matrix out(rows, idx.size());
    for (size_t r = 0; r < rows; ++r) {
      const double* src = row(r);
      double* dst = out.row(r);
      for (size_t i = 0; i < idx.size(); ++i) {
        if (idx[i] >= cols) fail("select_cols: index ", idx[i], " out of range");
        dst[i] = src[idx[i]];
      }
    }
    return out;
  }
};

}  // namespace sqlspace
