// Copyright 2026 The ewae Authors
// SPDX-License-Identifier: Apache-2.0

#include <cmath>

#include "ewae/kernels.hpp"

namespace ewae::kernels {
namespace {

double dot_scalar(const double* a, const double* b, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += a[i] * b[i];
  return s;
}

void axpy_scalar(double alpha, const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

void gemv_scalar(const double* w, std::size_t rows, std::size_t cols,
                 const double* x, double* y, bool accumulate) {
  for (std::size_t r = 0; r < rows; ++r) {
    const double v = dot_scalar(w + r * cols, x, cols);
    y[r] = accumulate ? y[r] + v : v;
  }
}

void gemv_t_acc_scalar(const double* w, std::size_t rows, std::size_t cols,
                       const double* g, double* x) {
  for (std::size_t r = 0; r < rows; ++r) {
    if (g[r] != 0.0) axpy_scalar(g[r], w + r * cols, x, cols);
  }
}

void ger_acc_scalar(const double* g, std::size_t rows, const double* x,
                    std::size_t cols, double* w) {
  for (std::size_t r = 0; r < rows; ++r) {
    if (g[r] != 0.0) axpy_scalar(g[r], x, w + r * cols, cols);
  }
}

void rmsprop_scalar(double* p, const double* g, double* ms, std::size_t n,
                    double lr, double rho, double eps) {
  for (std::size_t i = 0; i < n; ++i) {
    ms[i] = rho * ms[i] + (1.0 - rho) * g[i] * g[i];
    p[i] -= lr * g[i] / (std::sqrt(ms[i]) + eps);
  }
}

}  // namespace

const KernelTable& scalar_table() {
  static const KernelTable table{dot_scalar,        axpy_scalar,
                                 gemv_scalar,       gemv_t_acc_scalar,
                                 ger_acc_scalar,    rmsprop_scalar};
  return table;
}

}  // namespace ewae::kernels
