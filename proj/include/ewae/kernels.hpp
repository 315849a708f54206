// Copyright 2026 The ewae Authors
// SPDX-License-Identifier: Apache-2.0
//
// Dense double-precision kernels used by every forward/backward pass.
//
// Two implementations exist for each kernel: a portable scalar reference and
// an AVX2+FMA variant. The active table is chosen once at startup from CPUID
// (override with EWAE_KERNELS=scalar|avx2) and can be swapped in tests.

#pragma once

#include <cstddef>
#include <span>
#include <string_view>

namespace ewae::kernels {

enum class Backend { kScalar, kAvx2 };

struct KernelTable {
  // sum_i a[i] * b[i]
  double (*dot)(const double* a, const double* b, std::size_t n);
  // y[i] += alpha * x[i]
  void (*axpy)(double alpha, const double* x, double* y, std::size_t n);
  // y[r] (+)= sum_c W[r*cols + c] * x[c]; accumulate selects += over =
  void (*gemv)(const double* w, std::size_t rows, std::size_t cols,
               const double* x, double* y, bool accumulate);
  // x[c] += sum_r W[r*cols + c] * g[r]
  void (*gemv_t_acc)(const double* w, std::size_t rows, std::size_t cols,
                     const double* g, double* x);
  // W[r*cols + c] += g[r] * x[c]
  void (*ger_acc)(const double* g, std::size_t rows, const double* x,
                  std::size_t cols, double* w);
  // RMSprop: ms = rho*ms + (1-rho)*g^2; p -= lr * g / (sqrt(ms) + eps)
  void (*rmsprop)(double* p, const double* g, double* ms, std::size_t n,
                  double lr, double rho, double eps);
};

const KernelTable& scalar_table();
// Throws std::runtime_error when the host lacks AVX2/FMA.
const KernelTable& avx2_table();

bool cpu_has_avx2();

// The table used by the library. Resolved on first use.
const KernelTable& active();
Backend active_backend();
void set_backend(Backend b);
std::string_view backend_name(Backend b);

// Span conveniences over the active table.
inline double dot(std::span<const double> a, std::span<const double> b) {
  return active().dot(a.data(), b.data(), a.size());
}
inline void axpy(double alpha, std::span<const double> x, std::span<double> y) {
  active().axpy(alpha, x.data(), y.data(), x.size());
}

}  // namespace ewae::kernels
