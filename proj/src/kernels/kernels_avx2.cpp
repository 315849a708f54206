// Copyright 2026 The ewae Authors
// SPDX-License-Identifier: Apache-2.0
//
// AVX2 + FMA variants. Only compiled-in on x86-64; the functions carry their
// own target attribute so the rest of the build stays at the baseline ISA.

#include <stdexcept>

#include "ewae/kernels.hpp"

#if defined(__x86_64__) || defined(_M_X64)
#define EWAE_HAVE_X86 1
#include <immintrin.h>
#else
#define EWAE_HAVE_X86 0
#endif

namespace ewae::kernels {

#if EWAE_HAVE_X86

namespace {

#define EWAE_AVX2 __attribute__((target("avx2,fma")))

EWAE_AVX2 inline double hsum(__m256d v) {
  __m128d lo = _mm256_castpd256_pd128(v);
  __m128d hi = _mm256_extractf128_pd(v, 1);
  lo = _mm_add_pd(lo, hi);
  __m128d sh = _mm_unpackhi_pd(lo, lo);
  return _mm_cvtsd_f64(_mm_add_sd(lo, sh));
}

EWAE_AVX2 double dot_avx2(const double* a, const double* b, std::size_t n) {
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc0);
    acc1 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i + 4), _mm256_loadu_pd(b + i + 4),
                           acc1);
  }
  for (; i + 4 <= n; i += 4) {
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc0);
  }
  double s = hsum(_mm256_add_pd(acc0, acc1));
  for (; i < n; ++i) s += a[i] * b[i];
  return s;
}

EWAE_AVX2 void axpy_avx2(double alpha, const double* x, double* y, std::size_t n) {
  const __m256d va = _mm256_set1_pd(alpha);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    _mm256_storeu_pd(y + i,
                     _mm256_fmadd_pd(va, _mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i)));
  }
  for (; i < n; ++i) y[i] += alpha * x[i];
}

EWAE_AVX2 void gemv_avx2(const double* w, std::size_t rows, std::size_t cols,
                         const double* x, double* y, bool accumulate) {
  std::size_t r = 0;
  // Four rows share each x load.
  for (; r + 4 <= rows; r += 4) {
    const double* w0 = w + r * cols;
    const double* w1 = w0 + cols;
    const double* w2 = w1 + cols;
    const double* w3 = w2 + cols;
    __m256d a0 = _mm256_setzero_pd(), a1 = _mm256_setzero_pd();
    __m256d a2 = _mm256_setzero_pd(), a3 = _mm256_setzero_pd();
    std::size_t c = 0;
    for (; c + 4 <= cols; c += 4) {
      const __m256d vx = _mm256_loadu_pd(x + c);
      a0 = _mm256_fmadd_pd(_mm256_loadu_pd(w0 + c), vx, a0);
      a1 = _mm256_fmadd_pd(_mm256_loadu_pd(w1 + c), vx, a1);
      a2 = _mm256_fmadd_pd(_mm256_loadu_pd(w2 + c), vx, a2);
      a3 = _mm256_fmadd_pd(_mm256_loadu_pd(w3 + c), vx, a3);
    }
    double s0 = hsum(a0), s1 = hsum(a1), s2 = hsum(a2), s3 = hsum(a3);
    for (; c < cols; ++c) {
      s0 += w0[c] * x[c];
      s1 += w1[c] * x[c];
      s2 += w2[c] * x[c];
      s3 += w3[c] * x[c];
    }
    if (accumulate) {
      y[r] += s0; y[r + 1] += s1; y[r + 2] += s2; y[r + 3] += s3;
    } else {
      y[r] = s0; y[r + 1] = s1; y[r + 2] = s2; y[r + 3] = s3;
    }
  }
  for (; r < rows; ++r) {
    const double v = dot_avx2(w + r * cols, x, cols);
    y[r] = accumulate ? y[r] + v : v;
  }
}

EWAE_AVX2 void gemv_t_acc_avx2(const double* w, std::size_t rows, std::size_t cols,
                               const double* g, double* x) {
  for (std::size_t r = 0; r < rows; ++r) {
    if (g[r] != 0.0) axpy_avx2(g[r], w + r * cols, x, cols);
  }
}

EWAE_AVX2 void ger_acc_avx2(const double* g, std::size_t rows, const double* x,
                            std::size_t cols, double* w) {
  for (std::size_t r = 0; r < rows; ++r) {
    if (g[r] != 0.0) axpy_avx2(g[r], x, w + r * cols, cols);
  }
}

EWAE_AVX2 void rmsprop_avx2(double* p, const double* g, double* ms, std::size_t n,
                            double lr, double rho, double eps) {
  const __m256d vrho = _mm256_set1_pd(rho);
  const __m256d vone_m_rho = _mm256_set1_pd(1.0 - rho);
  const __m256d vlr = _mm256_set1_pd(lr);
  const __m256d veps = _mm256_set1_pd(eps);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d vg = _mm256_loadu_pd(g + i);
    // Same operation order as the scalar reference: (1-rho)*g*g, then rho*ms + that.
    const __m256d sq = _mm256_mul_pd(_mm256_mul_pd(vone_m_rho, vg), vg);
    const __m256d vms = _mm256_add_pd(_mm256_mul_pd(vrho, _mm256_loadu_pd(ms + i)), sq);
    _mm256_storeu_pd(ms + i, vms);
    const __m256d denom = _mm256_add_pd(_mm256_sqrt_pd(vms), veps);
    const __m256d step = _mm256_div_pd(_mm256_mul_pd(vlr, vg), denom);
    _mm256_storeu_pd(p + i, _mm256_sub_pd(_mm256_loadu_pd(p + i), step));
  }
  for (; i < n; ++i) {
    ms[i] = rho * ms[i] + (1.0 - rho) * g[i] * g[i];
    p[i] -= lr * g[i] / (__builtin_sqrt(ms[i]) + eps);
  }
}

#undef EWAE_AVX2

}  // namespace

bool cpu_has_avx2() {
  __builtin_cpu_init();
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
}

const KernelTable& avx2_table() {
  if (!cpu_has_avx2()) throw std::runtime_error("AVX2/FMA not supported on this CPU");
  static const KernelTable table{dot_avx2,        axpy_avx2,    gemv_avx2,
                                 gemv_t_acc_avx2, ger_acc_avx2, rmsprop_avx2};
  return table;
}

#else  // !EWAE_HAVE_X86

bool cpu_has_avx2() { return false; }

const KernelTable& avx2_table() {
  throw std::runtime_error("AVX2 kernels are not available on this architecture");
}

#endif

}  // namespace ewae::kernels
