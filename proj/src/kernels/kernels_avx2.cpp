// AVX2+FMA variants of the dense kernels. Compiled with -mavx2 -mfma and
// only ever called after a runtime CPU check, so the unguarded intrinsics
// are safe.

#include "gus/kernels.hpp"

#include <immintrin.h>

#include <cmath>
#include <cstdint>

namespace gus::kernels {

namespace {

double dot_avx2(const double* a, const double* b, std::size_t n) {
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc0);
    acc1 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i + 4), _mm256_loadu_pd(b + i + 4), acc1);
  }
  if (i + 4 <= n) {
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc0);
    i += 4;
  }
  const __m256d acc = _mm256_add_pd(acc0, acc1);
  __m128d lo = _mm256_castpd256_pd128(acc);
  const __m128d hi = _mm256_extractf128_pd(acc, 1);
  lo = _mm_add_pd(lo, hi);
  double sum = _mm_cvtsd_f64(_mm_add_sd(lo, _mm_unpackhi_pd(lo, lo)));
  for (; i < n; ++i) sum += a[i] * b[i];
  return sum;
}

void abs_diff_avx2(const double* a, const double* b, double* out, std::size_t n) {
  const __m256d mask = _mm256_castsi256_pd(_mm256_set1_epi64x(0x7FFFFFFFFFFFFFFFLL));
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d d = _mm256_sub_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i));
    _mm256_storeu_pd(out + i, _mm256_and_pd(d, mask));
  }
  for (; i < n; ++i) out[i] = std::fabs(a[i] - b[i]);
}

void hadamard_avx2(const double* a, const double* b, double* out, std::size_t n) {
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    _mm256_storeu_pd(out + i, _mm256_mul_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i)));
  }
  for (; i < n; ++i) out[i] = a[i] * b[i];
}

void relu_avx2(double* x, std::size_t n) {
  const __m256d zero = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    // max_pd(v, 0) lane-wise matches the scalar (v > 0 ? v : 0) for
    // negative zero and NaN inputs, keeping variants bitwise equal.
    _mm256_storeu_pd(x + i, _mm256_max_pd(_mm256_loadu_pd(x + i), zero));
  }
  for (; i < n; ++i) x[i] = x[i] > 0.0 ? x[i] : 0.0;
}

void matvec_bias_avx2(const double* w, std::size_t rows, std::size_t cols,
                      const double* x, const double* bias, double* out) {
  for (std::size_t r = 0; r < rows; ++r) {
    out[r] = dot_avx2(w + r * cols, x, cols) + bias[r];
  }
}

constexpr Ops kAvx2Ops{dot_avx2, abs_diff_avx2, hadamard_avx2, relu_avx2,
                       matvec_bias_avx2};

bool detect_avx2_fma() {
#if defined(__GNUC__) || defined(__clang__)
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

}  // namespace

bool avx2_available() {
  static const bool ok = detect_avx2_fma();
  return ok;
}

const Ops* avx2_ops() { return avx2_available() ? &kAvx2Ops : nullptr; }

}  // namespace gus::kernels
