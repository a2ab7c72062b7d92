//---------------------------------------------------------------------------//
// Copyright 2026 the maglab developers.
// SPDX-License-Identifier: Apache-2.0
//---------------------------------------------------------------------------//
//! \file kernels_avx2.cpp
//! AVX2 variants. This translation unit is compiled with -mavx2 -mfma and
//! must only be entered after a runtime CPU check.
//---------------------------------------------------------------------------//
#include "maglab/kernels.hpp"

#include <algorithm>
#include <cmath>

#if defined(__AVX2__)
#include <immintrin.h>
#endif

namespace maglab::kernels::avx2 {

#if defined(__AVX2__)

namespace {
inline double hmax(__m256d v) {
  __m128d lo = _mm256_castpd256_pd128(v);
  __m128d hi = _mm256_extractf128_pd(v, 1);
  lo = _mm_max_pd(lo, hi);
  hi = _mm_unpackhi_pd(lo, lo);
  return _mm_cvtsd_f64(_mm_max_sd(lo, hi));
}

inline double hsum(__m256d v) {
  __m128d lo = _mm256_castpd256_pd128(v);
  __m128d hi = _mm256_extractf128_pd(v, 1);
  lo = _mm_add_pd(lo, hi);
  hi = _mm_unpackhi_pd(lo, lo);
  return _mm_cvtsd_f64(_mm_add_sd(lo, hi));
}
}  // namespace

double max_spectral_norm(const Mat2Batch& m) {
  const std::size_t n = m.a.size();
  const __m256d half = _mm256_set1_pd(0.5);
  const __m256d four = _mm256_set1_pd(4.0);
  const __m256d zero = _mm256_setzero_pd();
  __m256d best = zero;
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d a = _mm256_loadu_pd(m.a.data() + i);
    const __m256d b = _mm256_loadu_pd(m.b.data() + i);
    const __m256d c = _mm256_loadu_pd(m.c.data() + i);
    const __m256d d = _mm256_loadu_pd(m.d.data() + i);
    __m256d s = _mm256_mul_pd(a, a);
    s = _mm256_fmadd_pd(b, b, s);
    s = _mm256_fmadd_pd(c, c, s);
    s = _mm256_fmadd_pd(d, d, s);
    const __m256d det = _mm256_fmsub_pd(a, d, _mm256_mul_pd(b, c));
    const __m256d q = _mm256_mul_pd(four, _mm256_mul_pd(det, det));
    const __m256d disc = _mm256_sqrt_pd(_mm256_max_pd(zero, _mm256_fmsub_pd(s, s, q)));
    best = _mm256_max_pd(best, _mm256_sqrt_pd(_mm256_mul_pd(half, _mm256_add_pd(s, disc))));
  }
  double out = hmax(best);
  if (i < n) {
    Mat2Batch tail{m.a.subspan(i), m.b.subspan(i), m.c.subspan(i), m.d.subspan(i)};
    out = std::max(out, scalar::max_spectral_norm(tail));
  }
  return out;
}

double weighted_sum(std::span<const double> values, std::span<const double> weights) {
  const std::size_t n = values.size();
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(values.data() + i),
                           _mm256_loadu_pd(weights.data() + i), acc0);
    acc1 = _mm256_fmadd_pd(_mm256_loadu_pd(values.data() + i + 4),
                           _mm256_loadu_pd(weights.data() + i + 4), acc1);
  }
  double out = hsum(_mm256_add_pd(acc0, acc1));
  for (; i < n; ++i) out += values[i] * weights[i];
  return out;
}

double max_abs(std::span<const double> values) {
  const std::size_t n = values.size();
  const __m256d sign = _mm256_set1_pd(-0.0);
  __m256d best = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4)
    best = _mm256_max_pd(best, _mm256_andnot_pd(sign, _mm256_loadu_pd(values.data() + i)));
  double out = hmax(best);
  for (; i < n; ++i) out = std::max(out, std::abs(values[i]));
  return out;
}

#else

double max_spectral_norm(const Mat2Batch& m) { return scalar::max_spectral_norm(m); }
double weighted_sum(std::span<const double> v, std::span<const double> w) {
  return scalar::weighted_sum(v, w);
}
double max_abs(std::span<const double> v) { return scalar::max_abs(v); }

#endif

}  // namespace maglab::kernels::avx2
