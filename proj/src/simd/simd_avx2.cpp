// src/simd/simd_avx2.cpp

// Copyright 2026  The abxeval Authors

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

// AVX2 kernels. Floats are widened to double before accumulating so the
// only difference from the scalar reference is summation order. This file
// is compiled with -mavx2 -mfma on x86 only; callers go through the
// dispatcher, which checks CPU support at runtime.

#if defined(__x86_64__) || defined(__i386__)

#include <immintrin.h>

#include <cstddef>

namespace abx::simd::detail {

namespace {

// Lane order is fixed so results are reproducible run to run.
inline double hsum(__m256d v) {
  __m128d lo = _mm256_castpd256_pd128(v);
  __m128d hi = _mm256_extractf128_pd(v, 1);
  __m128d s = _mm_add_pd(lo, hi);
  __m128d swap = _mm_unpackhi_pd(s, s);
  return _mm_cvtsd_f64(_mm_add_sd(s, swap));
}

}  // namespace

double dot_avx2(const float* a, const float* b, std::size_t n) {
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    __m256 av = _mm256_loadu_ps(a + i);
    __m256 bv = _mm256_loadu_ps(b + i);
    __m256d alo = _mm256_cvtps_pd(_mm256_castps256_ps128(av));
    __m256d ahi = _mm256_cvtps_pd(_mm256_extractf128_ps(av, 1));
    __m256d blo = _mm256_cvtps_pd(_mm256_castps256_ps128(bv));
    __m256d bhi = _mm256_cvtps_pd(_mm256_extractf128_ps(bv, 1));
    acc0 = _mm256_fmadd_pd(alo, blo, acc0);
    acc1 = _mm256_fmadd_pd(ahi, bhi, acc1);
  }
  double acc = hsum(_mm256_add_pd(acc0, acc1));
  for (; i < n; ++i) {
    acc += static_cast<double>(a[i]) * static_cast<double>(b[i]);
  }
  return acc;
}

double sumsq_avx2(const float* v, std::size_t n) {
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    __m256 xv = _mm256_loadu_ps(v + i);
    __m256d lo = _mm256_cvtps_pd(_mm256_castps256_ps128(xv));
    __m256d hi = _mm256_cvtps_pd(_mm256_extractf128_ps(xv, 1));
    acc0 = _mm256_fmadd_pd(lo, lo, acc0);
    acc1 = _mm256_fmadd_pd(hi, hi, acc1);
  }
  double acc = hsum(_mm256_add_pd(acc0, acc1));
  for (; i < n; ++i) {
    double x = static_cast<double>(v[i]);
    acc += x * x;
  }
  return acc;
}

void axpy_avx2(double alpha, const float* x, double* acc, std::size_t n) {
  __m256d av = _mm256_set1_pd(alpha);
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    __m256 xv = _mm256_loadu_ps(x + i);
    __m256d lo = _mm256_cvtps_pd(_mm256_castps256_ps128(xv));
    __m256d hi = _mm256_cvtps_pd(_mm256_extractf128_ps(xv, 1));
    __m256d r0 = _mm256_fmadd_pd(av, lo, _mm256_loadu_pd(acc + i));
    __m256d r1 = _mm256_fmadd_pd(av, hi, _mm256_loadu_pd(acc + i + 4));
    _mm256_storeu_pd(acc + i, r0);
    _mm256_storeu_pd(acc + i + 4, r1);
  }
  for (; i < n; ++i) {
    acc[i] += alpha * static_cast<double>(x[i]);
  }
}

}  // namespace abx::simd::detail

#endif  // x86
