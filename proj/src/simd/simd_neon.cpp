// src/simd/simd_neon.cpp

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

// NEON kernels (aarch64). Same widen-to-double scheme as the AVX2 file.

#if defined(__aarch64__)

#include <arm_neon.h>

#include <cstddef>

namespace abx::simd::detail {

double dot_neon(const float* a, const float* b, std::size_t n) {
  float64x2_t acc0 = vdupq_n_f64(0.0);
  float64x2_t acc1 = vdupq_n_f64(0.0);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    float32x4_t av = vld1q_f32(a + i);
    float32x4_t bv = vld1q_f32(b + i);
    float64x2_t alo = vcvt_f64_f32(vget_low_f32(av));
    float64x2_t ahi = vcvt_f64_f32(vget_high_f32(av));
    float64x2_t blo = vcvt_f64_f32(vget_low_f32(bv));
    float64x2_t bhi = vcvt_f64_f32(vget_high_f32(bv));
    acc0 = vfmaq_f64(acc0, alo, blo);
    acc1 = vfmaq_f64(acc1, ahi, bhi);
  }
  float64x2_t s = vaddq_f64(acc0, acc1);
  double acc = vgetq_lane_f64(s, 0) + vgetq_lane_f64(s, 1);
  for (; i < n; ++i) {
    acc += static_cast<double>(a[i]) * static_cast<double>(b[i]);
  }
  return acc;
}

double sumsq_neon(const float* v, std::size_t n) {
  return dot_neon(v, v, n);
}

void axpy_neon(double alpha, const float* x, double* acc, std::size_t n) {
  float64x2_t av = vdupq_n_f64(alpha);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    float32x4_t xv = vld1q_f32(x + i);
    float64x2_t lo = vcvt_f64_f32(vget_low_f32(xv));
    float64x2_t hi = vcvt_f64_f32(vget_high_f32(xv));
    vst1q_f64(acc + i, vfmaq_f64(vld1q_f64(acc + i), av, lo));
    vst1q_f64(acc + i + 2, vfmaq_f64(vld1q_f64(acc + i + 2), av, hi));
  }
  for (; i < n; ++i) {
    acc[i] += alpha * static_cast<double>(x[i]);
  }
}

}  // namespace abx::simd::detail

#endif  // __aarch64__
