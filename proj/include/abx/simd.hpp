// include/abx/simd.hpp

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

#ifndef ABX_SIMD_HPP_
#define ABX_SIMD_HPP_

// Data-parallel inner-loop kernels for the frame dissimilarities.
//
// Inputs are 32-bit float frames; accumulation is in double. Each float
// product is exact in double (24+24 mantissa bits), so scalar and vector
// variants of one kernel differ only in summation order. The active variant
// is picked once per process from CPU capabilities; the scalar variant is
// the reference the others are equivalence-tested against.
//
// Selection is overridable with ABXEVAL_SIMD={auto,scalar,avx2,neon}.

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

namespace abx::simd {

enum class Isa { Scalar, Avx2, Neon };

struct Kernels {
  // sum_i a[i]*b[i]
  double (*dot)(const float* a, const float* b, std::size_t n);
  // sum_i v[i]^2
  double (*sumsq)(const float* v, std::size_t n);
  // acc[i] += alpha * x[i]
  void (*axpy)(double alpha, const float* x, double* acc, std::size_t n);
};

// Variant selected at startup (CPU detection + ABXEVAL_SIMD override).
const Kernels& active();
Isa active_isa();

// Variants usable on this machine; Scalar is always first.
std::vector<Isa> available();

// Kernel table for one ISA. Throws ValidationError if unavailable here.
const Kernels& kernels_for(Isa isa);

std::string isa_name(Isa isa);

}  // namespace abx::simd

#endif  // ABX_SIMD_HPP_
