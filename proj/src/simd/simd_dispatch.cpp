// src/simd/simd_dispatch.cpp

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

#include "abx/simd.hpp"

#include <cstdlib>
#include <string>

#include "abx/types.hpp"

namespace abx::simd {

namespace detail {

double dot_scalar(const float*, const float*, std::size_t);
double sumsq_scalar(const float*, std::size_t);
void axpy_scalar(double, const float*, double*, std::size_t);

#if defined(__x86_64__) || defined(__i386__)
double dot_avx2(const float*, const float*, std::size_t);
double sumsq_avx2(const float*, std::size_t);
void axpy_avx2(double, const float*, double*, std::size_t);
#endif

#if defined(__aarch64__)
double dot_neon(const float*, const float*, std::size_t);
double sumsq_neon(const float*, std::size_t);
void axpy_neon(double, const float*, double*, std::size_t);
#endif

}  // namespace detail

namespace {

const Kernels kScalar{detail::dot_scalar, detail::sumsq_scalar,
                      detail::axpy_scalar};

#if defined(__x86_64__) || defined(__i386__)
const Kernels kAvx2{detail::dot_avx2, detail::sumsq_avx2, detail::axpy_avx2};
#endif

#if defined(__aarch64__)
const Kernels kNeon{detail::dot_neon, detail::sumsq_neon, detail::axpy_neon};
#endif

bool isa_supported(Isa isa) {
  switch (isa) {
    case Isa::Scalar:
      return true;
    case Isa::Avx2:
#if defined(__x86_64__) || defined(__i386__)
      return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
      return false;
#endif
    case Isa::Neon:
#if defined(__aarch64__)
      return true;  // NEON is baseline on aarch64
#else
      return false;
#endif
  }
  return false;
}

Isa select_isa() {
  const char* env = std::getenv("ABXEVAL_SIMD");
  std::string want = env ? env : "auto";
  if (want == "scalar") return Isa::Scalar;
  if (want == "avx2" && isa_supported(Isa::Avx2)) return Isa::Avx2;
  if (want == "neon" && isa_supported(Isa::Neon)) return Isa::Neon;
  // auto (or an unavailable request): best supported variant.
  if (isa_supported(Isa::Avx2)) return Isa::Avx2;
  if (isa_supported(Isa::Neon)) return Isa::Neon;
  return Isa::Scalar;
}

}  // namespace

const Kernels& kernels_for(Isa isa) {
  switch (isa) {
    case Isa::Scalar:
      return kScalar;
    case Isa::Avx2:
#if defined(__x86_64__) || defined(__i386__)
      if (isa_supported(Isa::Avx2)) return kAvx2;
#endif
      break;
    case Isa::Neon:
#if defined(__aarch64__)
      return kNeon;
#endif
      break;
  }
  throw ValidationError("simd variant not available on this machine: " +
                        isa_name(isa));
}

Isa active_isa() {
  static const Isa isa = select_isa();
  return isa;
}

const Kernels& active() { return kernels_for(active_isa()); }

std::vector<Isa> available() {
  std::vector<Isa> out{Isa::Scalar};
  if (isa_supported(Isa::Avx2)) out.push_back(Isa::Avx2);
  if (isa_supported(Isa::Neon)) out.push_back(Isa::Neon);
  return out;
}

std::string isa_name(Isa isa) {
  switch (isa) {
    case Isa::Scalar:
      return "scalar";
    case Isa::Avx2:
      return "avx2";
    case Isa::Neon:
      return "neon";
  }
  return "unknown";
}

}  // namespace abx::simd
