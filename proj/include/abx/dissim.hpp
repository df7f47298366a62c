// include/abx/dissim.hpp

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

#ifndef ABX_DISSIM_HPP_
#define ABX_DISSIM_HPP_

#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "abx/types.hpp"

namespace abx {

enum class FrameDissim { Angular, KlDiv };

struct FrameDissimSpec {
  FrameDissim kind = FrameDissim::Angular;
  double epsilon = 1e-10;  // floor for the KL projection onto the simplex
};

enum class SeqDissim { Dtw, HammingPool };

std::string to_string(FrameDissim k);
std::string to_string(SeqDissim k);

// arccos of the cosine of u and v, scaled into [0, 1]. Zero-norm inputs
// are defined (0 if both zero, 1 if only one is) so silent frames never
// produce NaN. Symmetric.
double angular_dissim(std::span<const float> u, std::span<const float> v);

// KL divergence of the floored-renormalized inputs:
//   sum_i u'_i * ln(u'_i / v'_i),  u' = max(u, eps) / sum(max(u, eps)).
// Directional: the first argument is the reference distribution. Entries
// below -eps are rejected.
double kl_dissim(std::span<const float> u, std::span<const float> v,
                 double epsilon = 1e-10);

// Minimum over monotone alignment paths (steps down/right/diagonal from
// (0,0) to (m-1,n-1)) of the mean frame cost along the path. The path
// length in points is the denominator, and the minimum is taken over the
// normalized value itself, found exactly by a dynamic program stratified
// on path length. Ties between paths cannot change the returned value.
double dtw_normalized_avg(
    std::size_t m, std::size_t n,
    const std::function<double(std::size_t, std::size_t)>& frame_cost);

double dtw_dissim(const TokenFrames& seq_a, const TokenFrames& seq_x,
                  const FrameDissimSpec& frame);

// Center-peaked window weights, normalized to sum 1. n = 1 gives {1}.
std::vector<double> hamming_weights(std::size_t n);

// Window-weighted average of the token's frames. For the KlDiv frame
// kind the pooled vector is floored and renormalized so it stays a
// distribution.
std::vector<float> hamming_pool(const TokenFrames& seq);
std::vector<float> hamming_pool(const TokenFrames& seq,
                                const FrameDissimSpec& frame);

double pooled_dissim(const TokenFrames& seq_a, const TokenFrames& seq_x,
                     const FrameDissimSpec& frame);

// Token-level dissimilarity engine used by the scorer. Tokens are indexed
// by their id; per-token data (frame norms, simplex projections, pooled
// vectors) is prepared once. Results are identical to the standalone
// dtw_dissim / pooled_dissim calls.
//
// operator() is safe to call concurrently. The memo cache is sharded;
// concurrent writers always store identical values, so results do not
// depend on thread count. Disabling memoization must not change any
// result, only speed.
class TokenDissim {
 public:
  TokenDissim(std::vector<const TokenFrames*> tokens_by_id,
              const FrameDissimSpec& frame, SeqDissim seq,
              bool memoize = true);
  ~TokenDissim();

  TokenDissim(const TokenDissim&) = delete;
  TokenDissim& operator=(const TokenDissim&) = delete;

  // Dissimilarity d(first, second); directional for KlDiv.
  double operator()(std::uint32_t first_id, std::uint32_t second_id) const;

  std::size_t n_tokens() const;
  std::size_t cache_entries() const;  // 0 when memoization is off

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace abx

#endif  // ABX_DISSIM_HPP_
