// include/abx/synthgen.hpp

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

#ifndef ABX_SYNTHGEN_HPP_
#define ABX_SYNTHGEN_HPP_

#include <cstdint>
#include <vector>

#include "abx/featureio.hpp"
#include "abx/types.hpp"

namespace abx {

// Synthetic corpus controls. Each phone gets a fixed random unit
// prototype; a frame of phone q between neighbours l and r is
//   (1 - gamma) * proto(q) + (gamma / 2) * (proto(l) + proto(r))
//     + speaker_offset + N(0, sigma^2)
// with a dedicated boundary prototype standing in for missing neighbours
// at utterance edges. Consecutive phones are grouped into fixed-length
// pseudo-words for the word-level alignment. Fully deterministic given
// rng_seed.
struct SynthSpec {
  std::size_t n_phones = 5;
  std::size_t n_speakers = 2;
  std::size_t n_utterances = 20;
  std::size_t phones_per_utterance = 10;
  std::size_t dim = 8;
  double context_coloring = 0.0;  // gamma in [0, 1]
  double speaker_strength = 0.0;  // scale of per-speaker offset vectors
  double noise_sigma = 0.0;
  std::size_t min_frames_per_phone = 4;
  std::size_t max_frames_per_phone = 8;
  double frame_period_s = kDefaultFramePeriod;
  std::size_t phones_per_word = 2;
  // All phones share one prototype; with noise this yields a corpus where
  // phones are indistinguishable by construction.
  bool shared_prototype = false;
  std::uint64_t rng_seed = 0;

  void validate() const;
};

struct SynthCorpus {
  FeatureMap features;
  std::vector<AlignmentSegment> phone_alignments;
  std::vector<AlignmentSegment> word_alignments;  // phone field = word label
};

SynthCorpus generate(const SynthSpec& spec);

}  // namespace abx

#endif  // ABX_SYNTHGEN_HPP_
