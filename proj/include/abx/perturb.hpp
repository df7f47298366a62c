// include/abx/perturb.hpp

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

#ifndef ABX_PERTURB_HPP_
#define ABX_PERTURB_HPP_

#include <cstdint>
#include <string>
#include <vector>

#include "abx/featureio.hpp"
#include "abx/types.hpp"

namespace abx {

struct PhoneInventory {
  std::vector<std::string> labels;  // sorted, unique

  static PhoneInventory from_segments(
      const std::vector<AlignmentSegment>& segments);

  // Throws ValidationError if the label is unknown.
  std::size_t index_of(const std::string& label) const;
};

struct PerturbSpec {
  unsigned shift_frames = 0;   // k, rightward shift amount
  double shift_prob = 0.5;     // p, per-boundary shift probability
  unsigned filter_width = 1;   // odd window width, 1 = identity
  std::uint64_t rng_seed = 0;

  void validate() const;
};

// One-hot frame labels for a single utterance: frame i is hot at the
// inventory index of the phone whose segment contains the frame center;
// frames in alignment gaps are all zero.
FeatureMatrix one_hot_encode(const std::vector<AlignmentSegment>& segments,
                             const PhoneInventory& inventory,
                             const std::string& utterance_id,
                             double frame_period_s, std::size_t n_frames);

// One-hot archive for a whole corpus. Per utterance, n_frames is the
// rounded max offset over that utterance's segments.
FeatureMap one_hot_corpus(const std::vector<AlignmentSegment>& segments,
                          const PhoneInventory& inventory,
                          double frame_period_s);

// Moves each internal boundary of one utterance right by
// shift_frames * frame_period_s with probability shift_prob, drawn from a
// counter generator keyed on (seed, utterance, boundary index). A shifted
// boundary is clamped so the segment to its right keeps at least one
// frame period (against that boundary's own, possibly shifted, right
// neighbour). Utterance start and end never move. Input must be sorted
// and non-overlapping; output stays so.
std::vector<AlignmentSegment> shift_boundaries(
    const std::vector<AlignmentSegment>& segments, const PerturbSpec& spec,
    double frame_period_s);

// Applies shift_boundaries utterance by utterance.
std::vector<AlignmentSegment> shift_boundaries_corpus(
    const std::vector<AlignmentSegment>& segments, const PerturbSpec& spec,
    double frame_period_s);

// Replaces each frame with the mean of the surrounding width-frame
// window, truncated at the matrix edges. Width must be odd; 1 is the
// identity.
FeatureMatrix square_filter(const FeatureMatrix& features, unsigned width);

}  // namespace abx

#endif  // ABX_PERTURB_HPP_
