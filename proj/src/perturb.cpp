// src/perturb.cpp

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

#include "abx/perturb.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "abx/rng.hpp"
#include "abx/simd.hpp"

namespace abx {

PhoneInventory PhoneInventory::from_segments(
    const std::vector<AlignmentSegment>& segments) {
  std::set<std::string> labels;
  for (const AlignmentSegment& seg : segments) labels.insert(seg.phone);
  PhoneInventory inv;
  inv.labels.assign(labels.begin(), labels.end());
  return inv;
}

std::size_t PhoneInventory::index_of(const std::string& label) const {
  auto it = std::lower_bound(labels.begin(), labels.end(), label);
  if (it == labels.end() || *it != label) {
    throw ValidationError("phone '" + label + "' not in the inventory");
  }
  return static_cast<std::size_t>(it - labels.begin());
}

void PerturbSpec::validate() const {
  if (filter_width == 0 || filter_width % 2 == 0) {
    throw ValidationError("filter width must be odd, got " +
                          std::to_string(filter_width));
  }
  if (shift_prob < 0.0 || shift_prob > 1.0) {
    throw ValidationError("shift probability must lie in [0, 1]");
  }
}

FeatureMatrix one_hot_encode(const std::vector<AlignmentSegment>& segments,
                             const PhoneInventory& inventory,
                             const std::string& utterance_id,
                             double frame_period_s, std::size_t n_frames) {
  FeatureMatrix m;
  m.utterance_id = utterance_id;
  m.frame_period_s = frame_period_s;
  m.n_frames = n_frames;
  m.n_dims = inventory.labels.size();
  m.data.assign(n_frames * m.n_dims, 0.0f);

  for (const AlignmentSegment& seg : segments) {
    const std::size_t idx = inventory.index_of(seg.phone);
    for (std::size_t i = 0; i < n_frames; ++i) {
      const double center =
          (static_cast<double>(i) + 0.5) * frame_period_s;
      if (center >= seg.onset_s && center < seg.offset_s) {
        m.data[i * m.n_dims + idx] = 1.0f;
      }
    }
  }
  return m;
}

FeatureMap one_hot_corpus(const std::vector<AlignmentSegment>& segments,
                          const PhoneInventory& inventory,
                          double frame_period_s) {
  std::map<std::string, std::vector<AlignmentSegment>> by_utt;
  for (const AlignmentSegment& seg : segments) {
    by_utt[seg.utterance_id].push_back(seg);
  }
  FeatureMap out;
  for (const auto& [utt, segs] : by_utt) {
    double max_offset = 0.0;
    for (const AlignmentSegment& s : segs) {
      max_offset = std::max(max_offset, s.offset_s);
    }
    const std::size_t n_frames = static_cast<std::size_t>(
        std::llround(max_offset / frame_period_s));
    out.emplace(utt, one_hot_encode(segs, inventory, utt, frame_period_s,
                                    std::max<std::size_t>(n_frames, 1)));
  }
  return out;
}

std::vector<AlignmentSegment> shift_boundaries(
    const std::vector<AlignmentSegment>& segments, const PerturbSpec& spec,
    double frame_period_s) {
  spec.validate();
  if (segments.size() < 2 || spec.shift_frames == 0) return segments;
  const std::string& utt = segments.front().utterance_id;
  for (const AlignmentSegment& seg : segments) {
    if (seg.utterance_id != utt) {
      throw ValidationError(
          "shift_boundaries expects segments of a single utterance");
    }
  }

  const double shift = spec.shift_frames * frame_period_s;
  rng::Key key = rng::chain(rng::chain(rng::key(spec.rng_seed), "shift"), utt);

  std::vector<AlignmentSegment> out = segments;
  // Boundary i sits between segments i-1 and i and moves as one unit
  // (offset of the left segment, onset of the right). Walking right to
  // left lets the clamp see the final position of the next boundary, so
  // the segment to the right always keeps one frame period where the
  // input allowed one.
  for (std::size_t i = segments.size() - 1; i >= 1; --i) {
    const bool move = rng::uniform01(key, i) < spec.shift_prob;
    if (!move) continue;
    double desired = segments[i].onset_s + shift;
    const double right_edge = out[i].offset_s;  // final (i+1 already done)
    double clamped =
        std::max(segments[i].onset_s,
                 std::min(desired, right_edge - frame_period_s));
    const double delta = clamped - segments[i].onset_s;
    out[i].onset_s = segments[i].onset_s + delta;
    out[i - 1].offset_s = segments[i - 1].offset_s + delta;
  }
  return out;
}

std::vector<AlignmentSegment> shift_boundaries_corpus(
    const std::vector<AlignmentSegment>& segments, const PerturbSpec& spec,
    double frame_period_s) {
  std::vector<AlignmentSegment> out;
  out.reserve(segments.size());
  std::size_t start = 0;
  while (start < segments.size()) {
    std::size_t end = start;
    while (end < segments.size() &&
           segments[end].utterance_id == segments[start].utterance_id) {
      ++end;
    }
    std::vector<AlignmentSegment> utt(segments.begin() + start,
                                      segments.begin() + end);
    auto shifted = shift_boundaries(utt, spec, frame_period_s);
    out.insert(out.end(), shifted.begin(), shifted.end());
    start = end;
  }
  return out;
}

FeatureMatrix square_filter(const FeatureMatrix& features, unsigned width) {
  if (width == 0 || width % 2 == 0) {
    throw ValidationError("filter width must be odd, got " +
                          std::to_string(width));
  }
  if (width == 1) return features;
  const std::size_t half = width / 2;
  const std::size_t n = features.n_frames;
  const std::size_t d = features.n_dims;
  const auto& axpy = simd::active().axpy;

  FeatureMatrix out = features;
  std::vector<double> acc(d);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t lo = i >= half ? i - half : 0;
    const std::size_t hi = std::min(n - 1, i + half);
    std::fill(acc.begin(), acc.end(), 0.0);
    for (std::size_t r = lo; r <= hi; ++r) {
      axpy(1.0, features.frame(r).data(), acc.data(), d);
    }
    const double count = static_cast<double>(hi - lo + 1);
    auto row = out.mutable_frame(i);
    for (std::size_t j = 0; j < d; ++j) {
      row[j] = static_cast<float>(acc[j] / count);
    }
  }
  return out;
}

}  // namespace abx
