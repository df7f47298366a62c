// include/abx/types.hpp

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

#ifndef ABX_TYPES_HPP_
#define ABX_TYPES_HPP_

#include <cstddef>
#include <cstdint>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace abx {

// Error taxonomy; the CLI maps these onto exit codes.
class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Raised when an evaluation has no tasks left to score.
class EmptyEvaluationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

constexpr double kDefaultFramePeriod = 0.01;

// Label used for phone context at utterance edges.
inline const std::string kBoundaryLabel = "#";

/// One utterance's frame-level representation: n_frames x n_dims, row-major
/// 32-bit floats at a fixed frame period.
struct FeatureMatrix {
  std::string utterance_id;
  double frame_period_s = kDefaultFramePeriod;
  std::size_t n_frames = 0;
  std::size_t n_dims = 0;
  std::vector<float> data;  // row-major, n_frames * n_dims

  std::span<const float> frame(std::size_t i) const {
    return {data.data() + i * n_dims, n_dims};
  }
  std::span<float> mutable_frame(std::size_t i) {
    return {data.data() + i * n_dims, n_dims};
  }

  // Throws ValidationError on shape/finite/period violations.
  void validate() const;
};

/// One phone (or word) token from a time alignment, with the labels of the
/// immediately preceding and following tokens ("#" at utterance edges).
struct AlignmentSegment {
  std::string utterance_id;
  std::string speaker_id;
  std::string phone;
  double onset_s = 0.0;
  double offset_s = 0.0;
  std::string prev_phone = kBoundaryLabel;
  std::string next_phone = kBoundaryLabel;
};

constexpr std::uint32_t kNoTokenId = std::numeric_limits<std::uint32_t>::max();

/// A token's slice of its utterance matrix. Non-owning: the FeatureMatrix
/// must outlive the token.
struct TokenFrames {
  AlignmentSegment segment;
  const FeatureMatrix* features = nullptr;
  std::size_t first_frame = 0;
  std::size_t n_frames = 0;
  std::uint32_t id = kNoTokenId;

  std::span<const float> frame(std::size_t i) const {
    return features->frame(first_frame + i);
  }
  std::size_t dim() const { return features->n_dims; }
};

}  // namespace abx

#endif  // ABX_TYPES_HPP_
