// include/abx/featureio.hpp

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

#ifndef ABX_FEATUREIO_HPP_
#define ABX_FEATUREIO_HPP_

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "abx/types.hpp"

namespace abx {

using FeatureMap = std::map<std::string, FeatureMatrix>;

// Time alignment TSV. Header row is required:
//   utterance_id<TAB>speaker_id<TAB>phone<TAB>onset<TAB>offset
// Rows may arrive in any order; the result is sorted by (utterance_id,
// onset) and prev/next context labels are filled in per utterance, with
// "#" at utterance edges. Throws ParseError (with line number) or
// ValidationError (overlap, bad times).
std::vector<AlignmentSegment> read_alignments(
    const std::filesystem::path& path);

// Same parser with a different label column name ("word" for word-level
// alignments). The label lands in AlignmentSegment::phone.
std::vector<AlignmentSegment> read_alignments_with_label(
    const std::filesystem::path& path, const std::string& label_column);

void write_alignments(const std::vector<AlignmentSegment>& segments,
                      const std::filesystem::path& path,
                      const std::string& label_column = "phone");

// Binary feature archive:
//   magic "ABXF", u32 version=1, f64 frame_period_s, u32 n_utterances,
//   then per utterance: u32 id_len, id bytes, u32 n_frames, u32 n_dims,
//   n_frames*n_dims little-endian f32, row-major.
// Utterances are written sorted by id, so equal inputs give equal bytes.
//
// read_features also accepts a directory of <utterance_id>.txt files with
// one whitespace-separated frame per line; text_frame_period_s applies to
// that fallback only (the binary header carries its own period).
FeatureMap read_features(const std::filesystem::path& path,
                         double text_frame_period_s = kDefaultFramePeriod);

void write_features(const FeatureMap& features,
                    const std::filesystem::path& path);

// Frames whose center time (i + 0.5) * frame_period_s falls in
// [onset, offset). If no center lands inside, the frame nearest the
// segment midpoint is used, so a token is never empty. Throws
// ValidationError if the segment misses the matrix entirely (beyond one
// frame period of slack) or names a different utterance.
TokenFrames extract_token(const FeatureMatrix& features,
                          const AlignmentSegment& segment);

}  // namespace abx

#endif  // ABX_FEATUREIO_HPP_
