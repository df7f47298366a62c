// include/abx/mapeval.hpp

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

#ifndef ABX_MAPEVAL_HPP_
#define ABX_MAPEVAL_HPP_

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "abx/dissim.hpp"
#include "abx/featureio.hpp"
#include "abx/types.hpp"

namespace abx {

struct WordToken {
  std::string word_type;
  std::vector<float> embedding;  // mean-pooled frames
  std::string utterance_id;
  double onset_s = 0.0;
  double offset_s = 0.0;
  std::string speaker_id;
};

// Unweighted time average of the token's frames.
std::vector<float> mean_pool(const TokenFrames& seq);

// Word-level alignment TSV: same schema as the phone alignments with a
// `word` column in place of `phone`.
std::vector<AlignmentSegment> read_word_alignments(
    const std::filesystem::path& path);

// Extracts and mean-pools every word segment.
std::vector<WordToken> build_word_tokens(
    const FeatureMap& features,
    const std::vector<AlignmentSegment>& word_segments);

struct MapResult {
  double map_percent = 0.0;
  std::uint64_t n_tokens = 0;
  std::uint64_t n_pairs = 0;
  std::uint64_t n_same_pairs = 0;
};

// Ranked average precision for same/different word-type classification.
// All unordered token pairs are ordered by embedding dissimilarity; ties
// put different-type pairs first (the pessimistic rule), which makes the
// score deterministic. The value is 100 times the mean, over same-type
// pairs, of the precision at that pair's rank, which equals the
// step-integrated area under the precision-recall curve of that ranking.
// Throws EmptyEvaluationError when there is no same-type pair.
MapResult map_score(const std::vector<WordToken>& tokens,
                    const FrameDissimSpec& frame, unsigned workers = 1);

std::string map_report_to_json(const MapResult& result,
                               const FrameDissimSpec& frame,
                               const std::string& system = "system");
std::string map_report_csv_header();
std::string map_report_csv_row(const MapResult& result,
                               const FrameDissimSpec& frame);

}  // namespace abx

#endif  // ABX_MAPEVAL_HPP_
