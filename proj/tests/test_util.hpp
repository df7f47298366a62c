// tests/test_util.hpp

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

#ifndef ABX_TESTS_TEST_UTIL_HPP_
#define ABX_TESTS_TEST_UTIL_HPP_

#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <string>
#include <vector>

#include "abx/types.hpp"

namespace abx::test {

// Row-major frame matrix from literal rows.
inline FeatureMatrix make_matrix(
    std::initializer_list<std::initializer_list<float>> rows,
    const std::string& id = "utt", double frame_period = 0.01) {
  FeatureMatrix m;
  m.utterance_id = id;
  m.frame_period_s = frame_period;
  m.n_frames = rows.size();
  for (const auto& row : rows) {
    m.n_dims = row.size();
    m.data.insert(m.data.end(), row.begin(), row.end());
  }
  return m;
}

// Token view over the whole matrix.
inline TokenFrames whole_token(const FeatureMatrix& m,
                               const std::string& phone = "X") {
  TokenFrames tok;
  tok.segment.utterance_id = m.utterance_id;
  tok.segment.speaker_id = "spk";
  tok.segment.phone = phone;
  tok.segment.onset_s = 0.0;
  tok.segment.offset_s = static_cast<double>(m.n_frames) * m.frame_period_s;
  tok.features = &m;
  tok.first_frame = 0;
  tok.n_frames = m.n_frames;
  return tok;
}

// Unique scratch directory under the system temp dir, wiped on entry.
inline std::filesystem::path scratch_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("abxeval_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

inline std::string slurp(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  return {std::istreambuf_iterator<char>(in),
          std::istreambuf_iterator<char>()};
}

}  // namespace abx::test

#endif  // ABX_TESTS_TEST_UTIL_HPP_
