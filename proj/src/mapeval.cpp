// src/mapeval.cpp

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

#include "abx/mapeval.hpp"

#include <algorithm>
#include <cstdio>

#include <json.hpp>

#include "abx/parallel.hpp"
#include "abx/simd.hpp"

namespace abx {

std::vector<float> mean_pool(const TokenFrames& seq) {
  if (seq.n_frames == 0) {
    throw ValidationError("cannot pool an empty token");
  }
  const std::size_t dim = seq.dim();
  const auto& axpy = simd::active().axpy;
  std::vector<double> acc(dim, 0.0);
  for (std::size_t i = 0; i < seq.n_frames; ++i) {
    axpy(1.0, seq.frame(i).data(), acc.data(), dim);
  }
  std::vector<float> out(dim);
  const double n = static_cast<double>(seq.n_frames);
  for (std::size_t j = 0; j < dim; ++j) {
    out[j] = static_cast<float>(acc[j] / n);
  }
  return out;
}

std::vector<AlignmentSegment> read_word_alignments(
    const std::filesystem::path& path) {
  return read_alignments_with_label(path, "word");
}

std::vector<WordToken> build_word_tokens(
    const FeatureMap& features,
    const std::vector<AlignmentSegment>& word_segments) {
  std::vector<WordToken> out;
  out.reserve(word_segments.size());
  for (const AlignmentSegment& seg : word_segments) {
    auto it = features.find(seg.utterance_id);
    if (it == features.end()) {
      throw ValidationError("no features for utterance '" + seg.utterance_id +
                            "'");
    }
    TokenFrames tok = extract_token(it->second, seg);
    WordToken word;
    word.word_type = seg.phone;
    word.embedding = mean_pool(tok);
    word.utterance_id = seg.utterance_id;
    word.onset_s = seg.onset_s;
    word.offset_s = seg.offset_s;
    word.speaker_id = seg.speaker_id;
    out.push_back(std::move(word));
  }
  return out;
}

MapResult map_score(const std::vector<WordToken>& tokens,
                    const FrameDissimSpec& frame, unsigned workers) {
  if (tokens.size() < 2) {
    throw EmptyEvaluationError("need at least two word tokens");
  }
  const std::size_t dim = tokens[0].embedding.size();
  for (const WordToken& t : tokens) {
    if (t.embedding.size() != dim) {
      throw ValidationError("word embedding dimension mismatch for type '" +
                            t.word_type + "'");
    }
  }

  struct Entry {
    double d;
    bool same;
  };
  const std::size_t n = tokens.size();
  const std::size_t n_pairs = n * (n - 1) / 2;
  std::vector<Entry> entries(n_pairs);

  // Row offsets into the flattened upper triangle.
  std::vector<std::size_t> offset(n, 0);
  for (std::size_t i = 1; i < n; ++i) {
    offset[i] = offset[i - 1] + (n - i);
  }

  parallel_for(n - 1, workers, [&](std::size_t i) {
    std::size_t k = offset[i];
    for (std::size_t j = i + 1; j < n; ++j, ++k) {
      double d;
      if (frame.kind == FrameDissim::Angular) {
        d = angular_dissim(tokens[i].embedding, tokens[j].embedding);
      } else {
        d = kl_dissim(tokens[i].embedding, tokens[j].embedding,
                      frame.epsilon);
      }
      entries[k] = Entry{d, tokens[i].word_type == tokens[j].word_type};
    }
  });

  MapResult result;
  result.n_tokens = n;
  result.n_pairs = n_pairs;
  for (const Entry& e : entries) result.n_same_pairs += e.same;
  if (result.n_same_pairs == 0) {
    throw EmptyEvaluationError("no same-type word pair in the corpus");
  }

  // Pessimistic ties: at equal dissimilarity, different-type pairs come
  // first. Relative order inside a (value, label) group cannot change the
  // score, so this sort fully determines it.
  std::sort(entries.begin(), entries.end(), [](const Entry& a, const Entry& b) {
    if (a.d != b.d) return a.d < b.d;
    return a.same < b.same;
  });

  double ap = 0.0;
  std::uint64_t positives_seen = 0;
  for (std::size_t rank = 1; rank <= entries.size(); ++rank) {
    if (entries[rank - 1].same) {
      ++positives_seen;
      ap += static_cast<double>(positives_seen) / static_cast<double>(rank);
    }
  }
  result.map_percent =
      100.0 * ap / static_cast<double>(result.n_same_pairs);
  return result;
}

std::string map_report_to_json(const MapResult& result,
                               const FrameDissimSpec& frame,
                               const std::string& system) {
  nlohmann::json j;
  j["system"] = system;
  j["metric"] = "MAP";
  j["config"] = {
      {"frame_dissim", to_string(frame.kind)},
      {"epsilon", frame.epsilon},
      {"tie_rule", "different-type before same-type at equal dissimilarity"},
  };
  j["map_percent"] = result.map_percent;
  j["n_tokens"] = result.n_tokens;
  j["n_pairs"] = result.n_pairs;
  j["n_same_pairs"] = result.n_same_pairs;
  return j.dump(2) + "\n";
}

std::string map_report_csv_header() {
  return "metric,frame_dissim,map_percent,n_tokens,n_same_pairs\n";
}

std::string map_report_csv_row(const MapResult& result,
                               const FrameDissimSpec& frame) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.2f", result.map_percent);
  return std::string("MAP,") + to_string(frame.kind) + "," + buf + "," +
         std::to_string(result.n_tokens) + "," +
         std::to_string(result.n_same_pairs) + "\n";
}

}  // namespace abx
