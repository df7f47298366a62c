// include/abx/itemgen.hpp

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

#ifndef ABX_ITEMGEN_HPP_
#define ABX_ITEMGEN_HPP_

#include <array>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "abx/featureio.hpp"
#include "abx/types.hpp"

namespace abx {

enum class ContextMode { WithinContext, WithoutContext };
enum class SpeakerMode { WithinSpeaker, AcrossSpeaker };

struct ConditionSpec {
  ContextMode context_mode = ContextMode::WithinContext;
  SpeakerMode speaker_mode = SpeakerMode::WithinSpeaker;
  std::uint64_t max_triples_per_task = 0;  // 0 = unlimited
  std::uint64_t rng_seed = 0;
};

std::string to_string(ContextMode m);
std::string to_string(SpeakerMode m);

struct CellKey {
  std::string phone;
  // prev/next are empty in the without-context grouping; the boundary
  // label "#" is an ordinary value, not emptiness.
  std::string prev;
  std::string next;
  std::string speaker;

  auto operator<=>(const CellKey&) const = default;
};

struct AbxCell {
  CellKey key;
  std::vector<TokenFrames> tokens;
};

// One phone contrast: X tokens must come from cell_a's phone. Within
// speaker, cell_x is cell_a and triples exclude a == x. When the full
// triple product exceeds the cap, `sampled` holds a deterministic uniform
// sample without replacement (local token indices a, b, x).
struct AbxTask {
  const AbxCell* cell_a = nullptr;
  const AbxCell* cell_b = nullptr;
  const AbxCell* cell_x = nullptr;
  bool x_is_a = false;
  std::uint64_t full_triple_count = 0;
  std::uint64_t n_triples = 0;
  std::vector<std::array<std::uint32_t, 3>> sampled;
  std::string key;  // stable identity: modes, context, speakers, phones
};

struct TaskSet {
  std::vector<AbxTask> tasks;
  std::uint64_t n_skipped = 0;
};

// Groups tokens into cells keyed by (phone, prev, next, speaker) in the
// within-context mode and (phone, speaker) otherwise. Tokens are assigned
// ids in segment order; cells come back sorted by key. Throws
// ValidationError if an utterance has no features.
std::vector<AbxCell> build_cells(const std::vector<AlignmentSegment>& segments,
                                 const FeatureMap& features,
                                 const ConditionSpec& spec);

// Enumerates tasks over the cells. Within speaker: ordered phone pairs
// sharing (context, speaker), cell_x = cell_a, needs |A| >= 2. Across
// speakers: ordered speaker pairs (S_ab, S_x), A and B from S_ab, X the
// matching phone cell of S_x; tasks whose X cell is missing, or whose
// sizes fall short, are skipped and tallied. Deterministic output order
// and (via the seeded counter generator) deterministic subsampling.
TaskSet enumerate_tasks(const std::vector<AbxCell>& cells,
                        const ConditionSpec& spec);

// Invokes fn(a, b, x) for every triple of the task, in a fixed order.
void for_each_triple(
    const AbxTask& task,
    const std::function<void(std::uint32_t, std::uint32_t, std::uint32_t)>&
        fn);

// Flat token-id index over the cells. The cells vector must stay alive
// and unmoved while the result is in use.
std::vector<const TokenFrames*> tokens_by_id(
    const std::vector<AbxCell>& cells);

// Item file: one token per row,
//   utterance_id onset offset phone prev next speaker
// tab-separated with a header, tokens in cell order.
void write_item_file(const std::vector<AbxCell>& cells,
                     const std::filesystem::path& path);
std::vector<AlignmentSegment> read_item_file(
    const std::filesystem::path& path);

}  // namespace abx

#endif  // ABX_ITEMGEN_HPP_
