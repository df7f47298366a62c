// include/abx/abxscore.hpp

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

#ifndef ABX_ABXSCORE_HPP_
#define ABX_ABXSCORE_HPP_

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "abx/dissim.hpp"
#include "abx/itemgen.hpp"

namespace abx {

struct TaskScoreKey {
  std::string phone_a;
  std::string phone_b;
  std::string prev;  // empty in without-context runs
  std::string next;
  std::string speaker_ab;
  std::string speaker_x;  // equals speaker_ab within speaker
};

struct TaskScore {
  TaskScoreKey key;
  double delta_value = 0.0;  // in [0, 1]
  std::uint64_t n_triples = 0;
  std::uint64_t n_ties = 0;
};

// Token-pair dissimilarity by id; the first argument is the a (or b)
// token, the second the x token.
using TokenDissimFn =
    std::function<double(std::uint32_t, std::uint32_t)>;

// Fraction of triples with d(a,x) < d(b,x), counting exact equality as
// one half. Counts are integers, so the result does not depend on triple
// order or thread count.
TaskScore delta(const AbxTask& task, const TokenDissimFn& dissim);

// Mean of two deltas with mirrored phone pairs; throws on key mismatch.
double symmetrize(const TaskScore& ab, const TaskScore& ba);

struct PairScore {
  std::string phone_a;  // phone_a < phone_b
  std::string phone_b;
  double score = 0.0;       // symmetrized, in [0, 1]
  int n_directions = 0;     // 1 if only one ordered direction survived
  std::uint64_t n_tasks = 0;
  std::uint64_t n_triples = 0;
  std::uint64_t n_ties = 0;
};

struct ScoreReport {
  ConditionSpec condition;
  FrameDissimSpec frame;
  SeqDissim seq = SeqDissim::Dtw;
  std::vector<PairScore> pairs;  // sorted by phone pair
  double mean_score = 0.0;
  double error_rate_percent = 0.0;  // 100 * (1 - mean_score)
  std::uint64_t n_tasks = 0;
  std::uint64_t n_skipped = 0;
  std::uint64_t n_triples = 0;
  std::uint64_t n_ties = 0;
};

// Unweighted hierarchical means: contexts within each (phone pair,
// speaker key), then speaker keys within each ordered phone pair, then
// the two ordered directions of each unordered pair, then pairs. Throws
// EmptyEvaluationError when no task survived.
ScoreReport aggregate(const std::vector<TaskScore>& scores,
                      const ConditionSpec& spec, const FrameDissimSpec& frame,
                      SeqDissim seq, std::uint64_t n_skipped);

struct EvalOptions {
  unsigned workers = 1;
  bool memoize = true;
};

// Full pipeline over prebuilt cells: enumerate tasks, score them in
// parallel, aggregate. Deterministic for fixed inputs and seed,
// independent of worker count.
ScoreReport evaluate_abx(const std::vector<AbxCell>& cells,
                         const ConditionSpec& spec,
                         const FrameDissimSpec& frame, SeqDissim seq,
                         const EvalOptions& opts = {});

// Serialization. JSON carries the full hierarchy at full precision; the
// CSV row is the flat grid line (error to 2 decimals):
//   condition,speaker_mode,seq_dissim,frame_dissim,error_percent,
//   n_tasks,n_skipped
std::string report_to_json(const ScoreReport& report,
                           const std::string& system = "system");
std::string report_csv_header();
std::string report_csv_row(const ScoreReport& report);

}  // namespace abx

#endif  // ABX_ABXSCORE_HPP_
