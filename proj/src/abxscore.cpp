// src/abxscore.cpp

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

#include "abx/abxscore.hpp"

#include <algorithm>
#include <cstdio>
#include <map>
#include <tuple>

#include <json.hpp>

#include "abx/parallel.hpp"

namespace abx {

TaskScore delta(const AbxTask& task, const TokenDissimFn& dissim) {
  if (task.n_triples == 0) {
    throw ValidationError("task '" + task.key + "' has no triples");
  }
  const auto& toks_a = task.cell_a->tokens;
  const auto& toks_b = task.cell_b->tokens;
  const auto& toks_x = task.cell_x->tokens;

  std::uint64_t wins = 0, ties = 0, count = 0;
  try {
    if (task.sampled.empty()) {
      // Full product: compute the two pair grids once, then compare.
      const std::size_t na = toks_a.size(), nb = toks_b.size(),
                        nx = toks_x.size();
      std::vector<double> dax(na * nx, 0.0), dbx(nb * nx, 0.0);
      for (std::size_t a = 0; a < na; ++a) {
        for (std::size_t x = 0; x < nx; ++x) {
          if (task.x_is_a && a == x) continue;
          dax[a * nx + x] = dissim(toks_a[a].id, toks_x[x].id);
        }
      }
      for (std::size_t b = 0; b < nb; ++b) {
        for (std::size_t x = 0; x < nx; ++x) {
          dbx[b * nx + x] = dissim(toks_b[b].id, toks_x[x].id);
        }
      }
      for (std::size_t a = 0; a < na; ++a) {
        for (std::size_t x = 0; x < nx; ++x) {
          if (task.x_is_a && a == x) continue;
          const double da = dax[a * nx + x];
          for (std::size_t b = 0; b < nb; ++b) {
            const double db = dbx[b * nx + x];
            wins += da < db;
            ties += da == db;
            ++count;
          }
        }
      }
    } else {
      for (const auto& t : task.sampled) {
        const double da = dissim(toks_a[t[0]].id, toks_x[t[2]].id);
        const double db = dissim(toks_b[t[1]].id, toks_x[t[2]].id);
        wins += da < db;
        ties += da == db;
        ++count;
      }
    }
  } catch (const ValidationError& e) {
    throw ValidationError("task '" + task.key + "': " + e.what());
  }

  TaskScore score;
  score.key.phone_a = task.cell_a->key.phone;
  score.key.phone_b = task.cell_b->key.phone;
  score.key.prev = task.cell_a->key.prev;
  score.key.next = task.cell_a->key.next;
  score.key.speaker_ab = task.cell_a->key.speaker;
  score.key.speaker_x = task.cell_x->key.speaker;
  score.n_triples = count;
  score.n_ties = ties;
  score.delta_value = (static_cast<double>(wins) +
                       0.5 * static_cast<double>(ties)) /
                      static_cast<double>(count);
  return score;
}

double symmetrize(const TaskScore& ab, const TaskScore& ba) {
  if (ab.key.phone_a != ba.key.phone_b || ab.key.phone_b != ba.key.phone_a) {
    throw ValidationError("cannot symmetrize " + ab.key.phone_a + "/" +
                          ab.key.phone_b + " with " + ba.key.phone_a + "/" +
                          ba.key.phone_b);
  }
  return 0.5 * (ab.delta_value + ba.delta_value);
}

ScoreReport aggregate(const std::vector<TaskScore>& scores,
                      const ConditionSpec& spec, const FrameDissimSpec& frame,
                      SeqDissim seq, std::uint64_t n_skipped) {
  if (scores.empty()) {
    throw EmptyEvaluationError("no evaluable tasks");
  }

  ScoreReport report;
  report.condition = spec;
  report.frame = frame;
  report.seq = seq;
  report.n_tasks = scores.size();
  report.n_skipped = n_skipped;

  // Level 1: mean over contexts within (ordered pair, speaker key).
  // In the without-context mode every group holds exactly one task.
  using SpeakerGroup =
      std::tuple<std::string, std::string, std::string, std::string>;
  std::map<SpeakerGroup, std::pair<double, std::uint64_t>> ctx_means;
  struct PairStats {
    std::uint64_t n_tasks = 0, n_triples = 0, n_ties = 0;
  };
  std::map<std::pair<std::string, std::string>, PairStats> stats;
  for (const TaskScore& s : scores) {
    auto& acc = ctx_means[{s.key.phone_a, s.key.phone_b, s.key.speaker_ab,
                           s.key.speaker_x}];
    acc.first += s.delta_value;
    acc.second += 1;
    std::string lo = std::min(s.key.phone_a, s.key.phone_b);
    std::string hi = std::max(s.key.phone_a, s.key.phone_b);
    auto& ps = stats[{lo, hi}];
    ps.n_tasks += 1;
    ps.n_triples += s.n_triples;
    ps.n_ties += s.n_ties;
    report.n_triples += s.n_triples;
    report.n_ties += s.n_ties;
  }

  // Level 2: mean over speaker keys within each ordered phone pair.
  std::map<std::pair<std::string, std::string>,
           std::pair<double, std::uint64_t>>
      dir_means;
  for (const auto& [group, acc] : ctx_means) {
    double mean = acc.first / static_cast<double>(acc.second);
    auto& d = dir_means[{std::get<0>(group), std::get<1>(group)}];
    d.first += mean;
    d.second += 1;
  }

  // Levels 3 and 4: average the two ordered directions of each unordered
  // pair (one direction stands alone if the other was skipped), then
  // average over pairs.
  std::map<std::pair<std::string, std::string>,
           std::pair<double, int>>
      sym;
  for (const auto& [pair_key, acc] : dir_means) {
    double mean = acc.first / static_cast<double>(acc.second);
    std::string lo = std::min(pair_key.first, pair_key.second);
    std::string hi = std::max(pair_key.first, pair_key.second);
    auto& s = sym[{lo, hi}];
    s.first += mean;
    s.second += 1;
  }

  double total = 0.0;
  for (const auto& [pair_key, acc] : sym) {
    PairScore p;
    p.phone_a = pair_key.first;
    p.phone_b = pair_key.second;
    p.score = acc.first / static_cast<double>(acc.second);
    p.n_directions = acc.second;
    const PairStats& ps = stats[pair_key];
    p.n_tasks = ps.n_tasks;
    p.n_triples = ps.n_triples;
    p.n_ties = ps.n_ties;
    report.pairs.push_back(std::move(p));
    total += report.pairs.back().score;
  }
  report.mean_score = total / static_cast<double>(report.pairs.size());
  report.error_rate_percent = 100.0 * (1.0 - report.mean_score);
  return report;
}

ScoreReport evaluate_abx(const std::vector<AbxCell>& cells,
                         const ConditionSpec& spec,
                         const FrameDissimSpec& frame, SeqDissim seq,
                         const EvalOptions& opts) {
  TaskSet tasks = enumerate_tasks(cells, spec);
  if (tasks.tasks.empty()) {
    throw EmptyEvaluationError("no evaluable tasks (" +
                               std::to_string(tasks.n_skipped) + " skipped)");
  }
  TokenDissim dissim(tokens_by_id(cells), frame, seq, opts.memoize);
  TokenDissimFn fn = [&dissim](std::uint32_t a, std::uint32_t x) {
    return dissim(a, x);
  };
  std::vector<TaskScore> scores(tasks.tasks.size());
  parallel_for(tasks.tasks.size(), opts.workers, [&](std::size_t i) {
    scores[i] = delta(tasks.tasks[i], fn);
  });
  return aggregate(scores, spec, frame, seq, tasks.n_skipped);
}

std::string report_to_json(const ScoreReport& report,
                           const std::string& system) {
  nlohmann::json j;
  j["system"] = system;
  j["config"] = {
      {"condition", to_string(report.condition.context_mode)},
      {"speaker_mode", to_string(report.condition.speaker_mode)},
      {"seq_dissim", to_string(report.seq)},
      {"frame_dissim", to_string(report.frame.kind)},
      {"epsilon", report.frame.epsilon},
      {"max_triples_per_task", report.condition.max_triples_per_task},
      {"rng_seed", report.condition.rng_seed},
      {"aggregation",
       "unweighted means: contexts, then speaker keys, then symmetrized "
       "phone-pair directions, then pairs"},
      {"tie_rule", "exact float equality counts one half"},
  };
  j["overall"] = {
      {"mean_score", report.mean_score},
      {"error_percent", report.error_rate_percent},
      {"n_tasks", report.n_tasks},
      {"n_skipped", report.n_skipped},
      {"n_triples", report.n_triples},
      {"n_ties", report.n_ties},
  };
  nlohmann::json pairs = nlohmann::json::array();
  for (const PairScore& p : report.pairs) {
    pairs.push_back({
        {"phone_a", p.phone_a},
        {"phone_b", p.phone_b},
        {"score", p.score},
        {"n_directions", p.n_directions},
        {"n_tasks", p.n_tasks},
        {"n_triples", p.n_triples},
        {"n_ties", p.n_ties},
    });
  }
  j["phone_pairs"] = std::move(pairs);
  return j.dump(2) + "\n";
}

std::string report_csv_header() {
  return "condition,speaker_mode,seq_dissim,frame_dissim,error_percent,"
         "n_tasks,n_skipped\n";
}

std::string report_csv_row(const ScoreReport& report) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.2f", report.error_rate_percent);
  return to_string(report.condition.context_mode) + "," +
         to_string(report.condition.speaker_mode) + "," +
         to_string(report.seq) + "," + to_string(report.frame.kind) + "," +
         buf + "," + std::to_string(report.n_tasks) + "," +
         std::to_string(report.n_skipped) + "\n";
}

}  // namespace abx
