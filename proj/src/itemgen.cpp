// src/itemgen.cpp

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

#include "abx/itemgen.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <tuple>

#include "abx/rng.hpp"

namespace abx {

std::string to_string(ContextMode m) {
  return m == ContextMode::WithinContext ? "within_context"
                                         : "without_context";
}

std::string to_string(SpeakerMode m) {
  return m == SpeakerMode::WithinSpeaker ? "within_speaker"
                                         : "across_speaker";
}

std::vector<AbxCell> build_cells(const std::vector<AlignmentSegment>& segments,
                                 const FeatureMap& features,
                                 const ConditionSpec& spec) {
  std::map<CellKey, std::vector<TokenFrames>> grouped;
  std::uint32_t next_id = 0;
  for (const AlignmentSegment& seg : segments) {
    auto it = features.find(seg.utterance_id);
    if (it == features.end()) {
      throw ValidationError("no features for utterance '" + seg.utterance_id +
                            "'");
    }
    TokenFrames tok = extract_token(it->second, seg);
    tok.id = next_id++;
    CellKey key;
    key.phone = seg.phone;
    key.speaker = seg.speaker_id;
    if (spec.context_mode == ContextMode::WithinContext) {
      key.prev = seg.prev_phone;
      key.next = seg.next_phone;
    }
    grouped[key].push_back(std::move(tok));
  }
  std::vector<AbxCell> cells;
  cells.reserve(grouped.size());
  for (auto& [key, tokens] : grouped) {
    cells.push_back(AbxCell{key, std::move(tokens)});
  }
  return cells;
}

namespace {

std::string task_key(const ConditionSpec& spec, const CellKey& a,
                     const CellKey& b, const CellKey& x) {
  return to_string(spec.context_mode) + "|" + to_string(spec.speaker_mode) +
         "|" + a.prev + "|" + a.next + "|" + a.speaker + "|" + x.speaker +
         "|" + a.phone + "|" + b.phone;
}

// Uniform sample of `want` distinct indices in [0, n), sorted ascending.
// Counter-based draws keyed on the task make the sample independent of
// enumeration order and thread count.
std::vector<std::uint64_t> sample_without_replacement(std::uint64_t n,
                                                      std::uint64_t want,
                                                      rng::Key key) {
  std::set<std::uint64_t> chosen;
  std::uint64_t counter = 0;
  while (chosen.size() < want) {
    chosen.insert(rng::bounded(key, counter++, n));
  }
  return {chosen.begin(), chosen.end()};
}

void decode_triple(const AbxTask& task, std::uint64_t index,
                   std::uint32_t* a, std::uint32_t* b, std::uint32_t* x) {
  const std::uint64_t nb = task.cell_b->tokens.size();
  if (task.x_is_a) {
    const std::uint64_t nx1 = task.cell_a->tokens.size() - 1;
    *a = static_cast<std::uint32_t>(index / (nx1 * nb));
    std::uint64_t r = index % (nx1 * nb);
    std::uint32_t xr = static_cast<std::uint32_t>(r / nb);
    *b = static_cast<std::uint32_t>(r % nb);
    *x = xr + (xr >= *a ? 1 : 0);  // skip the diagonal
  } else {
    const std::uint64_t nx = task.cell_x->tokens.size();
    *a = static_cast<std::uint32_t>(index / (nb * nx));
    std::uint64_t r = index % (nb * nx);
    *b = static_cast<std::uint32_t>(r / nx);
    *x = static_cast<std::uint32_t>(r % nx);
  }
}

void finish_task(AbxTask& task, const ConditionSpec& spec) {
  const std::uint64_t na = task.cell_a->tokens.size();
  const std::uint64_t nb = task.cell_b->tokens.size();
  const std::uint64_t nx = task.cell_x->tokens.size();
  task.full_triple_count = task.x_is_a ? na * (na - 1) * nb : na * nb * nx;
  task.n_triples = task.full_triple_count;
  if (spec.max_triples_per_task > 0 &&
      task.full_triple_count > spec.max_triples_per_task) {
    rng::Key key =
        rng::chain(rng::chain(rng::key(spec.rng_seed), "subsample"), task.key);
    auto indices = sample_without_replacement(
        task.full_triple_count, spec.max_triples_per_task, key);
    task.sampled.reserve(indices.size());
    for (std::uint64_t idx : indices) {
      std::uint32_t a, b, x;
      decode_triple(task, idx, &a, &b, &x);
      task.sampled.push_back({a, b, x});
    }
    task.n_triples = task.sampled.size();
  }
}

}  // namespace

TaskSet enumerate_tasks(const std::vector<AbxCell>& cells,
                        const ConditionSpec& spec) {
  TaskSet out;
  using ContextKey = std::pair<std::string, std::string>;  // (prev, next)

  if (spec.speaker_mode == SpeakerMode::WithinSpeaker) {
    // (context, speaker) -> phone -> cell
    std::map<std::tuple<std::string, std::string, std::string>,
             std::map<std::string, const AbxCell*>>
        groups;
    for (const AbxCell& cell : cells) {
      groups[{cell.key.prev, cell.key.next, cell.key.speaker}]
            [cell.key.phone] = &cell;
    }
    for (const auto& [group_key, phones] : groups) {
      for (const auto& [phone_a, cell_a] : phones) {
        for (const auto& [phone_b, cell_b] : phones) {
          if (phone_a == phone_b) continue;
          if (cell_a->tokens.size() < 2) {
            // x must differ from a inside the same cell
            ++out.n_skipped;
            continue;
          }
          AbxTask task;
          task.cell_a = cell_a;
          task.cell_b = cell_b;
          task.cell_x = cell_a;
          task.x_is_a = true;
          task.key = task_key(spec, cell_a->key, cell_b->key, cell_a->key);
          finish_task(task, spec);
          out.tasks.push_back(std::move(task));
        }
      }
    }
    return out;
  }

  // Across speakers: context -> speaker -> phone -> cell
  std::map<ContextKey,
           std::map<std::string, std::map<std::string, const AbxCell*>>>
      groups;
  for (const AbxCell& cell : cells) {
    groups[{cell.key.prev, cell.key.next}][cell.key.speaker][cell.key.phone] =
        &cell;
  }
  for (const auto& [ctx, speakers] : groups) {
    for (const auto& [spk_ab, ab_phones] : speakers) {
      for (const auto& [spk_x, x_phones] : speakers) {
        if (spk_ab == spk_x) continue;
        for (const auto& [phone_a, cell_a] : ab_phones) {
          for (const auto& [phone_b, cell_b] : ab_phones) {
            if (phone_a == phone_b) continue;
            auto xit = x_phones.find(phone_a);
            if (xit == x_phones.end()) {
              ++out.n_skipped;  // the other speaker lacks this phone cell
              continue;
            }
            AbxTask task;
            task.cell_a = cell_a;
            task.cell_b = cell_b;
            task.cell_x = xit->second;
            task.x_is_a = false;
            task.key =
                task_key(spec, cell_a->key, cell_b->key, xit->second->key);
            finish_task(task, spec);
            out.tasks.push_back(std::move(task));
          }
        }
      }
    }
  }
  return out;
}

void for_each_triple(
    const AbxTask& task,
    const std::function<void(std::uint32_t, std::uint32_t, std::uint32_t)>&
        fn) {
  if (!task.sampled.empty()) {
    for (const auto& t : task.sampled) fn(t[0], t[1], t[2]);
    return;
  }
  const std::uint32_t na =
      static_cast<std::uint32_t>(task.cell_a->tokens.size());
  const std::uint32_t nb =
      static_cast<std::uint32_t>(task.cell_b->tokens.size());
  const std::uint32_t nx =
      static_cast<std::uint32_t>(task.cell_x->tokens.size());
  for (std::uint32_t a = 0; a < na; ++a) {
    for (std::uint32_t b = 0; b < nb; ++b) {
      for (std::uint32_t x = 0; x < nx; ++x) {
        if (task.x_is_a && x == a) continue;
        fn(a, b, x);
      }
    }
  }
}

std::vector<const TokenFrames*> tokens_by_id(
    const std::vector<AbxCell>& cells) {
  std::uint32_t max_id = 0;
  bool any = false;
  for (const AbxCell& cell : cells) {
    for (const TokenFrames& tok : cell.tokens) {
      max_id = std::max(max_id, tok.id);
      any = true;
    }
  }
  std::vector<const TokenFrames*> out(any ? max_id + 1 : 0, nullptr);
  for (const AbxCell& cell : cells) {
    for (const TokenFrames& tok : cell.tokens) {
      out[tok.id] = &tok;
    }
  }
  return out;
}

void write_item_file(const std::vector<AbxCell>& cells,
                     const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write item file: " + path.string());
  out << "utterance_id\tonset\toffset\tphone\tprev\tnext\tspeaker\n";
  char buf[64];
  for (const AbxCell& cell : cells) {
    for (const TokenFrames& tok : cell.tokens) {
      const AlignmentSegment& s = tok.segment;
      std::snprintf(buf, sizeof(buf), "%.6f\t%.6f", s.onset_s, s.offset_s);
      out << s.utterance_id << '\t' << buf << '\t' << s.phone << '\t'
          << s.prev_phone << '\t' << s.next_phone << '\t' << s.speaker_id
          << '\n';
    }
  }
  if (!out) throw IoError("write failed: " + path.string());
}

std::vector<AlignmentSegment> read_item_file(
    const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open item file: " + path.string());
  std::string line;
  if (!std::getline(in, line)) {
    throw ParseError(path.string() + ": empty file, header row required");
  }
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line !=
      "utterance_id\tonset\toffset\tphone\tprev\tnext\tspeaker") {
    throw ParseError(path.string() + ":1: bad item file header");
  }
  std::vector<AlignmentSegment> out;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> cols;
    std::size_t start = 0;
    while (true) {
      std::size_t pos = line.find('\t', start);
      if (pos == std::string::npos) {
        cols.push_back(line.substr(start));
        break;
      }
      cols.push_back(line.substr(start, pos - start));
      start = pos + 1;
    }
    if (cols.size() != 7) {
      throw ParseError(path.string() + ":" + std::to_string(line_no) +
                       ": expected 7 columns, got " +
                       std::to_string(cols.size()));
    }
    AlignmentSegment seg;
    seg.utterance_id = cols[0];
    try {
      seg.onset_s = std::stod(cols[1]);
      seg.offset_s = std::stod(cols[2]);
    } catch (const std::exception&) {
      throw ParseError(path.string() + ":" + std::to_string(line_no) +
                       ": bad time value");
    }
    seg.phone = cols[3];
    seg.prev_phone = cols[4];
    seg.next_phone = cols[5];
    seg.speaker_id = cols[6];
    out.push_back(std::move(seg));
  }
  return out;
}

}  // namespace abx
