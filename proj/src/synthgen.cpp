// src/synthgen.cpp

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

#include "abx/synthgen.hpp"

#include <cmath>
#include <cstdio>

#include "abx/rng.hpp"

namespace abx {

void SynthSpec::validate() const {
  if (n_phones < 1 || n_speakers < 1 || n_utterances < 1 ||
      phones_per_utterance < 1 || phones_per_word < 1) {
    throw ValidationError("synth counts must be at least 1");
  }
  if (dim < 2) throw ValidationError("synth dim must be at least 2");
  if (context_coloring < 0.0 || context_coloring > 1.0) {
    throw ValidationError("context coloring must lie in [0, 1]");
  }
  if (speaker_strength < 0.0 || noise_sigma < 0.0) {
    throw ValidationError("speaker strength and noise must be non-negative");
  }
  if (min_frames_per_phone < 1 ||
      max_frames_per_phone < min_frames_per_phone) {
    throw ValidationError("bad frames-per-phone range");
  }
  if (!(frame_period_s > 0.0)) {
    throw ValidationError("frame period must be positive");
  }
}

namespace {

std::string phone_label(std::size_t i) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "p%03zu", i);
  return buf;
}

std::string speaker_label(std::size_t i) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "s%03zu", i);
  return buf;
}

std::string utterance_label(std::size_t i) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "u%05zu", i);
  return buf;
}

std::vector<double> unit_gaussian_vector(rng::Key key, std::size_t dim) {
  std::vector<double> v(dim);
  double norm_sq = 0.0;
  for (std::size_t d = 0; d < dim; ++d) {
    v[d] = rng::gaussian(key, d);
    norm_sq += v[d] * v[d];
  }
  const double norm = std::sqrt(norm_sq);
  for (double& x : v) x /= norm;
  return v;
}

}  // namespace

SynthCorpus generate(const SynthSpec& spec) {
  spec.validate();
  const rng::Key master = rng::key(spec.rng_seed);

  // Phone prototypes (index n_phones is the boundary stand-in).
  std::vector<std::vector<double>> proto(spec.n_phones + 1);
  for (std::size_t p = 0; p <= spec.n_phones; ++p) {
    const std::size_t source = (spec.shared_prototype && p < spec.n_phones)
                                   ? 0
                                   : p;
    proto[p] =
        unit_gaussian_vector(rng::chain(rng::chain(master, "proto"), source),
                             spec.dim);
  }

  std::vector<std::vector<double>> speaker_offset(spec.n_speakers);
  for (std::size_t s = 0; s < spec.n_speakers; ++s) {
    speaker_offset[s].resize(spec.dim);
    rng::Key key = rng::chain(rng::chain(master, "speaker"), s);
    for (std::size_t d = 0; d < spec.dim; ++d) {
      speaker_offset[s][d] = spec.speaker_strength * rng::gaussian(key, d);
    }
  }

  SynthCorpus corpus;
  const double T = spec.frame_period_s;
  const std::size_t dur_span =
      spec.max_frames_per_phone - spec.min_frames_per_phone + 1;

  for (std::size_t u = 0; u < spec.n_utterances; ++u) {
    const std::string utt_id = utterance_label(u);
    const std::size_t speaker = u % spec.n_speakers;
    const std::string spk_id = speaker_label(speaker);

    rng::Key seq_key = rng::chain(rng::chain(master, "phones"), u);
    rng::Key dur_key = rng::chain(rng::chain(master, "durs"), u);
    rng::Key noise_key = rng::chain(rng::chain(master, "noise"), u);

    std::vector<std::size_t> phones(spec.phones_per_utterance);
    std::vector<std::size_t> durs(spec.phones_per_utterance);
    std::size_t total_frames = 0;
    for (std::size_t t = 0; t < spec.phones_per_utterance; ++t) {
      phones[t] = rng::bounded(seq_key, t, spec.n_phones);
      durs[t] = spec.min_frames_per_phone + rng::bounded(dur_key, t, dur_span);
      total_frames += durs[t];
    }

    FeatureMatrix m;
    m.utterance_id = utt_id;
    m.frame_period_s = T;
    m.n_frames = total_frames;
    m.n_dims = spec.dim;
    m.data.resize(total_frames * spec.dim);

    const double gamma = spec.context_coloring;
    std::size_t frame = 0;
    std::size_t onset_frame = 0;
    for (std::size_t t = 0; t < spec.phones_per_utterance; ++t) {
      const std::size_t q = phones[t];
      const std::size_t l = t == 0 ? spec.n_phones : phones[t - 1];
      const std::size_t r =
          t + 1 == spec.phones_per_utterance ? spec.n_phones : phones[t + 1];
      std::vector<double> base(spec.dim);
      for (std::size_t d = 0; d < spec.dim; ++d) {
        base[d] = (1.0 - gamma) * proto[q][d] +
                  0.5 * gamma * (proto[l][d] + proto[r][d]) +
                  speaker_offset[speaker][d];
      }
      for (std::size_t f = 0; f < durs[t]; ++f, ++frame) {
        float* row = m.data.data() + frame * spec.dim;
        for (std::size_t d = 0; d < spec.dim; ++d) {
          double value = base[d];
          if (spec.noise_sigma > 0.0) {
            value += spec.noise_sigma *
                     rng::gaussian(noise_key, frame * spec.dim + d);
          }
          row[d] = static_cast<float>(value);
        }
      }

      AlignmentSegment seg;
      seg.utterance_id = utt_id;
      seg.speaker_id = spk_id;
      seg.phone = phone_label(q);
      seg.onset_s = static_cast<double>(onset_frame) * T;
      seg.offset_s = static_cast<double>(frame) * T;
      seg.prev_phone = t == 0 ? kBoundaryLabel : phone_label(phones[t - 1]);
      seg.next_phone = t + 1 == spec.phones_per_utterance
                           ? kBoundaryLabel
                           : phone_label(phones[t + 1]);
      corpus.phone_alignments.push_back(std::move(seg));
      onset_frame = frame;
    }

    // Fixed-length pseudo-words over the phone sequence; the trailing
    // short group is kept.
    const auto utt_segs_begin =
        corpus.phone_alignments.end() - spec.phones_per_utterance;
    std::vector<AlignmentSegment> words;
    for (std::size_t t = 0; t < spec.phones_per_utterance;
         t += spec.phones_per_word) {
      const std::size_t last =
          std::min(t + spec.phones_per_word, spec.phones_per_utterance) - 1;
      std::string label;
      for (std::size_t i = t; i <= last; ++i) {
        if (!label.empty()) label += "+";
        label += phone_label(phones[i]);
      }
      AlignmentSegment w;
      w.utterance_id = utt_id;
      w.speaker_id = spk_id;
      w.phone = label;
      w.onset_s = (utt_segs_begin + t)->onset_s;
      w.offset_s = (utt_segs_begin + last)->offset_s;
      words.push_back(std::move(w));
    }
    for (std::size_t i = 0; i < words.size(); ++i) {
      words[i].prev_phone = i == 0 ? kBoundaryLabel : words[i - 1].phone;
      words[i].next_phone =
          i + 1 == words.size() ? kBoundaryLabel : words[i + 1].phone;
    }
    corpus.word_alignments.insert(corpus.word_alignments.end(), words.begin(),
                                  words.end());

    corpus.features.emplace(utt_id, std::move(m));
  }
  return corpus;
}

}  // namespace abx
