// tests/perturb_test.cpp

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

#include "abx/perturb.hpp"

#include <doctest.h>

#include <cmath>

#include "abx/abxscore.hpp"
#include "abx/synthgen.hpp"
#include "test_util.hpp"

using namespace abx;

namespace {

AlignmentSegment seg(const std::string& utt, const std::string& phone,
                     double onset, double offset) {
  AlignmentSegment s;
  s.utterance_id = utt;
  s.speaker_id = "spk";
  s.phone = phone;
  s.onset_s = onset;
  s.offset_s = offset;
  return s;
}

}  // namespace

TEST_CASE("one-hot encoding") {
  PhoneInventory inv;
  inv.labels = {"AA", "IY"};

  SUBCASE("single phone covers all frames") {
    auto m = one_hot_encode({seg("u", "IY", 0.0, 0.05)}, inv, "u", 0.01, 5);
    CHECK(m.n_frames == 5);
    CHECK(m.n_dims == 2);
    for (std::size_t i = 0; i < 5; ++i) {
      CHECK(m.frame(i)[0] == 0.0f);
      CHECK(m.frame(i)[1] == 1.0f);
    }
  }

  SUBCASE("two phones split at the boundary") {
    auto m = one_hot_encode(
        {seg("u", "AA", 0.0, 0.05), seg("u", "IY", 0.05, 0.10)}, inv, "u",
        0.01, 10);
    for (std::size_t i = 0; i < 5; ++i) CHECK(m.frame(i)[0] == 1.0f);
    for (std::size_t i = 5; i < 10; ++i) CHECK(m.frame(i)[1] == 1.0f);
  }

  SUBCASE("gaps become zero rows, rows sum to one elsewhere") {
    auto m = one_hot_encode(
        {seg("u", "AA", 0.0, 0.03), seg("u", "IY", 0.06, 0.09)}, inv, "u",
        0.01, 9);
    for (std::size_t i = 0; i < 9; ++i) {
      float sum = m.frame(i)[0] + m.frame(i)[1];
      if (i >= 3 && i < 6) {
        CHECK(sum == 0.0f);
      } else {
        CHECK(sum == 1.0f);
      }
    }
  }

  SUBCASE("unknown phone is an error") {
    CHECK_THROWS_AS(
        one_hot_encode({seg("u", "ZZ", 0.0, 0.05)}, inv, "u", 0.01, 5),
        ValidationError);
  }
}

TEST_CASE("boundary shifting") {
  PerturbSpec spec;
  spec.shift_frames = 4;
  spec.shift_prob = 1.0;
  spec.rng_seed = 7;

  SUBCASE("k = 0 is the identity") {
    PerturbSpec none = spec;
    none.shift_frames = 0;
    std::vector<AlignmentSegment> segs{seg("u", "A", 0.0, 0.10),
                                       seg("u", "B", 0.10, 0.20)};
    auto out = shift_boundaries(segs, none, 0.01);
    CHECK(out[0].offset_s == 0.10);
    CHECK(out[1].onset_s == 0.10);
  }

  SUBCASE("an applied shift moves one boundary right by k frames") {
    std::vector<AlignmentSegment> segs{seg("u", "A", 0.0, 0.10),
                                       seg("u", "B", 0.10, 0.20)};
    auto out = shift_boundaries(segs, spec, 0.01);
    CHECK(out[0].onset_s == 0.0);
    CHECK(out[0].offset_s == doctest::Approx(0.14));
    CHECK(out[1].onset_s == doctest::Approx(0.14));
    CHECK(out[1].offset_s == 0.20);  // utterance end fixed
  }

  SUBCASE("clamp keeps one frame for the squeezed segment") {
    // Boundary at 0.10 wants 0.14 but the next segment ends at 0.12 and
    // its own closing boundary is the utterance end, so it clamps to
    // 0.11.
    std::vector<AlignmentSegment> segs{seg("u", "A", 0.0, 0.10),
                                       seg("u", "B", 0.10, 0.12)};
    auto out = shift_boundaries(segs, spec, 0.01);
    CHECK(out[0].offset_s == doctest::Approx(0.11));
    CHECK(out[1].onset_s == doctest::Approx(0.11));
    CHECK(out[1].offset_s == 0.12);
  }

  SUBCASE("p = 1 with several segments changes at least one frame label") {
    std::vector<AlignmentSegment> segs{seg("u", "A", 0.0, 0.05),
                                       seg("u", "B", 0.05, 0.10),
                                       seg("u", "C", 0.10, 0.15)};
    auto out = shift_boundaries(segs, spec, 0.01);
    bool moved = false;
    for (std::size_t i = 0; i < segs.size(); ++i) {
      moved = moved || out[i].onset_s != segs[i].onset_s ||
              out[i].offset_s != segs[i].offset_s;
    }
    CHECK(moved);
  }

  SUBCASE("sortedness and non-overlap are preserved, deterministically") {
    SynthSpec synth;
    synth.n_utterances = 8;
    synth.phones_per_utterance = 12;
    synth.min_frames_per_phone = 2;
    synth.max_frames_per_phone = 9;
    synth.rng_seed = 3;
    SynthCorpus corpus = generate(synth);
    PerturbSpec half = spec;
    half.shift_prob = 0.5;
    auto a = shift_boundaries_corpus(corpus.phone_alignments, half, 0.01);
    auto b = shift_boundaries_corpus(corpus.phone_alignments, half, 0.01);
    REQUIRE(a.size() == b.size());
    bool any_shift = false;
    for (std::size_t i = 0; i < a.size(); ++i) {
      CHECK(a[i].onset_s == b[i].onset_s);
      CHECK(a[i].offset_s == b[i].offset_s);
      CHECK(a[i].offset_s > a[i].onset_s);
      if (i > 0 && a[i].utterance_id == a[i - 1].utterance_id) {
        CHECK(a[i].onset_s >= a[i - 1].offset_s - 1e-12);
      }
      any_shift = any_shift || a[i].onset_s != corpus.phone_alignments[i].onset_s;
    }
    CHECK(any_shift);
  }
}

TEST_CASE("square filter") {
  SUBCASE("width one is the identity") {
    auto m = test::make_matrix({{1, 2}, {3, 4}});
    auto out = square_filter(m, 1);
    CHECK(out.data == m.data);
  }

  SUBCASE("edge-truncated window means") {
    auto m = test::make_matrix({{0}, {3}, {6}});
    auto out = square_filter(m, 3);
    CHECK(out.frame(0)[0] == doctest::Approx(1.5));
    CHECK(out.frame(1)[0] == doctest::Approx(3.0));
    CHECK(out.frame(2)[0] == doctest::Approx(4.5));
  }

  SUBCASE("constants are fixed points for any width") {
    auto m = test::make_matrix(
        {{0.7f, -0.3f}, {0.7f, -0.3f}, {0.7f, -0.3f}, {0.7f, -0.3f}});
    for (unsigned w : {1u, 3u, 5u, 7u}) {
      auto out = square_filter(m, w);
      CHECK(out.data == m.data);
    }
  }

  SUBCASE("even widths are rejected") {
    auto m = test::make_matrix({{1}});
    CHECK_THROWS_AS(square_filter(m, 2), ValidationError);
    CHECK_THROWS_AS(square_filter(m, 0), ValidationError);
  }

  SUBCASE("linear and shift equivariant away from edges") {
    auto a = test::make_matrix({{1}, {5}, {2}, {8}, {3}, {9}, {4}});
    auto b = test::make_matrix({{2}, {1}, {7}, {0}, {6}, {2}, {5}});
    FeatureMatrix sum = a;
    for (std::size_t i = 0; i < sum.data.size(); ++i) {
      sum.data[i] += b.data[i];
    }
    auto fa = square_filter(a, 3);
    auto fb = square_filter(b, 3);
    auto fsum = square_filter(sum, 3);
    for (std::size_t i = 0; i < sum.data.size(); ++i) {
      CHECK(fsum.data[i] ==
            doctest::Approx(fa.data[i] + fb.data[i]).epsilon(1e-6));
    }
    // Shifting the input by one frame shifts the interior output.
    FeatureMatrix shifted = a;
    for (std::size_t i = 0; i + 1 < shifted.n_frames; ++i) {
      shifted.data[i] = a.data[i + 1];
    }
    auto fshift = square_filter(shifted, 3);
    for (std::size_t i = 1; i + 2 < a.n_frames; ++i) {
      CHECK(fshift.frame(i)[0] == doctest::Approx(fa.frame(i + 1)[0]));
    }
  }
}

TEST_CASE("one-hot gold with matching alignments scores exactly zero") {
  SynthSpec synth;
  synth.n_phones = 4;
  synth.n_speakers = 2;
  synth.n_utterances = 12;
  synth.phones_per_utterance = 8;
  synth.rng_seed = 15;
  SynthCorpus corpus = generate(synth);
  PhoneInventory inv = PhoneInventory::from_segments(corpus.phone_alignments);
  FeatureMap gold = one_hot_corpus(corpus.phone_alignments, inv, 0.01);

  for (ContextMode cm :
       {ContextMode::WithinContext, ContextMode::WithoutContext}) {
    ConditionSpec spec;
    spec.context_mode = cm;
    spec.speaker_mode = SpeakerMode::WithinSpeaker;
    auto cells = build_cells(corpus.phone_alignments, gold, spec);
    for (SeqDissim seq : {SeqDissim::Dtw, SeqDissim::HammingPool}) {
      ScoreReport r = evaluate_abx(cells, spec, FrameDissimSpec{}, seq);
      CHECK(r.error_rate_percent == 0.0);
    }
  }
}
