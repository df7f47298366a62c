// tests/featureio_test.cpp

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

#include "abx/featureio.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <fstream>

#include "abx/rng.hpp"
#include "test_util.hpp"

using namespace abx;

namespace {

std::filesystem::path write_tsv(const std::filesystem::path& dir,
                                const std::string& content,
                                const std::string& name = "ali.tsv") {
  auto path = dir / name;
  std::ofstream out(path);
  out << content;
  return path;
}

const std::string kHeader = "utterance_id\tspeaker_id\tphone\tonset\toffset\n";

}  // namespace

TEST_CASE("read_alignments fills boundary context on a single row") {
  auto dir = test::scratch_dir("ali_single");
  auto path = write_tsv(dir, kHeader + "utt1\tspk1\tAA\t0.00\t0.10\n");
  auto segs = read_alignments(path);
  REQUIRE(segs.size() == 1);
  CHECK(segs[0].phone == "AA");
  CHECK(segs[0].prev_phone == "#");
  CHECK(segs[0].next_phone == "#");
  CHECK(segs[0].speaker_id == "spk1");
}

TEST_CASE("read_alignments computes adjacency context") {
  auto dir = test::scratch_dir("ali_ctx");
  auto path = write_tsv(dir, kHeader +
                                 "utt1\tspk1\tF\t0.00\t0.10\n"
                                 "utt1\tspk1\tL\t0.10\t0.20\n"
                                 "utt1\tspk1\tUW\t0.20\t0.30\n");
  auto segs = read_alignments(path);
  REQUIRE(segs.size() == 3);
  CHECK(segs[1].phone == "L");
  CHECK(segs[1].prev_phone == "F");
  CHECK(segs[1].next_phone == "UW");
  CHECK(segs[0].prev_phone == "#");
  CHECK(segs[2].next_phone == "#");
}

TEST_CASE("read_alignments rejects overlap and malformed rows") {
  auto dir = test::scratch_dir("ali_bad");
  CHECK_THROWS_AS(read_alignments(write_tsv(
                      dir, kHeader + "utt1\tspk1\tA\t0.0\t0.2\n"
                                     "utt1\tspk1\tB\t0.1\t0.3\n")),
                  ValidationError);
  CHECK_THROWS_AS(read_alignments(write_tsv(dir, kHeader +
                                                     "utt1\tspk1\tA\t0.0\n",
                                            "short.tsv")),
                  ParseError);
  CHECK_THROWS_AS(
      read_alignments(write_tsv(dir, kHeader + "utt1\tspk1\tA\tx\t0.2\n",
                                "badnum.tsv")),
      ParseError);
  CHECK_THROWS_AS(
      read_alignments(write_tsv(dir, "well\twrong\theader\ta\tb\n",
                                "badheader.tsv")),
      ParseError);
  // Zero-duration segment.
  CHECK_THROWS_AS(
      read_alignments(write_tsv(dir, kHeader + "utt1\tspk1\tA\t0.2\t0.2\n",
                                "zerodur.tsv")),
      ValidationError);
  // Line numbers surface in parse errors.
  try {
    read_alignments(write_tsv(dir, kHeader + "utt1\tspk1\tA\t0.0\t0.1\n"
                                             "utt1\tspk1\tB\n",
                              "lineno.tsv"));
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(std::string(e.what()).find(":3") != std::string::npos);
  }
}

TEST_CASE("feature archive round trip is bit exact and deterministic") {
  auto dir = test::scratch_dir("archive");
  FeatureMap map;
  rng::Key key = rng::key(11);
  for (int u = 0; u < 3; ++u) {
    FeatureMatrix m;
    m.utterance_id = "utt" + std::to_string(u);
    m.frame_period_s = 0.01;
    m.n_frames = 5;
    m.n_dims = 4;
    for (std::size_t i = 0; i < 20; ++i) {
      m.data.push_back(
          static_cast<float>(rng::gaussian(rng::chain(key, u), i)));
    }
    map.emplace(m.utterance_id, std::move(m));
  }

  write_features(map, dir / "a.abxf");
  write_features(map, dir / "b.abxf");
  CHECK(test::slurp(dir / "a.abxf") == test::slurp(dir / "b.abxf"));

  FeatureMap back = read_features(dir / "a.abxf");
  REQUIRE(back.size() == 3);
  for (const auto& [id, m] : map) {
    const FeatureMatrix& r = back.at(id);
    CHECK(r.n_frames == m.n_frames);
    CHECK(r.n_dims == m.n_dims);
    CHECK(r.frame_period_s == m.frame_period_s);
    CHECK(r.data == m.data);
  }
}

TEST_CASE("archive rejects corruption and invalid matrices") {
  auto dir = test::scratch_dir("archive_bad");
  FeatureMap map;
  map.emplace("u1", test::make_matrix({{1, 2}, {3, 4}}, "u1"));
  write_features(map, dir / "ok.abxf");

  SUBCASE("empty map is a valid archive") {
    write_features({}, dir / "empty.abxf");
    CHECK(read_features(dir / "empty.abxf").empty());
  }

  SUBCASE("truncation names the utterance") {
    std::string bytes = test::slurp(dir / "ok.abxf");
    std::ofstream out(dir / "trunc.abxf", std::ios::binary);
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size() - 6));
    out.close();
    try {
      read_features(dir / "trunc.abxf");
      FAIL("expected ParseError");
    } catch (const ParseError& e) {
      CHECK(std::string(e.what()).find("u1") != std::string::npos);
    }
  }

  SUBCASE("bad magic") {
    std::ofstream out(dir / "magic.abxf", std::ios::binary);
    out << "NOPE then some bytes";
    out.close();
    CHECK_THROWS_AS(read_features(dir / "magic.abxf"), ParseError);
  }

  SUBCASE("NaN rejected before writing") {
    FeatureMap bad;
    auto m = test::make_matrix({{1, 2}}, "u1");
    m.data[0] = std::nanf("");
    bad.emplace("u1", std::move(m));
    CHECK_THROWS_AS(write_features(bad, dir / "nan.abxf"), ValidationError);
  }

  SUBCASE("mixed frame periods rejected") {
    FeatureMap bad;
    bad.emplace("u1", test::make_matrix({{1, 2}}, "u1", 0.01));
    bad.emplace("u2", test::make_matrix({{1, 2}}, "u2", 0.02));
    CHECK_THROWS_AS(write_features(bad, dir / "mixed.abxf"), ValidationError);
  }
}

TEST_CASE("text fallback directory reader") {
  auto dir = test::scratch_dir("textdir");
  {
    std::ofstream out(dir / "u1.txt");
    out << "1 2 3\n4 5 6\n";
    std::ofstream out2(dir / "u2.txt");
    out2 << "0.5 0.5 0.5\n";
  }
  FeatureMap map = read_features(dir, 0.02);
  REQUIRE(map.size() == 2);
  CHECK(map.at("u1").n_frames == 2);
  CHECK(map.at("u1").n_dims == 3);
  CHECK(map.at("u1").frame_period_s == 0.02);
  CHECK(map.at("u2").data[0] == 0.5f);

  std::ofstream bad(dir / "u3.txt");
  bad << "1 2 3\n4 5\n";
  bad.close();
  CHECK_THROWS_AS(read_features(dir, 0.02), ParseError);
}

TEST_CASE("extract_token follows the frame-center rule") {
  auto m = test::make_matrix(
      {{0, 0}, {1, 1}, {2, 2}, {3, 3}, {4, 4}, {5, 5}, {6, 6}, {7, 7}},
      "utt1");
  AlignmentSegment seg;
  seg.utterance_id = "utt1";

  SUBCASE("plain span") {
    seg.onset_s = 0.00;
    seg.offset_s = 0.05;
    auto tok = extract_token(m, seg);
    CHECK(tok.first_frame == 0);
    CHECK(tok.n_frames == 5);
  }

  SUBCASE("one center inside") {
    seg.onset_s = 0.031;
    seg.offset_s = 0.038;
    auto tok = extract_token(m, seg);
    CHECK(tok.first_frame == 3);
    CHECK(tok.n_frames == 1);
  }

  SUBCASE("no center inside falls back to nearest midpoint") {
    seg.onset_s = 0.030;
    seg.offset_s = 0.034;
    auto tok = extract_token(m, seg);
    CHECK(tok.first_frame == 3);  // center 0.035 nearest midpoint 0.032
    CHECK(tok.n_frames == 1);
  }

  SUBCASE("outside the time range throws") {
    seg.onset_s = 0.30;
    seg.offset_s = 0.40;
    CHECK_THROWS_AS(extract_token(m, seg), ValidationError);
  }

  SUBCASE("wrong utterance throws") {
    seg.utterance_id = "other";
    seg.onset_s = 0.0;
    seg.offset_s = 0.05;
    CHECK_THROWS_AS(extract_token(m, seg), ValidationError);
  }
}

TEST_CASE("tiling segments recover every frame exactly once") {
  rng::Key key = rng::key(77);
  for (int rep = 0; rep < 50; ++rep) {
    rng::Key rk = rng::chain(key, rep);
    const std::size_t n_frames = 1 + rng::bounded(rk, 0, 40);
    FeatureMatrix m;
    m.utterance_id = "u";
    m.frame_period_s = 0.01;
    m.n_frames = n_frames;
    m.n_dims = 1;
    m.data.assign(n_frames, 0.0f);

    // Random tiling of [0, n_frames) in frame units.
    std::vector<std::size_t> cuts{0, n_frames};
    const std::size_t n_cuts = rng::bounded(rk, 1, 5);
    for (std::size_t c = 0; c < n_cuts; ++c) {
      cuts.push_back(rng::bounded(rk, 10 + c, n_frames + 1));
    }
    std::sort(cuts.begin(), cuts.end());
    cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());

    std::size_t covered = 0;
    for (std::size_t c = 0; c + 1 < cuts.size(); ++c) {
      AlignmentSegment seg;
      seg.utterance_id = "u";
      seg.onset_s = static_cast<double>(cuts[c]) * m.frame_period_s;
      seg.offset_s = static_cast<double>(cuts[c + 1]) * m.frame_period_s;
      auto tok = extract_token(m, seg);
      CHECK(tok.first_frame == covered);
      covered += tok.n_frames;
    }
    CHECK(covered == n_frames);
  }
}
