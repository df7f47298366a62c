// tests/dissim_test.cpp

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

#include "abx/dissim.hpp"

#include <doctest.h>

#include <cmath>
#include <functional>
#include <vector>

#include "abx/rng.hpp"
#include "test_util.hpp"

using namespace abx;

namespace {

// Exhaustive minimum of path-averaged cost over all monotone paths.
// Accumulates sums in path order, matching the dynamic program bit for
// bit, so equality checks below are exact.
double dtw_enumerate(std::size_t m, std::size_t n,
                     const std::function<double(std::size_t, std::size_t)>&
                         cost) {
  double best = std::numeric_limits<double>::infinity();
  std::function<void(std::size_t, std::size_t, double, std::size_t)> go =
      [&](std::size_t i, std::size_t j, double sum, std::size_t len) {
        sum += cost(i, j);
        len += 1;
        if (i == m - 1 && j == n - 1) {
          best = std::min(best, sum / static_cast<double>(len));
          return;
        }
        if (i + 1 < m) go(i + 1, j, sum, len);
        if (j + 1 < n) go(i, j + 1, sum, len);
        if (i + 1 < m && j + 1 < n) go(i + 1, j + 1, sum, len);
      };
  go(0, 0, 0.0, 0);
  return best;
}

std::vector<float> vf(std::initializer_list<float> v) { return v; }

}  // namespace

TEST_CASE("angular dissimilarity on axis-aligned vectors") {
  CHECK(angular_dissim(vf({1, 0}), vf({1, 0})) == 0.0);
  CHECK(angular_dissim(vf({1, 0}), vf({0, 1})) == doctest::Approx(0.5));
  CHECK(angular_dissim(vf({1, 0}), vf({-1, 0})) == doctest::Approx(1.0));
}

TEST_CASE("angular dissimilarity zero-norm convention") {
  CHECK(angular_dissim(vf({0, 0}), vf({0, 0})) == 0.0);
  CHECK(angular_dissim(vf({0, 0}), vf({1, 0})) == 1.0);
  CHECK(angular_dissim(vf({1, 0}), vf({0, 0})) == 1.0);
}

TEST_CASE("angular dissimilarity is symmetric, bounded, scale invariant") {
  rng::Key key = rng::key(42);
  for (int rep = 0; rep < 200; ++rep) {
    rng::Key rk = rng::chain(key, rep);
    std::size_t dim = 2 + rng::bounded(rk, 0, 10);
    std::vector<float> u(dim), v(dim);
    for (std::size_t d = 0; d < dim; ++d) {
      u[d] = static_cast<float>(rng::gaussian(rng::chain(rk, "u"), d));
      v[d] = static_cast<float>(rng::gaussian(rng::chain(rk, "v"), d));
    }
    double duv = angular_dissim(u, v);
    double dvu = angular_dissim(v, u);
    CHECK(duv == dvu);  // exact, multiplication commutes
    CHECK(duv >= 0.0);
    CHECK(duv <= 1.0);
    // Positive scaling leaves the angle unchanged (up to rounding).
    std::vector<float> u2(dim);
    for (std::size_t d = 0; d < dim; ++d) u2[d] = 2.0f * u[d];
    CHECK(angular_dissim(u2, v) == doctest::Approx(duv).epsilon(1e-12));
    CHECK(angular_dissim(u, u) == doctest::Approx(0.0).epsilon(1e-7));
  }
  CHECK_THROWS_AS(angular_dissim(vf({1, 0}), vf({1, 0, 0})), ValidationError);
}

TEST_CASE("kl dissimilarity examples") {
  CHECK(kl_dissim(vf({0.5, 0.5}), vf({0.5, 0.5})) == 0.0);

  // Scalar-arithmetic oracle for the floored-renormalized formula.
  auto kl_oracle = [](std::vector<double> u, std::vector<double> v,
                      double eps) {
    double su = 0, sv = 0;
    for (auto& x : u) su += (x = std::max(x, eps));
    for (auto& x : v) sv += (x = std::max(x, eps));
    double acc = 0;
    for (std::size_t i = 0; i < u.size(); ++i) {
      acc += (u[i] / su) * std::log((u[i] / su) / (v[i] / sv));
    }
    return acc;
  };

  double forward = kl_dissim(vf({1, 0}), vf({0.5, 0.5}), 1e-10);
  CHECK(forward == doctest::Approx(std::log(2.0)).epsilon(1e-6));
  CHECK(forward ==
        doctest::Approx(kl_oracle({1, 0}, {0.5, 0.5}, 1e-10)).epsilon(1e-12));

  double reverse = kl_dissim(vf({0.5, 0.5}), vf({1, 0}), 1e-10);
  CHECK(reverse ==
        doctest::Approx(kl_oracle({0.5, 0.5}, {1, 0}, 1e-10)).epsilon(1e-12));
  CHECK(reverse > 1.0);
  CHECK(reverse < std::log(1.0 / 1e-10));  // bounded by the floor

  CHECK(kl_dissim(vf({1, 0}), vf({0.5, 0.5})) !=
        kl_dissim(vf({0.5, 0.5}), vf({1, 0})));  // directional
  CHECK_THROWS_AS(kl_dissim(vf({-1.0f, 2.0f}), vf({0.5, 0.5})),
                  ValidationError);
  CHECK_THROWS_AS(kl_dissim(vf({1, 0}), vf({1, 0, 0})), ValidationError);
}

TEST_CASE("dtw on the scalar example") {
  // |u - v| costs for a = [0, 2], x = [0, 1, 2].
  const double a[] = {0.0, 2.0};
  const double x[] = {0.0, 1.0, 2.0};
  auto cost = [&](std::size_t i, std::size_t j) {
    return std::abs(a[i] - x[j]);
  };
  CHECK(dtw_normalized_avg(2, 3, cost) == doctest::Approx(1.0 / 3));
  CHECK(dtw_normalized_avg(2, 3, cost) == dtw_enumerate(2, 3, cost));
}

TEST_CASE("dtw equals exhaustive path enumeration on random costs") {
  rng::Key key = rng::key(9);
  for (int rep = 0; rep < 400; ++rep) {
    rng::Key rk = rng::chain(key, rep);
    const std::size_t m = 1 + rng::bounded(rk, 0, 6);
    const std::size_t n = 1 + rng::bounded(rk, 1, 6);
    std::vector<double> c(m * n);
    for (std::size_t i = 0; i < c.size(); ++i) {
      c[i] = rng::uniform01(rng::chain(rk, "c"), i);
    }
    auto cost = [&](std::size_t i, std::size_t j) { return c[i * n + j]; };
    // Exact: same values, same accumulation order.
    CHECK(dtw_normalized_avg(m, n, cost) == dtw_enumerate(m, n, cost));
  }
}

TEST_CASE("dtw dissimilarity on tokens") {
  auto ma = test::make_matrix({{1, 0}, {0, 1}, {1, 1}});
  auto mx = test::make_matrix({{1, 0}, {0, 1}, {1, 1}});
  auto ta = test::whole_token(ma);
  auto tx = test::whole_token(mx);
  FrameDissimSpec angular;

  CHECK(dtw_dissim(ta, tx, angular) == 0.0);

  auto m1 = test::make_matrix({{1, 0}});
  auto m2 = test::make_matrix({{0, 1}});
  auto t1 = test::whole_token(m1);
  auto t2 = test::whole_token(m2);
  CHECK(dtw_dissim(t1, t2, angular) ==
        angular_dissim(m1.frame(0), m2.frame(0)));

  // Symmetric for the symmetric frame kernel, exactly.
  auto mb = test::make_matrix({{1, 0}, {1, 1}, {0, 1}, {0.5, 0.25}});
  auto tb = test::whole_token(mb);
  CHECK(dtw_dissim(ta, tb, angular) == dtw_dissim(tb, ta, angular));

  // KL direction is fixed by argument order.
  FrameDissimSpec kl{FrameDissim::KlDiv, 1e-10};
  auto md1 = test::make_matrix({{0.9f, 0.1f}, {0.8f, 0.2f}});
  auto md2 = test::make_matrix({{0.1f, 0.9f}});
  auto td1 = test::whole_token(md1);
  auto td2 = test::whole_token(md2);
  CHECK(dtw_dissim(td1, td2, kl) != dtw_dissim(td2, td1, kl));
}

TEST_CASE("hamming weights are symmetric and normalized") {
  CHECK(hamming_weights(1) == std::vector<double>{1.0});
  for (std::size_t n : {2, 3, 5, 8, 17}) {
    auto w = hamming_weights(n);
    REQUIRE(w.size() == n);
    double sum = 0;
    for (std::size_t i = 0; i < n; ++i) {
      CHECK(w[i] == doctest::Approx(w[n - 1 - i]).epsilon(1e-15));
      CHECK(w[i] > 0.0);
      sum += w[i];
    }
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-14));
  }
  // Raw window values for n = 3 are (0.08, 1.0, 0.08).
  auto w3 = hamming_weights(3);
  CHECK(w3[0] == doctest::Approx(0.08 / 1.16).epsilon(1e-12));
  CHECK(w3[1] == doctest::Approx(1.0 / 1.16).epsilon(1e-12));
}

TEST_CASE("hamming pooling") {
  SUBCASE("single frame unchanged") {
    auto m = test::make_matrix({{0.3f, -0.7f, 2.5f}});
    auto pooled = hamming_pool(test::whole_token(m));
    CHECK(pooled == std::vector<float>{0.3f, -0.7f, 2.5f});
  }

  SUBCASE("constant sequence pools to the constant") {
    auto m = test::make_matrix({{0.25f, 1.5f}, {0.25f, 1.5f}, {0.25f, 1.5f}});
    auto pooled = hamming_pool(test::whole_token(m));
    CHECK(pooled == std::vector<float>{0.25f, 1.5f});
  }

  SUBCASE("center-peaked mix") {
    auto m = test::make_matrix({{1, 0}, {0, 1}, {1, 0}});
    auto pooled = hamming_pool(test::whole_token(m));
    CHECK(pooled[0] == doctest::Approx(0.16 / 1.16).epsilon(1e-6));
    CHECK(pooled[1] == doctest::Approx(1.0 / 1.16).epsilon(1e-6));
  }

  SUBCASE("output stays in the convex hull of the frames") {
    rng::Key key = rng::key(5);
    for (int rep = 0; rep < 100; ++rep) {
      rng::Key rk = rng::chain(key, rep);
      const std::size_t n = 1 + rng::bounded(rk, 0, 9);
      FeatureMatrix m;
      m.utterance_id = "utt";
      m.n_frames = n;
      m.n_dims = 3;
      for (std::size_t i = 0; i < n * 3; ++i) {
        m.data.push_back(
            static_cast<float>(rng::gaussian(rng::chain(rk, "f"), i)));
      }
      auto pooled = hamming_pool(test::whole_token(m));
      for (std::size_t d = 0; d < 3; ++d) {
        float lo = m.data[d], hi = m.data[d];
        for (std::size_t i = 0; i < n; ++i) {
          lo = std::min(lo, m.data[i * 3 + d]);
          hi = std::max(hi, m.data[i * 3 + d]);
        }
        CHECK(pooled[d] >= lo - 1e-6f);
        CHECK(pooled[d] <= hi + 1e-6f);
      }
    }
  }
}

TEST_CASE("pooled dissimilarity") {
  FrameDissimSpec angular;

  SUBCASE("identical sequences score zero") {
    auto m = test::make_matrix({{1, 0}, {0, 1}});
    CHECK(pooled_dissim(test::whole_token(m), test::whole_token(m),
                        angular) == 0.0);
  }

  SUBCASE("single-frame pair equals dtw") {
    auto m1 = test::make_matrix({{0.2f, 0.9f}});
    auto m2 = test::make_matrix({{0.7f, 0.1f}});
    auto t1 = test::whole_token(m1);
    auto t2 = test::whole_token(m2);
    CHECK(pooled_dissim(t1, t2, angular) == dtw_dissim(t1, t2, angular));
  }

  SUBCASE("pooling punishes temporal misalignment that dtw absorbs") {
    // dtw has a zero-cost path; the pooled centers differ.
    auto ma = test::make_matrix({{1, 0}, {1, 0}, {0, 1}});
    auto mx = test::make_matrix({{1, 0}, {0, 1}, {0, 1}});
    auto ta = test::whole_token(ma);
    auto tx = test::whole_token(mx);
    CHECK(dtw_dissim(ta, tx, angular) == 0.0);
    CHECK(pooled_dissim(ta, tx, angular) > 0.0);
  }
}

TEST_CASE("token dissim engine matches the standalone kernels") {
  rng::Key key = rng::key(31);
  std::vector<FeatureMatrix> mats;
  for (int t = 0; t < 6; ++t) {
    FeatureMatrix m;
    m.utterance_id = "u" + std::to_string(t);
    m.n_frames = 1 + rng::bounded(rng::chain(key, t), 0, 5);
    m.n_dims = 4;
    for (std::size_t i = 0; i < m.n_frames * 4; ++i) {
      double g = rng::gaussian(rng::chain(rng::chain(key, t), "f"), i);
      m.data.push_back(static_cast<float>(std::abs(g) + 0.01));
    }
    mats.push_back(std::move(m));
  }
  std::vector<TokenFrames> toks;
  for (std::size_t t = 0; t < mats.size(); ++t) {
    auto tok = test::whole_token(mats[t]);
    tok.id = static_cast<std::uint32_t>(t);
    toks.push_back(tok);
  }
  std::vector<const TokenFrames*> by_id;
  for (const auto& t : toks) by_id.push_back(&t);

  for (FrameDissim fk : {FrameDissim::Angular, FrameDissim::KlDiv}) {
    FrameDissimSpec frame{fk, 1e-10};
    for (SeqDissim sk : {SeqDissim::Dtw, SeqDissim::HammingPool}) {
      TokenDissim cached(by_id, frame, sk, true);
      TokenDissim uncached(by_id, frame, sk, false);
      for (std::uint32_t i = 0; i < toks.size(); ++i) {
        for (std::uint32_t j = 0; j < toks.size(); ++j) {
          double expect = sk == SeqDissim::Dtw
                              ? dtw_dissim(toks[i], toks[j], frame)
                              : pooled_dissim(toks[i], toks[j], frame);
          CHECK(cached(i, j) == expect);
          CHECK(uncached(i, j) == expect);
          CHECK(cached(i, j) == cached(i, j));
        }
      }
      CHECK(uncached.cache_entries() == 0);
      CHECK(cached.cache_entries() > 0);
    }
  }
}

TEST_CASE("empty sequences are rejected") {
  auto m = test::make_matrix({{1, 0}});
  auto tok = test::whole_token(m);
  TokenFrames empty = tok;
  empty.n_frames = 0;
  FrameDissimSpec angular;
  CHECK_THROWS_AS(dtw_dissim(empty, tok, angular), ValidationError);
  CHECK_THROWS_AS(hamming_pool(empty), ValidationError);
}
