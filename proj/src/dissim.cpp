// src/dissim.cpp

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

#include <algorithm>
#include <cmath>
#include <limits>
#include <mutex>
#include <unordered_map>

#include "abx/simd.hpp"

namespace abx {

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kInf = std::numeric_limits<double>::infinity();

double angular_from(double dot, double norm_u, double norm_v) {
  if (norm_u == 0.0 || norm_v == 0.0) {
    return (norm_u == 0.0 && norm_v == 0.0) ? 0.0 : 1.0;
  }
  double c = dot / (norm_u * norm_v);
  c = std::clamp(c, -1.0, 1.0);
  return std::acos(c) / kPi;
}

// Floor at epsilon and renormalize to sum 1.
std::vector<double> kl_project(std::span<const float> u, double epsilon) {
  std::vector<double> out(u.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    double x = static_cast<double>(u[i]);
    if (x < -epsilon) {
      throw ValidationError("negative entry in a distribution input: " +
                            std::to_string(x));
    }
    out[i] = std::max(x, epsilon);
    sum += out[i];
  }
  for (double& x : out) x /= sum;
  return out;
}

double kl_from_projected(const double* u, const double* v, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    acc += u[i] * std::log(u[i] / v[i]);
  }
  return acc;
}

void check_dims(std::size_t a, std::size_t b) {
  if (a != b) {
    throw ValidationError("frame dimension mismatch: " + std::to_string(a) +
                          " vs " + std::to_string(b));
  }
}

// Layered dynamic program over path length. layer L holds, per cell, the
// minimal cost sum over paths of exactly L points; the answer is the
// minimum of end-cell sums divided by their L. Each stored sum is the sum
// of some concrete path accumulated start to end, so the result matches
// exhaustive path enumeration bit for bit.
double dtw_from_cost(std::size_t m, std::size_t n, const double* cost) {
  if (m == 1 && n == 1) return cost[0];

  thread_local std::vector<double> prev_buf, cur_buf;
  prev_buf.assign(m * n, kInf);
  cur_buf.assign(m * n, kInf);
  double* prev = prev_buf.data();
  double* cur = cur_buf.data();

  prev[0] = cost[0];
  double best = kInf;
  const std::size_t max_len = m + n - 1;
  for (std::size_t len = 2; len <= max_len; ++len) {
    for (std::size_t i = 0; i < m; ++i) {
      for (std::size_t j = 0; j < n; ++j) {
        if (i == 0 && j == 0) {
          cur[0] = kInf;
          continue;
        }
        double p = kInf;
        if (i > 0) p = std::min(p, prev[(i - 1) * n + j]);
        if (j > 0) p = std::min(p, prev[i * n + (j - 1)]);
        if (i > 0 && j > 0) p = std::min(p, prev[(i - 1) * n + (j - 1)]);
        cur[i * n + j] = (p == kInf) ? kInf : p + cost[i * n + j];
      }
    }
    double end = cur[m * n - 1];
    if (end != kInf) {
      best = std::min(best, end / static_cast<double>(len));
    }
    std::swap(prev, cur);
  }
  return best;
}

std::vector<double> raw_hamming_weights(std::size_t n) {
  std::vector<double> w(n);
  if (n == 1) {
    w[0] = 1.0;
    return w;
  }
  for (std::size_t i = 0; i < n; ++i) {
    w[i] = 0.54 - 0.46 * std::cos(2.0 * kPi * static_cast<double>(i) /
                                  static_cast<double>(n - 1));
  }
  return w;
}

// Weighted average of the token frames. The weight sum is accumulated in
// the same frame order as each component, so a component that is 1 in
// every frame pools to exactly 1.
std::vector<float> pool_with_weights(const TokenFrames& seq,
                                     const std::vector<double>& w) {
  const std::size_t dim = seq.dim();
  const auto& axpy = simd::active().axpy;
  std::vector<double> acc(dim, 0.0);
  double wsum = 0.0;
  for (std::size_t i = 0; i < seq.n_frames; ++i) {
    axpy(w[i], seq.frame(i).data(), acc.data(), dim);
    wsum += w[i];
  }
  std::vector<float> out(dim);
  for (std::size_t j = 0; j < dim; ++j) {
    out[j] = static_cast<float>(acc[j] / wsum);
  }
  return out;
}

std::vector<float> pool_kl_reproject(std::vector<float> pooled,
                                     double epsilon) {
  std::vector<double> p = kl_project(pooled, epsilon);
  for (std::size_t i = 0; i < pooled.size(); ++i) {
    pooled[i] = static_cast<float>(p[i]);
  }
  return pooled;
}

}  // namespace

std::string to_string(FrameDissim k) {
  return k == FrameDissim::Angular ? "angular" : "kl";
}

std::string to_string(SeqDissim k) {
  return k == SeqDissim::Dtw ? "dtw" : "hamming";
}

double angular_dissim(std::span<const float> u, std::span<const float> v) {
  check_dims(u.size(), v.size());
  const auto& k = simd::active();
  double dot = k.dot(u.data(), v.data(), u.size());
  double nu = std::sqrt(k.sumsq(u.data(), u.size()));
  double nv = std::sqrt(k.sumsq(v.data(), v.size()));
  return angular_from(dot, nu, nv);
}

double kl_dissim(std::span<const float> u, std::span<const float> v,
                 double epsilon) {
  check_dims(u.size(), v.size());
  if (!(epsilon > 0.0)) throw ValidationError("epsilon must be positive");
  std::vector<double> up = kl_project(u, epsilon);
  std::vector<double> vp = kl_project(v, epsilon);
  return kl_from_projected(up.data(), vp.data(), up.size());
}

double dtw_normalized_avg(
    std::size_t m, std::size_t n,
    const std::function<double(std::size_t, std::size_t)>& frame_cost) {
  if (m == 0 || n == 0) {
    throw ValidationError("dtw requires non-empty sequences");
  }
  std::vector<double> cost(m * n);
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      cost[i * n + j] = frame_cost(i, j);
    }
  }
  return dtw_from_cost(m, n, cost.data());
}

double dtw_dissim(const TokenFrames& seq_a, const TokenFrames& seq_x,
                  const FrameDissimSpec& frame) {
  if (seq_a.n_frames == 0 || seq_x.n_frames == 0) {
    throw ValidationError("dtw requires non-empty token sequences");
  }
  check_dims(seq_a.dim(), seq_x.dim());
  if (frame.kind == FrameDissim::Angular) {
    const auto& k = simd::active();
    std::vector<double> na(seq_a.n_frames), nx(seq_x.n_frames);
    for (std::size_t i = 0; i < seq_a.n_frames; ++i) {
      na[i] = std::sqrt(k.sumsq(seq_a.frame(i).data(), seq_a.dim()));
    }
    for (std::size_t j = 0; j < seq_x.n_frames; ++j) {
      nx[j] = std::sqrt(k.sumsq(seq_x.frame(j).data(), seq_x.dim()));
    }
    return dtw_normalized_avg(
        seq_a.n_frames, seq_x.n_frames, [&](std::size_t i, std::size_t j) {
          double dot =
              k.dot(seq_a.frame(i).data(), seq_x.frame(j).data(), seq_a.dim());
          return angular_from(dot, na[i], nx[j]);
        });
  }
  std::vector<std::vector<double>> ap(seq_a.n_frames), xp(seq_x.n_frames);
  for (std::size_t i = 0; i < seq_a.n_frames; ++i) {
    ap[i] = kl_project(seq_a.frame(i), frame.epsilon);
  }
  for (std::size_t j = 0; j < seq_x.n_frames; ++j) {
    xp[j] = kl_project(seq_x.frame(j), frame.epsilon);
  }
  return dtw_normalized_avg(
      seq_a.n_frames, seq_x.n_frames, [&](std::size_t i, std::size_t j) {
        return kl_from_projected(ap[i].data(), xp[j].data(), seq_a.dim());
      });
}

std::vector<double> hamming_weights(std::size_t n) {
  if (n == 0) throw ValidationError("window size must be positive");
  std::vector<double> w = raw_hamming_weights(n);
  double sum = 0.0;
  for (double x : w) sum += x;
  for (double& x : w) x /= sum;
  return w;
}

std::vector<float> hamming_pool(const TokenFrames& seq) {
  if (seq.n_frames == 0) {
    throw ValidationError("cannot pool an empty token");
  }
  return pool_with_weights(seq, raw_hamming_weights(seq.n_frames));
}

std::vector<float> hamming_pool(const TokenFrames& seq,
                                const FrameDissimSpec& frame) {
  std::vector<float> pooled = hamming_pool(seq);
  if (frame.kind == FrameDissim::KlDiv) {
    pooled = pool_kl_reproject(std::move(pooled), frame.epsilon);
  }
  return pooled;
}

double pooled_dissim(const TokenFrames& seq_a, const TokenFrames& seq_x,
                     const FrameDissimSpec& frame) {
  check_dims(seq_a.dim(), seq_x.dim());
  std::vector<float> pa = hamming_pool(seq_a, frame);
  std::vector<float> px = hamming_pool(seq_x, frame);
  if (frame.kind == FrameDissim::Angular) {
    return angular_dissim(pa, px);
  }
  return kl_dissim(pa, px, frame.epsilon);
}

// ---------------------------------------------------------------------------
// TokenDissim

struct TokenDissim::Impl {
  static constexpr std::size_t kShards = 64;

  std::vector<const TokenFrames*> tokens;
  FrameDissimSpec frame;
  SeqDissim seq;
  bool memoize;
  std::size_t dim = 0;

  // Per-token preparation, indexed by id.
  std::vector<std::vector<double>> frame_norms;  // Angular + Dtw
  std::vector<std::vector<double>> kl_rows;      // KlDiv + Dtw, row-major
  std::vector<std::vector<float>> pooled;        // HammingPool
  std::vector<double> pooled_norm;               // Angular + HammingPool
  std::vector<std::vector<double>> pooled_kl;    // KlDiv + HammingPool

  struct Shard {
    mutable std::mutex mu;
    std::unordered_map<std::uint64_t, double> map;
  };
  mutable std::vector<Shard> shards;

  double compute(std::uint32_t a, std::uint32_t x) const;
  double lookup(std::uint32_t a, std::uint32_t x) const;
};

TokenDissim::TokenDissim(std::vector<const TokenFrames*> tokens_by_id,
                         const FrameDissimSpec& frame, SeqDissim seq,
                         bool memoize)
    : impl_(std::make_unique<Impl>()) {
  impl_->tokens = std::move(tokens_by_id);
  impl_->frame = frame;
  impl_->seq = seq;
  impl_->memoize = memoize;
  if (memoize) impl_->shards = std::vector<Impl::Shard>(Impl::kShards);

  const auto& toks = impl_->tokens;
  for (const TokenFrames* t : toks) {
    if (t == nullptr) continue;
    if (t->n_frames == 0) {
      throw ValidationError("token '" + t->segment.phone + "' in '" +
                            t->segment.utterance_id + "' has no frames");
    }
    if (impl_->dim == 0) {
      impl_->dim = t->dim();
    } else {
      check_dims(impl_->dim, t->dim());
    }
  }

  const auto& k = simd::active();
  const std::size_t n = toks.size();
  if (seq == SeqDissim::Dtw) {
    if (frame.kind == FrameDissim::Angular) {
      impl_->frame_norms.resize(n);
      for (std::size_t id = 0; id < n; ++id) {
        const TokenFrames* t = toks[id];
        if (!t) continue;
        auto& norms = impl_->frame_norms[id];
        norms.resize(t->n_frames);
        for (std::size_t i = 0; i < t->n_frames; ++i) {
          norms[i] = std::sqrt(k.sumsq(t->frame(i).data(), t->dim()));
        }
      }
    } else {
      impl_->kl_rows.resize(n);
      for (std::size_t id = 0; id < n; ++id) {
        const TokenFrames* t = toks[id];
        if (!t) continue;
        auto& rows = impl_->kl_rows[id];
        rows.reserve(t->n_frames * t->dim());
        for (std::size_t i = 0; i < t->n_frames; ++i) {
          auto p = kl_project(t->frame(i), frame.epsilon);
          rows.insert(rows.end(), p.begin(), p.end());
        }
      }
    }
  } else {
    impl_->pooled.resize(n);
    if (frame.kind == FrameDissim::Angular) {
      impl_->pooled_norm.resize(n, 0.0);
    } else {
      impl_->pooled_kl.resize(n);
    }
    for (std::size_t id = 0; id < n; ++id) {
      const TokenFrames* t = toks[id];
      if (!t) continue;
      impl_->pooled[id] = hamming_pool(*t, frame);
      if (frame.kind == FrameDissim::Angular) {
        impl_->pooled_norm[id] =
            std::sqrt(k.sumsq(impl_->pooled[id].data(), t->dim()));
      } else {
        impl_->pooled_kl[id] = kl_project(impl_->pooled[id], frame.epsilon);
      }
    }
  }
}

TokenDissim::~TokenDissim() = default;

double TokenDissim::Impl::compute(std::uint32_t a, std::uint32_t x) const {
  const TokenFrames* ta = tokens[a];
  const TokenFrames* tx = tokens[x];
  const auto& k = simd::active();
  if (seq == SeqDissim::Dtw) {
    if (frame.kind == FrameDissim::Angular) {
      const auto& na = frame_norms[a];
      const auto& nx = frame_norms[x];
      const std::size_t m = ta->n_frames, nn = tx->n_frames, d = dim;
      thread_local std::vector<double> cost;
      cost.resize(m * nn);
      for (std::size_t i = 0; i < m; ++i) {
        const float* fa = ta->frame(i).data();
        for (std::size_t j = 0; j < nn; ++j) {
          double dot = k.dot(fa, tx->frame(j).data(), d);
          cost[i * nn + j] = angular_from(dot, na[i], nx[j]);
        }
      }
      return dtw_from_cost(m, nn, cost.data());
    }
    const auto& ra = kl_rows[a];
    const auto& rx = kl_rows[x];
    const std::size_t m = ta->n_frames, nn = tx->n_frames, d = dim;
    thread_local std::vector<double> cost;
    cost.resize(m * nn);
    for (std::size_t i = 0; i < m; ++i) {
      for (std::size_t j = 0; j < nn; ++j) {
        cost[i * nn + j] =
            kl_from_projected(ra.data() + i * d, rx.data() + j * d, d);
      }
    }
    return dtw_from_cost(m, nn, cost.data());
  }
  if (frame.kind == FrameDissim::Angular) {
    double dot = k.dot(pooled[a].data(), pooled[x].data(), dim);
    return angular_from(dot, pooled_norm[a], pooled_norm[x]);
  }
  return kl_from_projected(pooled_kl[a].data(), pooled_kl[x].data(), dim);
}

double TokenDissim::Impl::lookup(std::uint32_t a, std::uint32_t x) const {
  // Angular sequence dissimilarities are exactly symmetric, so one cache
  // entry serves both directions. KL is directional.
  std::uint32_t ka = a, kx = x;
  if (frame.kind == FrameDissim::Angular && ka > kx) std::swap(ka, kx);
  const std::uint64_t key =
      (static_cast<std::uint64_t>(ka) << 32) | static_cast<std::uint64_t>(kx);
  Shard& shard = shards[key % kShards];
  {
    std::lock_guard<std::mutex> lock(shard.mu);
    auto it = shard.map.find(key);
    if (it != shard.map.end()) return it->second;
  }
  double value = compute(ka, kx);
  {
    std::lock_guard<std::mutex> lock(shard.mu);
    shard.map.emplace(key, value);
  }
  return value;
}

double TokenDissim::operator()(std::uint32_t first_id,
                               std::uint32_t second_id) const {
  const auto& toks = impl_->tokens;
  if (first_id >= toks.size() || second_id >= toks.size() ||
      toks[first_id] == nullptr || toks[second_id] == nullptr) {
    throw ValidationError("unknown token id " + std::to_string(first_id) +
                          " or " + std::to_string(second_id));
  }
  if (!impl_->memoize) return impl_->compute(first_id, second_id);
  return impl_->lookup(first_id, second_id);
}

std::size_t TokenDissim::n_tokens() const { return impl_->tokens.size(); }

std::size_t TokenDissim::cache_entries() const {
  std::size_t total = 0;
  for (const auto& shard : impl_->shards) {
    std::lock_guard<std::mutex> lock(shard.mu);
    total += shard.map.size();
  }
  return total;
}

}  // namespace abx
