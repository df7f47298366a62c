// src/featureio.cpp

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

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>

namespace abx {

namespace {

// Tolerance for text round-trip noise in times. Frame assignment margins
// are half a frame period, far above this.
constexpr double kTimeEps = 1e-9;

std::vector<std::string> split_tabs(const std::string& line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    std::size_t pos = line.find('\t', start);
    if (pos == std::string::npos) {
      out.push_back(line.substr(start));
      break;
    }
    out.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
  return out;
}

double parse_time(const std::string& s, const std::filesystem::path& path,
                  std::size_t line_no) {
  try {
    std::size_t used = 0;
    double v = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument("trailing");
    return v;
  } catch (const std::exception&) {
    throw ParseError(path.string() + ":" + std::to_string(line_no) +
                     ": bad time value '" + s + "'");
  }
}

// Little-endian packing, independent of host byte order.
void put_u32(std::string& out, std::uint32_t v) {
  out.push_back(static_cast<char>(v & 0xff));
  out.push_back(static_cast<char>((v >> 8) & 0xff));
  out.push_back(static_cast<char>((v >> 16) & 0xff));
  out.push_back(static_cast<char>((v >> 24) & 0xff));
}

void put_u64(std::string& out, std::uint64_t v) {
  put_u32(out, static_cast<std::uint32_t>(v & 0xffffffffULL));
  put_u32(out, static_cast<std::uint32_t>(v >> 32));
}

void put_f64(std::string& out, double v) {
  put_u64(out, std::bit_cast<std::uint64_t>(v));
}

void put_f32(std::string& out, float v) {
  put_u32(out, std::bit_cast<std::uint32_t>(v));
}

class Reader {
 public:
  Reader(const std::filesystem::path& path) : path_(path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open feature archive: " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    buf_ = ss.str();
  }

  void need(std::size_t n, const std::string& what) {
    if (pos_ + n > buf_.size()) {
      throw ParseError(path_.string() + ": truncated archive while reading " +
                       what);
    }
  }

  std::uint32_t u32(const std::string& what) {
    need(4, what);
    const unsigned char* p =
        reinterpret_cast<const unsigned char*>(buf_.data()) + pos_;
    pos_ += 4;
    return static_cast<std::uint32_t>(p[0]) |
           (static_cast<std::uint32_t>(p[1]) << 8) |
           (static_cast<std::uint32_t>(p[2]) << 16) |
           (static_cast<std::uint32_t>(p[3]) << 24);
  }

  double f64(const std::string& what) {
    std::uint64_t lo = u32(what);
    std::uint64_t hi = u32(what);
    return std::bit_cast<double>(lo | (hi << 32));
  }

  std::string bytes(std::size_t n, const std::string& what) {
    need(n, what);
    std::string s = buf_.substr(pos_, n);
    pos_ += n;
    return s;
  }

  void f32_block(float* dst, std::size_t count, const std::string& what) {
    need(count * 4, what);
    const unsigned char* p =
        reinterpret_cast<const unsigned char*>(buf_.data()) + pos_;
    for (std::size_t i = 0; i < count; ++i, p += 4) {
      std::uint32_t v = static_cast<std::uint32_t>(p[0]) |
                        (static_cast<std::uint32_t>(p[1]) << 8) |
                        (static_cast<std::uint32_t>(p[2]) << 16) |
                        (static_cast<std::uint32_t>(p[3]) << 24);
      dst[i] = std::bit_cast<float>(v);
    }
    pos_ += count * 4;
  }

 private:
  std::filesystem::path path_;
  std::string buf_;
  std::size_t pos_ = 0;
};

FeatureMap read_text_dir(const std::filesystem::path& dir,
                         double frame_period_s) {
  FeatureMap out;
  std::vector<std::filesystem::path> files;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (entry.path().extension() == ".txt") files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  for (const auto& file : files) {
    std::ifstream in(file);
    if (!in) throw IoError("cannot open " + file.string());
    FeatureMatrix m;
    m.utterance_id = file.stem().string();
    m.frame_period_s = frame_period_s;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      std::istringstream ls(line);
      std::vector<float> row;
      float v;
      while (ls >> v) row.push_back(v);
      if (row.empty()) continue;
      if (m.n_dims == 0) {
        m.n_dims = row.size();
      } else if (row.size() != m.n_dims) {
        throw ParseError(file.string() + ":" + std::to_string(line_no) +
                         ": expected " + std::to_string(m.n_dims) +
                         " values, got " + std::to_string(row.size()));
      }
      m.data.insert(m.data.end(), row.begin(), row.end());
      ++m.n_frames;
    }
    m.validate();
    out.emplace(m.utterance_id, std::move(m));
  }
  return out;
}

}  // namespace

void FeatureMatrix::validate() const {
  if (n_frames < 1 || n_dims < 1) {
    throw ValidationError("feature matrix '" + utterance_id +
                          "' must have at least 1 frame and 1 dimension");
  }
  if (data.size() != n_frames * n_dims) {
    throw ValidationError("feature matrix '" + utterance_id +
                          "' has inconsistent shape");
  }
  if (!(frame_period_s > 0.0)) {
    throw ValidationError("feature matrix '" + utterance_id +
                          "' has non-positive frame period");
  }
  for (float v : data) {
    if (!std::isfinite(v)) {
      throw ValidationError("feature matrix '" + utterance_id +
                            "' contains a non-finite value");
    }
  }
}

std::vector<AlignmentSegment> read_alignments_with_label(
    const std::filesystem::path& path, const std::string& label_column) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open alignment file: " + path.string());

  std::string line;
  if (!std::getline(in, line)) {
    throw ParseError(path.string() + ": empty file, header row required");
  }
  if (!line.empty() && line.back() == '\r') line.pop_back();
  const std::vector<std::string> expected = {"utterance_id", "speaker_id",
                                             label_column, "onset", "offset"};
  if (split_tabs(line) != expected) {
    throw ParseError(path.string() +
                     ":1: bad header, expected columns utterance_id "
                     "speaker_id " +
                     label_column + " onset offset");
  }

  std::vector<AlignmentSegment> segments;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto cols = split_tabs(line);
    if (cols.size() != 5) {
      throw ParseError(path.string() + ":" + std::to_string(line_no) +
                       ": expected 5 tab-separated columns, got " +
                       std::to_string(cols.size()));
    }
    AlignmentSegment seg;
    seg.utterance_id = cols[0];
    seg.speaker_id = cols[1];
    seg.phone = cols[2];
    seg.onset_s = parse_time(cols[3], path, line_no);
    seg.offset_s = parse_time(cols[4], path, line_no);
    if (seg.utterance_id.empty() || seg.phone.empty()) {
      throw ParseError(path.string() + ":" + std::to_string(line_no) +
                       ": empty utterance or label field");
    }
    if (!(seg.offset_s > seg.onset_s)) {
      throw ValidationError(path.string() + ":" + std::to_string(line_no) +
                            ": offset must exceed onset");
    }
    segments.push_back(std::move(seg));
  }

  std::stable_sort(segments.begin(), segments.end(),
                   [](const AlignmentSegment& a, const AlignmentSegment& b) {
                     if (a.utterance_id != b.utterance_id)
                       return a.utterance_id < b.utterance_id;
                     return a.onset_s < b.onset_s;
                   });

  for (std::size_t i = 0; i < segments.size(); ++i) {
    AlignmentSegment& seg = segments[i];
    bool first = i == 0 || segments[i - 1].utterance_id != seg.utterance_id;
    bool last = i + 1 == segments.size() ||
                segments[i + 1].utterance_id != seg.utterance_id;
    if (!first) {
      const AlignmentSegment& prev = segments[i - 1];
      if (seg.onset_s < prev.offset_s - kTimeEps) {
        throw ValidationError(
            "overlapping segments in utterance '" + seg.utterance_id +
            "': [" + std::to_string(prev.onset_s) + ", " +
            std::to_string(prev.offset_s) + ") overlaps [" +
            std::to_string(seg.onset_s) + ", " + std::to_string(seg.offset_s) +
            ")");
      }
      seg.prev_phone = prev.phone;
    }
    if (!last) seg.next_phone = segments[i + 1].phone;
    if (first) seg.prev_phone = kBoundaryLabel;
    if (last) seg.next_phone = kBoundaryLabel;
  }
  return segments;
}

std::vector<AlignmentSegment> read_alignments(
    const std::filesystem::path& path) {
  return read_alignments_with_label(path, "phone");
}

void write_alignments(const std::vector<AlignmentSegment>& segments,
                      const std::filesystem::path& path,
                      const std::string& label_column) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write alignment file: " + path.string());
  out << "utterance_id\tspeaker_id\t" << label_column << "\tonset\toffset\n";
  char buf[64];
  for (const auto& seg : segments) {
    std::snprintf(buf, sizeof(buf), "%.6f\t%.6f", seg.onset_s, seg.offset_s);
    out << seg.utterance_id << '\t' << seg.speaker_id << '\t' << seg.phone
        << '\t' << buf << '\n';
  }
  if (!out) throw IoError("write failed: " + path.string());
}

FeatureMap read_features(const std::filesystem::path& path,
                         double text_frame_period_s) {
  if (std::filesystem::is_directory(path)) {
    return read_text_dir(path, text_frame_period_s);
  }
  Reader r(path);
  if (r.bytes(4, "magic") != "ABXF") {
    throw ParseError(path.string() + ": bad magic, not a feature archive");
  }
  std::uint32_t version = r.u32("version");
  if (version != 1) {
    throw ParseError(path.string() + ": unsupported archive version " +
                     std::to_string(version));
  }
  double frame_period_s = r.f64("frame period");
  std::uint32_t n_utts = r.u32("utterance count");

  FeatureMap out;
  for (std::uint32_t u = 0; u < n_utts; ++u) {
    std::uint32_t id_len = r.u32("utterance id length");
    std::string id = r.bytes(id_len, "utterance id");
    FeatureMatrix m;
    m.utterance_id = id;
    m.frame_period_s = frame_period_s;
    m.n_frames = r.u32("frame count of '" + id + "'");
    m.n_dims = r.u32("dimension of '" + id + "'");
    m.data.resize(m.n_frames * m.n_dims);
    r.f32_block(m.data.data(), m.data.size(), "payload of '" + id + "'");
    m.validate();
    if (!out.emplace(id, std::move(m)).second) {
      throw ParseError(path.string() + ": duplicate utterance id '" + id +
                       "'");
    }
  }
  return out;
}

void write_features(const FeatureMap& features,
                    const std::filesystem::path& path) {
  double period = kDefaultFramePeriod;
  bool first = true;
  for (const auto& [id, m] : features) {
    m.validate();
    if (m.utterance_id != id) {
      throw ValidationError("feature map key '" + id +
                            "' does not match matrix id '" + m.utterance_id +
                            "'");
    }
    if (first) {
      period = m.frame_period_s;
      first = false;
    } else if (m.frame_period_s != period) {
      throw ValidationError(
          "all matrices in one archive must share a frame period");
    }
  }

  std::string buf;
  buf += "ABXF";
  put_u32(buf, 1);
  put_f64(buf, period);
  put_u32(buf, static_cast<std::uint32_t>(features.size()));
  for (const auto& [id, m] : features) {  // std::map iterates sorted by id
    put_u32(buf, static_cast<std::uint32_t>(id.size()));
    buf += id;
    put_u32(buf, static_cast<std::uint32_t>(m.n_frames));
    put_u32(buf, static_cast<std::uint32_t>(m.n_dims));
    for (float v : m.data) put_f32(buf, v);
  }

  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write feature archive: " + path.string());
  out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
  if (!out) throw IoError("write failed: " + path.string());
}

TokenFrames extract_token(const FeatureMatrix& features,
                          const AlignmentSegment& segment) {
  if (segment.utterance_id != features.utterance_id) {
    throw ValidationError("segment utterance '" + segment.utterance_id +
                          "' does not match features '" +
                          features.utterance_id + "'");
  }
  const double T = features.frame_period_s;
  const double duration = static_cast<double>(features.n_frames) * T;
  if (segment.onset_s > duration + T + kTimeEps ||
      segment.offset_s < -T - kTimeEps) {
    throw ValidationError("segment [" + std::to_string(segment.onset_s) +
                          ", " + std::to_string(segment.offset_s) +
                          ") of utterance '" + segment.utterance_id +
                          "' lies outside the feature time range");
  }

  // First/last frame whose center (i + 0.5) * T falls in [onset, offset).
  auto center = [T](std::ptrdiff_t i) {
    return (static_cast<double>(i) + 0.5) * T;
  };
  std::ptrdiff_t lo =
      static_cast<std::ptrdiff_t>(std::ceil(segment.onset_s / T - 0.5));
  while (center(lo) < segment.onset_s) ++lo;
  while (lo > 0 && center(lo - 1) >= segment.onset_s) --lo;
  std::ptrdiff_t hi =
      static_cast<std::ptrdiff_t>(std::ceil(segment.offset_s / T - 0.5)) - 1;
  while (center(hi) >= segment.offset_s) --hi;
  while (center(hi + 1) < segment.offset_s) ++hi;

  const std::ptrdiff_t last = static_cast<std::ptrdiff_t>(features.n_frames) - 1;
  lo = std::max<std::ptrdiff_t>(lo, 0);
  hi = std::min(hi, last);

  TokenFrames tok;
  tok.segment = segment;
  tok.features = &features;
  if (lo > hi) {
    // No center inside: fall back to the frame nearest the midpoint.
    double mid = 0.5 * (segment.onset_s + segment.offset_s);
    std::ptrdiff_t i =
        static_cast<std::ptrdiff_t>(std::llround(mid / T - 0.5));
    i = std::clamp<std::ptrdiff_t>(i, 0, last);
    tok.first_frame = static_cast<std::size_t>(i);
    tok.n_frames = 1;
  } else {
    tok.first_frame = static_cast<std::size_t>(lo);
    tok.n_frames = static_cast<std::size_t>(hi - lo + 1);
  }
  return tok;
}

}  // namespace abx
