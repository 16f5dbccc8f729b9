// src/corpus_io.cpp

// Copyright 2026  The wordseg Authors
//
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

#include "wordseg/corpus_io.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>
#include <unordered_set>

#include <json.hpp>

namespace wordseg {

namespace fs = std::filesystem;

namespace {

constexpr std::array<char, 4> kMagic = {'F', 'T', 'P', 'K'};

void put_u32(unsigned char* out, std::uint32_t v) {
  out[0] = static_cast<unsigned char>(v & 0xff);
  out[1] = static_cast<unsigned char>((v >> 8) & 0xff);
  out[2] = static_cast<unsigned char>((v >> 16) & 0xff);
  out[3] = static_cast<unsigned char>((v >> 24) & 0xff);
}

std::uint32_t get_u32(const unsigned char* in) {
  return static_cast<std::uint32_t>(in[0]) | (static_cast<std::uint32_t>(in[1]) << 8) |
         (static_cast<std::uint32_t>(in[2]) << 16) | (static_cast<std::uint32_t>(in[3]) << 24);
}

void put_f32(unsigned char* out, float v) { put_u32(out, std::bit_cast<std::uint32_t>(v)); }
float get_f32(const unsigned char* in) { return std::bit_cast<float>(get_u32(in)); }

struct FeatureHeader {
  std::uint32_t rows = 0;
  std::uint32_t cols = 0;
  float frame_rate_hz = 0.0f;
};

FeatureHeader parse_header(const unsigned char* header, const fs::path& path) {
  if (std::memcmp(header, kMagic.data(), kMagic.size()) != 0)
    throw FormatError("bad magic in feature file " + path.string());
  const std::uint32_t version = get_u32(header + 4);
  if (version != kFeatureFormatVersion)
    throw FormatError("unsupported feature file version " + std::to_string(version) + " in " +
                      path.string());
  FeatureHeader h{get_u32(header + 8), get_u32(header + 12), get_f32(header + 16)};
  if (h.rows == 0) throw FormatError("feature file declares T=0: " + path.string());
  if (h.cols == 0) throw FormatError("feature file declares D=0: " + path.string());
  if (!(std::isfinite(h.frame_rate_hz) && h.frame_rate_hz > 0.0f))
    throw FormatError("feature file has non-positive frame rate: " + path.string());
  return h;
}

FeatureHeader read_header(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open feature file " + path.string());
  std::array<unsigned char, kFeatureHeaderBytes> header{};
  if (!in.read(reinterpret_cast<char*>(header.data()), header.size()))
    throw FormatError("truncated header in feature file " + path.string());
  return parse_header(header.data(), path);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = s.find(sep, start);
    out.push_back(s.substr(start, pos - start));
    if (pos == std::string::npos) break;
    start = pos + 1;
  }
  return out;
}

double parse_double(const std::string& s, const std::string& where) {
  double v = 0.0;
  const char* begin = s.data();
  const char* end = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(begin, end, v);
  if (ec != std::errc() || ptr != end || !std::isfinite(v))
    throw FormatError("invalid number '" + s + "' " + where);
  return v;
}

int parse_int(const std::string& s, const std::string& where) {
  int v = 0;
  const char* begin = s.data();
  const char* end = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(begin, end, v);
  if (ec != std::errc() || ptr != end) throw FormatError("invalid integer '" + s + "' " + where);
  return v;
}

std::string where(const fs::path& path, int line_no) {
  return "at " + path.string() + ":" + std::to_string(line_no);
}

void strip_cr(std::string& line) {
  if (!line.empty() && line.back() == '\r') line.pop_back();
}

}  // namespace

void BoundarySet::validate() const {
  if (frames.size() < 2)
    throw FormatError("boundary set for '" + utt_id + "' needs at least both edges");
  if (frames.front() != 0)
    throw FormatError("boundary set for '" + utt_id + "' does not start at frame 0");
  if (frames.back() != total_frames)
    throw FormatError("boundary set for '" + utt_id + "' does not end at T=" +
                      std::to_string(total_frames));
  for (std::size_t i = 1; i < frames.size(); ++i)
    if (frames[i] <= frames[i - 1])
      throw FormatError("boundary set for '" + utt_id + "' is not strictly ascending");
}

void validate_features(const FeatureMatrix& features) {
  if (features.num_frames() < 1) throw FormatError("feature matrix has T=0");
  if (features.dim() < 1) throw FormatError("feature matrix has D=0");
  if (!(std::isfinite(features.frame_rate_hz) && features.frame_rate_hz > 0.0f))
    throw FormatError("feature matrix has non-positive frame rate");
  if (!features.data.allFinite()) throw FormatError("feature matrix contains NaN or Inf");
}

FeatureMatrix load_features(const fs::path& path) {
  std::ifstream in(path, std::ios::binary | std::ios::ate);
  if (!in) throw FormatError("cannot open feature file " + path.string());
  const auto file_size = static_cast<std::uint64_t>(in.tellg());
  in.seekg(0);
  if (file_size < kFeatureHeaderBytes)
    throw FormatError("truncated header in feature file " + path.string());
  std::array<unsigned char, kFeatureHeaderBytes> header{};
  in.read(reinterpret_cast<char*>(header.data()), header.size());
  const FeatureHeader h = parse_header(header.data(), path);

  const std::uint64_t count = static_cast<std::uint64_t>(h.rows) * h.cols;
  if (file_size - kFeatureHeaderBytes != count * 4)
    throw FormatError("payload size mismatch in " + path.string() + ": expected " +
                      std::to_string(count * 4) + " bytes, found " +
                      std::to_string(file_size - kFeatureHeaderBytes));

  std::vector<unsigned char> payload(count * 4);
  if (!in.read(reinterpret_cast<char*>(payload.data()), static_cast<std::streamsize>(payload.size())))
    throw FormatError("short read in " + path.string());

  FeatureMatrix out;
  out.utt_id = path.stem().string();
  out.frame_rate_hz = h.frame_rate_hz;
  out.data.resize(h.rows, h.cols);
  float* dst = out.data.data();
  for (std::uint64_t i = 0; i < count; ++i) {
    dst[i] = get_f32(payload.data() + 4 * i);
    if (!std::isfinite(dst[i]))
      throw FormatError("non-finite value in feature file " + path.string());
  }
  return out;
}

void save_features(const FeatureMatrix& features, const fs::path& path) {
  validate_features(features);
  const auto rows = static_cast<std::uint64_t>(features.num_frames());
  const auto cols = static_cast<std::uint64_t>(features.dim());
  if (rows > 0xffffffffu || cols > 0xffffffffu) throw FormatError("feature matrix too large");

  std::vector<unsigned char> buf(kFeatureHeaderBytes + rows * cols * 4);
  std::memcpy(buf.data(), kMagic.data(), kMagic.size());
  put_u32(buf.data() + 4, kFeatureFormatVersion);
  put_u32(buf.data() + 8, static_cast<std::uint32_t>(rows));
  put_u32(buf.data() + 12, static_cast<std::uint32_t>(cols));
  put_f32(buf.data() + 16, features.frame_rate_hz);
  const float* src = features.data.data();
  for (std::uint64_t i = 0; i < rows * cols; ++i)
    put_f32(buf.data() + kFeatureHeaderBytes + 4 * i, src[i]);

  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write feature file " + path.string());
  out.write(reinterpret_cast<const char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
  if (!out) throw std::runtime_error("I/O error writing " + path.string());
}

// ---------------------------------------------------------------------------

const ManifestEntry* Manifest::find(const std::string& utt_id) const {
  for (const auto& e : entries)
    if (e.utt_id == utt_id) return &e;
  return nullptr;
}

Manifest load_manifest(const fs::path& path, bool verify_headers) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(read_text_file(path));
  } catch (const nlohmann::json::exception& e) {
    throw FormatError("malformed manifest " + path.string() + ": " + e.what());
  }
  Manifest m;
  try {
    m.feature_source = j.at("feature_source").get<std::string>();
    const fs::path base = path.parent_path();
    std::unordered_set<std::string> seen;
    for (const auto& je : j.at("entries")) {
      ManifestEntry e;
      e.utt_id = je.at("utt_id").get<std::string>();
      const fs::path p = je.at("path").get<std::string>();
      e.path = p.is_absolute() ? p : base / p;
      e.frames = je.at("frames").get<int>();
      e.frame_rate_hz = je.at("frame_rate_hz").get<double>();
      if (!seen.insert(e.utt_id).second)
        throw FormatError("duplicate utt_id '" + e.utt_id + "' in manifest " + path.string());
      if (e.frames < 1) throw FormatError("manifest entry '" + e.utt_id + "' has frames < 1");
      if (!(e.frame_rate_hz > 0.0))
        throw FormatError("manifest entry '" + e.utt_id + "' has non-positive frame rate");
      m.entries.push_back(std::move(e));
    }
  } catch (const nlohmann::json::exception& e) {
    throw FormatError("malformed manifest " + path.string() + ": " + e.what());
  }
  if (verify_headers) {
    for (const auto& e : m.entries) {
      const FeatureHeader h = read_header(e.path);
      if (static_cast<int>(h.rows) != e.frames)
        throw FormatError("manifest frame count for '" + e.utt_id + "' (" +
                          std::to_string(e.frames) + ") does not match file (" +
                          std::to_string(h.rows) + ")");
      if (std::abs(static_cast<double>(h.frame_rate_hz) - e.frame_rate_hz) > 1e-3)
        throw FormatError("manifest frame rate for '" + e.utt_id + "' does not match file");
    }
  }
  return m;
}

void save_manifest(const Manifest& manifest, const fs::path& path) {
  nlohmann::json j;
  j["feature_source"] = manifest.feature_source;
  j["entries"] = nlohmann::json::array();
  const fs::path base = path.parent_path();
  for (const auto& e : manifest.entries) {
    fs::path stored = e.path;
    if (!base.empty() && e.path.is_relative() == base.is_relative()) {
      const fs::path rel = e.path.lexically_relative(base);
      if (!rel.empty() && *rel.begin() != "..") stored = rel;
    }
    j["entries"].push_back({{"utt_id", e.utt_id},
                            {"path", stored.generic_string()},
                            {"frames", e.frames},
                            {"frame_rate_hz", e.frame_rate_hz}});
  }
  write_text_file(path, j.dump(2) + "\n");
}

std::vector<FeatureMatrix> load_corpus(const Manifest& manifest) {
  std::vector<FeatureMatrix> out;
  out.reserve(manifest.entries.size());
  for (const auto& e : manifest.entries) {
    FeatureMatrix fm = load_features(e.path);
    if (fm.num_frames() != e.frames)
      throw FormatError("frame count mismatch for '" + e.utt_id + "'");
    fm.utt_id = e.utt_id;
    out.push_back(std::move(fm));
  }
  return out;
}

// ---------------------------------------------------------------------------

std::vector<Alignment> load_alignments(const fs::path& path, Tier tier) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open alignment file " + path.string());
  std::vector<Alignment> out;
  std::unordered_map<std::string, std::size_t> index;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    strip_cr(line);
    if (line.empty()) continue;
    const auto fields = split(line, '\t');
    if (fields.size() != 4 || fields[0].empty())
      throw FormatError("malformed alignment line " + where(path, line_no));
    AlignmentEntry entry{parse_double(fields[1], where(path, line_no)),
                         parse_double(fields[2], where(path, line_no)), fields[3]};
    if (!(entry.start_s < entry.end_s))
      throw FormatError("alignment entry with start >= end " + where(path, line_no));

    auto it = index.find(fields[0]);
    if (it == index.end()) {
      index.emplace(fields[0], out.size());
      out.push_back(Alignment{fields[0], tier, {}});
    } else if (it->second != out.size() - 1) {
      throw FormatError("entries of '" + fields[0] + "' are not contiguous " +
                        where(path, line_no));
    }
    auto& entries = out.back().entries;
    if (!entries.empty()) {
      const auto& prev = entries.back();
      if (entry.start_s < prev.start_s)
        throw FormatError("unsorted alignment entries " + where(path, line_no));
      if (prev.end_s > entry.start_s + 1e-6)
        throw FormatError("overlapping alignment entries " + where(path, line_no));
    }
    entries.push_back(std::move(entry));
  }
  return out;
}

void save_alignments(std::span<const Alignment> alignments, const fs::path& path) {
  std::ostringstream os;
  os.precision(17);
  for (const auto& a : alignments)
    for (const auto& e : a.entries)
      os << a.utt_id << '\t' << e.start_s << '\t' << e.end_s << '\t' << e.label << '\n';
  write_text_file(path, os.str());
}

std::unordered_map<std::string, const Alignment*> index_alignments(
    std::span<const Alignment> alignments) {
  std::unordered_map<std::string, const Alignment*> out;
  for (const auto& a : alignments) out.emplace(a.utt_id, &a);
  return out;
}

// ---------------------------------------------------------------------------

std::size_t ClassFile::num_segments() const {
  std::size_t n = 0;
  for (const auto& c : classes) n += c.segments.size();
  return n;
}

std::string format_classfile(const ClassFile& classes) {
  std::string out;
  char buf[64];
  for (const auto& c : classes.classes) {
    out += "Class " + std::to_string(c.id) + "\n";
    for (const auto& s : c.segments) {
      std::snprintf(buf, sizeof(buf), " %.2f %.2f\n", s.onset_s, s.offset_s);
      // Rounding can only collapse a segment if the frame rate exceeds 100 Hz.
      double on = 0.0, off = 0.0;
      std::sscanf(buf, " %lf %lf", &on, &off);
      if (!(on < off))
        throw FormatError("segment of '" + s.utt_id + "' has onset >= offset after rounding");
      out += s.utt_id;
      out += buf;
    }
    out += "\n";
  }
  return out;
}

ClassFile parse_classfile(const std::string& text) {
  ClassFile out;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  LexiconClass* current = nullptr;
  while (std::getline(in, line)) {
    ++line_no;
    strip_cr(line);
    const std::string at = "at line " + std::to_string(line_no);
    if (line.empty()) {
      current = nullptr;
      continue;
    }
    if (line.rfind("Class ", 0) == 0) {
      if (current != nullptr) throw FormatError("class block not terminated by blank line " + at);
      out.classes.push_back(LexiconClass{parse_int(line.substr(6), at), {}});
      current = &out.classes.back();
      continue;
    }
    if (current == nullptr) throw FormatError("segment line outside a class block " + at);
    const auto fields = split(line, ' ');
    if (fields.size() != 3 || fields[0].empty())
      throw FormatError("malformed class segment line " + at);
    ClassSegment seg{fields[0], parse_double(fields[1], at), parse_double(fields[2], at)};
    if (!(seg.onset_s < seg.offset_s)) throw FormatError("segment with onset >= offset " + at);
    current->segments.push_back(std::move(seg));
  }
  return out;
}

void write_classfile(const ClassFile& classes, const fs::path& path) {
  write_text_file(path, format_classfile(classes));
}

ClassFile read_classfile(const fs::path& path) { return parse_classfile(read_text_file(path)); }

// ---------------------------------------------------------------------------

void write_boundaries(std::span<const BoundarySet> boundaries, const fs::path& path) {
  std::string out;
  for (const auto& b : boundaries) {
    b.validate();
    out += b.utt_id;
    out += '\t';
    for (std::size_t i = 0; i < b.frames.size(); ++i) {
      if (i) out += ',';
      out += std::to_string(b.frames[i]);
    }
    out += '\n';
  }
  write_text_file(path, out);
}

std::vector<BoundarySet> read_boundaries(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open boundary file " + path.string());
  std::vector<BoundarySet> out;
  std::unordered_set<std::string> seen;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    strip_cr(line);
    if (line.empty()) continue;
    const auto fields = split(line, '\t');
    if (fields.size() != 2 || fields[0].empty())
      throw FormatError("malformed boundary line " + where(path, line_no));
    BoundarySet b;
    b.utt_id = fields[0];
    for (const auto& tok : split(fields[1], ','))
      b.frames.push_back(parse_int(tok, where(path, line_no)));
    b.total_frames = b.frames.back();
    b.validate();
    if (!seen.insert(b.utt_id).second)
      throw FormatError("duplicate utterance '" + b.utt_id + "' " + where(path, line_no));
    out.push_back(std::move(b));
  }
  return out;
}

std::vector<BoundarySet> read_boundaries(const fs::path& path, const Manifest& manifest) {
  auto out = read_boundaries(path);
  for (const auto& b : out) {
    const ManifestEntry* e = manifest.find(b.utt_id);
    if (e == nullptr)
      throw FormatError("boundary file utterance '" + b.utt_id + "' not in manifest");
    if (b.total_frames != e->frames)
      throw FormatError("boundaries of '" + b.utt_id + "' do not end at T=" +
                        std::to_string(e->frames));
  }
  return out;
}

std::string read_text_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
  if (!out) throw std::runtime_error("I/O error writing " + path.string());
}

}  // namespace wordseg
