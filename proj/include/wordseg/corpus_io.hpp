// include/wordseg/corpus_io.hpp

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

#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "wordseg/types.hpp"

namespace wordseg {

// ---------------------------------------------------------------------------
// Feature files
//
// Layout (all little-endian):
//   "FTPK" | u32 version (=1) | u32 T | u32 D | f32 frame_rate_hz | T*D f32
// with the payload stored row-major. The 20-byte header is followed directly
// by the payload; no trailing bytes are allowed.

inline constexpr std::uint32_t kFeatureFormatVersion = 1;
inline constexpr std::size_t kFeatureHeaderBytes = 20;

// utt_id is taken from the file stem.
FeatureMatrix load_features(const std::filesystem::path& path);
void save_features(const FeatureMatrix& features, const std::filesystem::path& path);

// Checks T >= 1, D >= 1, positive frame rate and finite entries.
void validate_features(const FeatureMatrix& features);

// ---------------------------------------------------------------------------
// Manifest

struct ManifestEntry {
  std::string utt_id;
  std::filesystem::path path;  // resolved against the manifest directory
  int frames = 0;
  double frame_rate_hz = 50.0;
};

struct Manifest {
  std::string feature_source;
  std::vector<ManifestEntry> entries;

  const ManifestEntry* find(const std::string& utt_id) const;
};

// With verify_headers, every referenced feature file header is read and its
// frame count/rate checked against the manifest.
Manifest load_manifest(const std::filesystem::path& path, bool verify_headers = true);
// Paths are written relative to the manifest directory when possible.
void save_manifest(const Manifest& manifest, const std::filesystem::path& path);

// Loads every feature file of the manifest, in manifest order.
std::vector<FeatureMatrix> load_corpus(const Manifest& manifest);

// ---------------------------------------------------------------------------
// Alignments: utt_id<TAB>start_s<TAB>end_s<TAB>label, one tier per file.

enum class Tier { kWord, kPhone };

struct AlignmentEntry {
  double start_s = 0.0;
  double end_s = 0.0;
  std::string label;
};

struct Alignment {
  std::string utt_id;
  Tier tier = Tier::kWord;
  std::vector<AlignmentEntry> entries;
};

// Utterances are returned in order of first appearance. Entries of an
// utterance must be contiguous, sorted and non-overlapping.
std::vector<Alignment> load_alignments(const std::filesystem::path& path, Tier tier);
void save_alignments(std::span<const Alignment> alignments, const std::filesystem::path& path);

std::unordered_map<std::string, const Alignment*> index_alignments(
    std::span<const Alignment> alignments);

// ---------------------------------------------------------------------------
// Class files (discovered lexicon)

struct ClassSegment {
  std::string utt_id;
  double onset_s = 0.0;
  double offset_s = 0.0;
};

struct LexiconClass {
  int id = 0;
  std::vector<ClassSegment> segments;
};

struct ClassFile {
  std::vector<LexiconClass> classes;

  std::size_t num_segments() const;
};

// Blocks of "Class <k>\n" followed by "utt_id onset offset" lines (two
// decimals), each block terminated by a blank line.
std::string format_classfile(const ClassFile& classes);
ClassFile parse_classfile(const std::string& text);
void write_classfile(const ClassFile& classes, const std::filesystem::path& path);
ClassFile read_classfile(const std::filesystem::path& path);

// ---------------------------------------------------------------------------
// Boundary files: utt_id<TAB>0,b1,...,T

void write_boundaries(std::span<const BoundarySet> boundaries, const std::filesystem::path& path);
// total_frames is taken from the last index.
std::vector<BoundarySet> read_boundaries(const std::filesystem::path& path);
// Additionally requires every utterance to be in the manifest and to end at
// its frame count. Output follows file order.
std::vector<BoundarySet> read_boundaries(const std::filesystem::path& path, const Manifest& manifest);

std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, const std::string& text);

}  // namespace wordseg
