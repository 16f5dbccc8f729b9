// include/wordseg/types.hpp

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

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace wordseg {

using FloatMatrix = Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// Thrown for malformed input files and violated data invariants.
class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A segment whose pooled feature average has zero norm. Callers drop the
// segment (with a warning) instead of aborting a corpus run.
class DegenerateSegment : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Frame-level features for one utterance: T rows of D-dimensional frames.
struct FeatureMatrix {
  std::string utt_id;
  float frame_rate_hz = 50.0f;
  FloatMatrix data;

  int num_frames() const { return static_cast<int>(data.rows()); }
  int dim() const { return static_cast<int>(data.cols()); }
};

/// Ordered frame-index boundaries of one utterance. Always holds both edges:
/// frames.front() == 0 and frames.back() == total_frames.
struct BoundarySet {
  std::string utt_id;
  std::vector<int> frames;
  int total_frames = 0;

  int num_segments() const { return frames.empty() ? 0 : static_cast<int>(frames.size()) - 1; }

  // Throws FormatError unless the invariants above hold.
  void validate() const;

  friend bool operator==(const BoundarySet&, const BoundarySet&) = default;
};

/// A half-open frame range [start_frame, end_frame) of one utterance.
struct SegmentRef {
  std::string utt_id;
  int start_frame = 0;
  int end_frame = 0;

  int duration() const { return end_frame - start_frame; }
  friend bool operator==(const SegmentRef&, const SegmentRef&) = default;
};

inline double frames_to_seconds(int frame_index, double frame_rate_hz) {
  return static_cast<double>(frame_index) / frame_rate_hz;
}

}  // namespace wordseg
