// include/wordseg/boundary_detect.hpp

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

#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "wordseg/types.hpp"

namespace wordseg {

/// Cosine distances between adjacent frames: values[t] = d(y[t+1], y[t]),
/// length T-1, each in [0, 2].
struct DissimilarityCurve {
  std::string utt_id;
  std::vector<double> values;
};

struct SegmenterConfig {
  int window_frames = 4;
  double prominence_threshold = 0.75;
  int min_segment_frames = 1;

  // Word-boundary setting and the over-generating candidate setting used to
  // seed ES-KMeans+.
  static SegmenterConfig prominence() { return {4, 0.75, 1}; }
  static SegmenterConfig candidates() { return {5, 0.3, 1}; }

  void validate() const;
};

/// Per-dimension statistics over every frame of a corpus.
struct NormalizationStats {
  Eigen::VectorXd mean;
  Eigen::VectorXd stddev;  // population; dimensions below kMinVariance are not scaled
  static constexpr double kMinVariance = 1e-12;
};

NormalizationStats corpus_statistics(std::span<const FeatureMatrix> corpus);
FeatureMatrix apply_normalization(const NormalizationStats& stats, const FeatureMatrix& features);

// Zero mean, unit variance per dimension with statistics pooled over all
// frames of the corpus. Throws on an empty corpus or mismatched D.
std::vector<FeatureMatrix> normalize_corpus(std::span<const FeatureMatrix> corpus, int threads = 1);

// Throws std::invalid_argument for T < 2 or a zero-norm frame.
DissimilarityCurve dissimilarity_curve(const FeatureMatrix& features);

// Centered moving average over [t - floor((w-1)/2), t + ceil((w-1)/2)]; the
// window shrinks at the ends and is renormalized by the terms it covers. For
// even w the extra sample goes to the right.
DissimilarityCurve smooth(const DissimilarityCurve& curve, int window_frames);
std::vector<double> moving_average(std::span<const double> values, int window_frames);

// Height of values[p] above the higher of its two bases. A base is the
// minimum between p and the nearest strictly higher sample on that side (or
// the end of the curve).
double peak_prominence(std::span<const double> values, int p);

// Interior local maxima (values[p-1] < values[p] >= values[p+1], so a plateau
// reports its leftmost sample) whose prominence is >= threshold.
std::vector<int> find_prominent_peaks(std::span<const double> values, double threshold);

// dissimilarity -> smoothing -> peaks, then a peak at curve index t becomes a
// boundary before frame t+1. Edges 0 and T are always present. Features are
// expected to be normalized already.
BoundarySet segment_utterance(const FeatureMatrix& features, const SegmenterConfig& config);

std::vector<BoundarySet> segment_corpus(std::span<const FeatureMatrix> normalized,
                                        const SegmenterConfig& config, int threads = 1);

}  // namespace wordseg
