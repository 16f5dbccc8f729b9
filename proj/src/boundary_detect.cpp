// src/boundary_detect.cpp

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

#include "wordseg/boundary_detect.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "wordseg/util.hpp"

namespace wordseg {

void SegmenterConfig::validate() const {
  if (window_frames < 1) throw std::invalid_argument("smoothing window must be >= 1 frame");
  if (!(prominence_threshold >= 0.0))
    throw std::invalid_argument("prominence threshold must be non-negative");
  if (min_segment_frames < 1) throw std::invalid_argument("min_segment_frames must be >= 1");
}

NormalizationStats corpus_statistics(std::span<const FeatureMatrix> corpus) {
  if (corpus.empty()) throw std::invalid_argument("cannot normalize an empty corpus");
  const int dim = corpus.front().dim();
  Eigen::VectorXd sum = Eigen::VectorXd::Zero(dim);
  double count = 0.0;
  for (const auto& fm : corpus) {
    if (fm.dim() != dim)
      throw std::invalid_argument("feature dimension mismatch in corpus at '" + fm.utt_id + "'");
    sum += fm.data.cast<double>().colwise().sum().transpose();
    count += fm.num_frames();
  }
  if (count == 0.0) throw std::invalid_argument("corpus has no frames");
  NormalizationStats stats;
  stats.mean = sum / count;
  Eigen::VectorXd sq = Eigen::VectorXd::Zero(dim);
  for (const auto& fm : corpus) {
    const RowMatrix centered = fm.data.cast<double>().rowwise() - stats.mean.transpose();
    sq += centered.array().square().colwise().sum().matrix().transpose();
  }
  const Eigen::VectorXd var = sq / count;
  stats.stddev = var.unaryExpr(
      [](double v) { return v < NormalizationStats::kMinVariance ? 1.0 : std::sqrt(v); });
  return stats;
}

FeatureMatrix apply_normalization(const NormalizationStats& stats, const FeatureMatrix& features) {
  if (features.dim() != stats.mean.size())
    throw std::invalid_argument("feature dimension does not match normalization statistics");
  FeatureMatrix out;
  out.utt_id = features.utt_id;
  out.frame_rate_hz = features.frame_rate_hz;
  const RowMatrix centered = features.data.cast<double>().rowwise() - stats.mean.transpose();
  out.data = (centered.array().rowwise() / stats.stddev.transpose().array()).cast<float>();
  return out;
}

std::vector<FeatureMatrix> normalize_corpus(std::span<const FeatureMatrix> corpus, int threads) {
  const NormalizationStats stats = corpus_statistics(corpus);
  std::vector<FeatureMatrix> out(corpus.size());
  parallel_for(corpus.size(), threads,
               [&](std::size_t i) { out[i] = apply_normalization(stats, corpus[i]); });
  return out;
}

DissimilarityCurve dissimilarity_curve(const FeatureMatrix& features) {
  const int frames = features.num_frames();
  if (frames < 2)
    throw std::invalid_argument("dissimilarity curve needs at least 2 frames ('" +
                                features.utt_id + "')");
  const RowMatrix y = features.data.cast<double>();
  const Eigen::VectorXd norms = y.rowwise().norm();
  for (int t = 0; t < frames; ++t)
    if (!(norms[t] > 0.0))
      throw std::invalid_argument("zero-norm frame " + std::to_string(t) + " in '" +
                                  features.utt_id + "'");
  DissimilarityCurve curve;
  curve.utt_id = features.utt_id;
  curve.values.resize(frames - 1);
  for (int t = 0; t + 1 < frames; ++t) {
    const double cosine = y.row(t + 1).dot(y.row(t)) / (norms[t + 1] * norms[t]);
    curve.values[t] = std::clamp(1.0 - cosine, 0.0, 2.0);
  }
  return curve;
}

std::vector<double> moving_average(std::span<const double> values, int window_frames) {
  if (window_frames < 1) throw std::invalid_argument("smoothing window must be >= 1");
  const int n = static_cast<int>(values.size());
  const int left = (window_frames - 1) / 2;
  const int right = window_frames / 2;  // ceil((w-1)/2)
  std::vector<double> out(n);
  for (int t = 0; t < n; ++t) {
    const int lo = std::max(0, t - left);
    const int hi = std::min(n - 1, t + right);
    double sum = 0.0;
    for (int i = lo; i <= hi; ++i) sum += values[i];
    out[t] = sum / (hi - lo + 1);
  }
  return out;
}

DissimilarityCurve smooth(const DissimilarityCurve& curve, int window_frames) {
  return DissimilarityCurve{curve.utt_id, moving_average(curve.values, window_frames)};
}

double peak_prominence(std::span<const double> values, int p) {
  const int n = static_cast<int>(values.size());
  const double height = values[p];
  double left_base = height;
  for (int i = p - 1; i >= 0 && values[i] <= height; --i) left_base = std::min(left_base, values[i]);
  double right_base = height;
  for (int i = p + 1; i < n && values[i] <= height; ++i) right_base = std::min(right_base, values[i]);
  return height - std::max(left_base, right_base);
}

std::vector<int> find_prominent_peaks(std::span<const double> values, double threshold) {
  std::vector<int> peaks;
  const int n = static_cast<int>(values.size());
  for (int p = 1; p + 1 < n; ++p) {
    if (!(values[p - 1] < values[p] && values[p] >= values[p + 1])) continue;
    if (peak_prominence(values, p) >= threshold) peaks.push_back(p);
  }
  return peaks;
}

BoundarySet segment_utterance(const FeatureMatrix& features, const SegmenterConfig& config) {
  config.validate();
  const int total = features.num_frames();
  BoundarySet out;
  out.utt_id = features.utt_id;
  out.total_frames = total;
  out.frames.push_back(0);
  if (total >= 2) {
    const DissimilarityCurve curve = smooth(dissimilarity_curve(features), config.window_frames);
    for (int peak : find_prominent_peaks(curve.values, config.prominence_threshold)) {
      const int frame = peak + 1;
      if (frame - out.frames.back() < config.min_segment_frames) continue;
      if (total - frame < config.min_segment_frames) continue;
      out.frames.push_back(frame);
    }
  }
  out.frames.push_back(total);
  return out;
}

std::vector<BoundarySet> segment_corpus(std::span<const FeatureMatrix> normalized,
                                        const SegmenterConfig& config, int threads) {
  config.validate();
  std::vector<BoundarySet> out(normalized.size());
  parallel_for(normalized.size(), threads,
               [&](std::size_t i) { out[i] = segment_utterance(normalized[i], config); });
  return out;
}

}  // namespace wordseg
