// include/wordseg/segment_embed.hpp

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
#include <filesystem>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "wordseg/types.hpp"

namespace wordseg {

/// Linear projection x = components^T (y - mean) onto the top-M principal
/// directions. Parameters are held in single precision, the same as their
/// on-disk form, so a saved model reloads bit-identically.
struct PCAModel {
  Eigen::VectorXf mean;        // D
  Eigen::MatrixXf components;  // D x M, orthonormal columns
  Eigen::VectorXd explained_variance;  // M eigenvalues of the sample covariance, descending
  std::int64_t frames_sampled = 0;
  std::uint64_t seed = 0;

  int input_dim() const { return static_cast<int>(mean.size()); }
  int output_dim() const { return static_cast<int>(components.cols()); }
};

struct PCAOptions {
  int target_dim = 250;
  std::int64_t sample_cap = 500000;  // frames; larger corpora are subsampled
  std::uint64_t seed = 0;
};

// Fits on the rows of `frames` (N x D). Requires N > M and a sample covariance
// of rank >= M. Each component's largest-magnitude entry is made positive.
PCAModel fit_pca(const RowMatrix& frames, int target_dim);

// Draws min(sample_cap, total) frames uniformly without replacement (seeded)
// from the corpus and fits on them.
PCAModel fit_pca_corpus(std::span<const FeatureMatrix> corpus, const PCAOptions& options);

FeatureMatrix apply_pca(const PCAModel& model, const FeatureMatrix& features);
std::vector<FeatureMatrix> apply_pca(const PCAModel& model, std::span<const FeatureMatrix> corpus,
                                     int threads = 1);

// Writes <prefix>_mean.ftpk (1 x D), <prefix>_components.ftpk (D x M) and
// <prefix>.json {"M", "frames_sampled", "seed"}.
void save_pca(const PCAModel& model, const std::filesystem::path& prefix);
PCAModel load_pca(const std::filesystem::path& prefix);

struct SegmentEmbedding {
  SegmentRef ref;
  Eigen::VectorXd z;  // unit L2 norm
};

// Mean of rows [start, end) of the projected features, scaled to unit norm.
// Throws DegenerateSegment if the mean is (numerically) zero and
// std::out_of_range if the ref is outside the utterance.
SegmentEmbedding embed_segment(const FeatureMatrix& projected, const SegmentRef& ref);
Eigen::VectorXd pooled_embedding(const FeatureMatrix& projected, int start_frame, int end_frame);

/// Embeddings of every segment of a corpus, row i of `vectors` belonging to
/// refs[i]. Degenerate segments are listed in `dropped` instead.
struct EmbeddingSet {
  std::vector<SegmentRef> refs;
  RowMatrix vectors;
  std::vector<SegmentRef> dropped;

  std::size_t size() const { return refs.size(); }
};

// One embedding per consecutive boundary pair, ordered by utterance (corpus
// order) then start frame. `projected` and `boundaries` must be parallel.
EmbeddingSet embed_all(std::span<const FeatureMatrix> projected,
                       std::span<const BoundarySet> boundaries, int threads = 1);
// Projects unprojected features with `model` first.
EmbeddingSet embed_all(std::span<const FeatureMatrix> features,
                       std::span<const BoundarySet> boundaries, const PCAModel& model,
                       int threads = 1);

}  // namespace wordseg
