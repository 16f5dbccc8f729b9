// include/wordseg/eskmeans.hpp

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
#include <span>
#include <string>
#include <vector>

#include "wordseg/corpus_io.hpp"
#include "wordseg/kmeans.hpp"
#include "wordseg/segment_embed.hpp"
#include "wordseg/timing.hpp"
#include "wordseg/types.hpp"

namespace wordseg {

struct ESKMeansConfig {
  int num_clusters = 1;
  int max_outer_iters = 10;
  // Longest segment, counted in candidate intervals.
  int max_span = 6;
  std::uint64_t seed = 0;
  bool duration_weighting = true;
  int kmeans_iters = 25;
  // Utterances per DP batch (manifest order); 0 puts the corpus in one batch.
  int batch_size = 0;
  int threads = 1;

  void validate() const;
};

// w * min_k ||z - mu_k||^2 with w the duration in frames (or 1 when
// weighting is off).
double segment_cost(const Eigen::Ref<const Eigen::RowVectorXd>& z, int duration_frames,
                    const Codebook& codebook, bool duration_weighting);

struct DPResult {
  BoundarySet chosen;
  double cost = 0.0;
  // No finite path existed; `chosen` is the full candidate set.
  bool fallback = false;
};

// Best subset of the candidate boundaries against a fixed codebook. Segments
// may span at most config.max_span candidate intervals; degenerate segments
// cost +inf. Among equal-cost paths the one whose final segment starts
// earliest wins, recursively, which yields the fewest boundaries when all
// costs tie.
DPResult dp_segment(const FeatureMatrix& projected, const BoundarySet& candidates,
                    const Codebook& codebook, const ESKMeansConfig& config);

struct ESKMeansResult {
  std::vector<BoundarySet> chosen;  // corpus order
  Codebook codebook;
  EmbeddingSet embeddings;          // of the chosen segments
  AssignmentTable assignments;
  ClassFile lexicon;
  // J after the initial clustering, then after every outer iteration.
  std::vector<double> objective_per_iter;
  int outer_iters = 0;
  bool converged = false;
  std::vector<std::string> fallback_utts;
};

// Joint objective: sum over all segments of segment_cost under `codebook`.
double joint_objective(const EmbeddingSet& embeddings, const Codebook& codebook,
                       bool duration_weighting);

// Alternates DP re-segmentation of every utterance against a fixed codebook
// with duration-weighted Lloyd refits of that codebook, starting from all
// candidates and a plain k-means fit. Stops once an outer iteration changes
// no utterance, or after max_outer_iters.
ESKMeansResult eskmeans_fit(const Manifest& manifest, std::span<const FeatureMatrix> projected,
                            std::span<const BoundarySet> candidates, const ESKMeansConfig& config,
                            StageTimer* timer = nullptr);

}  // namespace wordseg
