// include/wordseg/kmeans.hpp

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
#include <functional>
#include <span>
#include <string_view>
#include <vector>

#include "wordseg/corpus_io.hpp"
#include "wordseg/types.hpp"

namespace wordseg {

struct Codebook {
  RowMatrix centroids;  // K x M

  int size() const { return static_cast<int>(centroids.rows()); }
  int dim() const { return static_cast<int>(centroids.cols()); }
};

struct Assignment {
  int cluster = 0;
  double distance = 0.0;  // squared Euclidean distance to the centroid
};

using AssignmentTable = std::vector<Assignment>;

struct KMeansOptions {
  int num_clusters = 1;
  std::uint64_t seed = 0;
  int max_iters = 25;
  int threads = 1;
  // Called after every half-step with "assign" or "update" and the
  // (weighted) objective under the current codebook and assignment.
  std::function<void(std::string_view, double)> observer;
};

struct KMeansResult {
  Codebook codebook;
  AssignmentTable assignments;  // argmin assignment under the final codebook
  int iters_run = 0;
  bool converged = false;
  double objective = 0.0;
};

// k-means++ seeding followed by Lloyd iterations until the assignment stops
// changing or max_iters update steps have run. When K exceeds the number of
// distinct points, the surplus centroids duplicate randomly chosen points.
KMeansResult kmeans_fit(const RowMatrix& points, const KMeansOptions& options);

// Lloyd iterations warm-started from `initial`. With weights, centroids are
// weighted means and the objective is sum_i w_i ||z_i - mu_a(i)||^2.
KMeansResult kmeans_refine(const RowMatrix& points, const Codebook& initial,
                           const KMeansOptions& options, std::span<const double> weights = {});

// Nearest centroid per point; ties go to the lowest cluster index.
AssignmentTable assign(const RowMatrix& points, const Codebook& codebook, int threads = 1);

// Index and squared distance of the nearest centroid to one vector.
Assignment nearest_centroid(const Eigen::Ref<const Eigen::RowVectorXd>& z, const Codebook& codebook);

double objective(const RowMatrix& points, const Codebook& codebook,
                 const AssignmentTable& assignments, std::span<const double> weights = {});

// Groups segments by cluster id (ascending, empty clusters omitted); segment
// order within a class follows `refs`. Times come from the manifest frame
// rates.
ClassFile build_lexicon(const Manifest& manifest, std::span<const SegmentRef> refs,
                        const AssignmentTable& assignments);

struct CodebookInfo {
  std::uint64_t seed = 0;
  int iters_run = 0;
  double objective = 0.0;
};

// <path> in the feature format (K x M) plus <path>.json {"K", "seed",
// "iters_run", "objective"}.
void save_codebook(const Codebook& codebook, const CodebookInfo& info,
                   const std::filesystem::path& path);
Codebook load_codebook(const std::filesystem::path& path);

}  // namespace wordseg
