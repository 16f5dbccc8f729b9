// include/wordseg/pipeline.hpp

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
#include <string>
#include <vector>

#include <json.hpp>

#include "wordseg/boundary_detect.hpp"
#include "wordseg/corpus_io.hpp"
#include "wordseg/eskmeans.hpp"
#include "wordseg/eval_metrics.hpp"
#include "wordseg/kmeans.hpp"
#include "wordseg/segment_embed.hpp"
#include "wordseg/timing.hpp"

namespace wordseg {

// Fixed file names inside a run directory.
namespace run_files {
inline constexpr const char* kBoundaries = "boundaries.tsv";
inline constexpr const char* kCandidates = "candidates.tsv";
inline constexpr const char* kClasses = "classes.txt";
inline constexpr const char* kReport = "report.json";
inline constexpr const char* kTimings = "timings.json";
inline constexpr const char* kConfig = "config.resolved.json";
inline constexpr const char* kPcaPrefix = "pca";
inline constexpr const char* kCodebook = "codebook.ftpk";
}  // namespace run_files

// K-means cluster counts used for the five ZeroSpeech Track-2 languages.
int preset_clusters(const std::string& language);

struct RunConfig {
  struct Paths {
    std::string manifest;          // features for boundary detection
    std::string cluster_manifest;  // features for clustering; defaults to manifest
    std::string boundaries;        // external boundaries for `cluster`
    std::string candidates;        // external candidates for `eskmeans`
    std::string word_alignments;
    std::string phone_alignments;
    std::string output_dir = "run";
  } paths;

  struct Segmenter {
    std::string mode = "prominence";  // prominence | candidates
    SegmenterConfig prominence = SegmenterConfig::prominence();
    SegmenterConfig candidates = SegmenterConfig::candidates();

    const SegmenterConfig& active() const { return mode == "candidates" ? candidates : prominence; }
  } segmenter;

  PCAOptions pca;

  struct KMeans {
    int K = 0;
    std::string language;
    std::uint64_t seed = 0;
    int max_iters = 25;
  } kmeans;

  struct ESKMeans {
    int max_outer_iters = 10;
    int max_span = 6;
    bool duration_weighting = true;
    int batch_size = 0;
  } eskmeans;

  struct Eval {
    double tol_s = 0.02;
    std::string ned_pooling = "pairs";  // pairs | clusters
    double overlap_min_s = 0.03;
    double overlap_min_fraction = 0.5;
    std::string matching = "optimal";  // optimal | greedy_nearest
    bool macro_boundary = false;
  } eval;

  std::string pipeline_mode = "prominence";  // prominence | eskmeans | both
  int threads = 0;

  ESKMeansConfig eskmeans_config() const;
  EvalOptions eval_options() const;
  int thread_count() const;
};

// Every key with its default value.
nlohmann::json default_config_json();
// Merges `overrides` over the defaults; unknown keys and invalid values throw.
RunConfig resolve_config(const nlohmann::json& overrides);
nlohmann::json config_to_json(const RunConfig& config);
// "section.key=value"; the value is parsed as JSON, falling back to a string.
void apply_override(nlohmann::json& config, const std::string& assignment);

// ---------------------------------------------------------------------------
// In-memory stages (shared by the commands and the benchmarks).

// Corpus-level normalization followed by per-utterance boundary detection.
std::vector<BoundarySet> detect_boundaries(std::span<const FeatureMatrix> features,
                                           const SegmenterConfig& config, int threads,
                                           StageTimer* timer = nullptr);

struct ClusterOutputs {
  PCAModel pca;
  EmbeddingSet embeddings;
  KMeansResult kmeans;
  ClassFile lexicon;
};

// PCA fit/apply, pooled embeddings, k-means and the lexicon for fixed
// boundaries. `features` and `boundaries` must be parallel.
ClusterOutputs cluster_segments(const Manifest& manifest, std::span<const FeatureMatrix> features,
                                std::span<const BoundarySet> boundaries, const RunConfig& config,
                                StageTimer* timer = nullptr);

struct ESKMeansOutputs {
  PCAModel pca;
  ESKMeansResult result;
};

ESKMeansOutputs run_eskmeans(const Manifest& manifest, std::span<const FeatureMatrix> features,
                             std::span<const BoundarySet> candidates, const RunConfig& config,
                             StageTimer* timer = nullptr);

// ---------------------------------------------------------------------------
// Commands. Each writes into config.paths.output_dir and returns the JSON
// section it added to report.json.

nlohmann::json cmd_segment(const RunConfig& config);
nlohmann::json cmd_cluster(const RunConfig& config);
nlohmann::json cmd_eskmeans(const RunConfig& config);
nlohmann::json cmd_evaluate(const RunConfig& config);
nlohmann::json cmd_pipeline(const RunConfig& config);

}  // namespace wordseg
