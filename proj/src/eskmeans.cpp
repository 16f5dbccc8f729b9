// src/eskmeans.cpp

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

#include "wordseg/eskmeans.hpp"

#include <algorithm>
#include <limits>
#include <stdexcept>

#include <spdlog/spdlog.h>

#include "wordseg/util.hpp"

namespace wordseg {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::vector<double> durations_of(const EmbeddingSet& embeddings) {
  std::vector<double> w(embeddings.size());
  for (std::size_t i = 0; i < w.size(); ++i) w[i] = embeddings.refs[i].duration();
  return w;
}

}  // namespace

void ESKMeansConfig::validate() const {
  if (num_clusters < 1) throw std::invalid_argument("ES-KMeans+: K must be >= 1");
  if (max_outer_iters < 0) throw std::invalid_argument("ES-KMeans+: max_outer_iters must be >= 0");
  if (max_span < 1) throw std::invalid_argument("ES-KMeans+: max_span must be >= 1");
  if (kmeans_iters < 0) throw std::invalid_argument("ES-KMeans+: kmeans_iters must be >= 0");
  if (batch_size < 0) throw std::invalid_argument("ES-KMeans+: batch_size must be >= 0");
}

double segment_cost(const Eigen::Ref<const Eigen::RowVectorXd>& z, int duration_frames,
                    const Codebook& codebook, bool duration_weighting) {
  const double w = duration_weighting ? static_cast<double>(duration_frames) : 1.0;
  return w * nearest_centroid(z, codebook).distance;
}

DPResult dp_segment(const FeatureMatrix& projected, const BoundarySet& candidates,
                    const Codebook& codebook, const ESKMeansConfig& config) {
  candidates.validate();
  if (candidates.total_frames != projected.num_frames())
    throw std::invalid_argument("candidates of '" + candidates.utt_id +
                                "' do not match the feature length");
  const std::vector<int>& b = candidates.frames;
  const int m = static_cast<int>(b.size()) - 1;

  const auto cost_of = [&](int i, int j) {
    try {
      const Eigen::VectorXd z = pooled_embedding(projected, b[i], b[j]);
      return segment_cost(z.transpose(), b[j] - b[i], codebook, config.duration_weighting);
    } catch (const DegenerateSegment&) {
      return kInf;
    }
  };

  std::vector<double> alpha(m + 1, kInf);
  std::vector<int> back(m + 1, -1);
  alpha[0] = 0.0;
  for (int j = 1; j <= m; ++j) {
    for (int i = std::max(0, j - config.max_span); i < j; ++i) {
      if (alpha[i] == kInf) continue;
      const double c = alpha[i] + cost_of(i, j);
      if (c < alpha[j]) {
        alpha[j] = c;
        back[j] = i;
      }
    }
  }

  DPResult out;
  out.chosen.utt_id = candidates.utt_id;
  out.chosen.total_frames = candidates.total_frames;
  if (alpha[m] == kInf) {
    out.fallback = true;
    out.chosen = candidates;
    out.cost = 0.0;
    for (int i = 0; i < m; ++i) {
      const double c = cost_of(i, i + 1);
      if (c != kInf) out.cost += c;
    }
    return out;
  }
  out.cost = alpha[m];
  for (int j = m; j > 0; j = back[j]) out.chosen.frames.push_back(b[j]);
  out.chosen.frames.push_back(0);
  std::reverse(out.chosen.frames.begin(), out.chosen.frames.end());
  return out;
}

double joint_objective(const EmbeddingSet& embeddings, const Codebook& codebook,
                       bool duration_weighting) {
  double total = 0.0;
  for (std::size_t i = 0; i < embeddings.size(); ++i)
    total += segment_cost(embeddings.vectors.row(static_cast<Eigen::Index>(i)),
                          embeddings.refs[i].duration(), codebook, duration_weighting);
  return total;
}

ESKMeansResult eskmeans_fit(const Manifest& manifest, std::span<const FeatureMatrix> projected,
                            std::span<const BoundarySet> candidates, const ESKMeansConfig& config,
                            StageTimer* timer) {
  config.validate();
  if (projected.empty()) throw std::invalid_argument("ES-KMeans+: empty corpus");
  if (projected.size() != candidates.size())
    throw std::invalid_argument("ES-KMeans+: features and candidate sets differ in length");
  for (std::size_t u = 0; u < projected.size(); ++u) {
    candidates[u].validate();
    if (candidates[u].utt_id != projected[u].utt_id ||
        candidates[u].total_frames != projected[u].num_frames())
      throw std::invalid_argument("ES-KMeans+: candidates '" + candidates[u].utt_id +
                                  "' do not match features '" + projected[u].utt_id + "'");
  }

  ESKMeansResult result;
  result.chosen.assign(candidates.begin(), candidates.end());
  {
    auto scope = time_stage(timer, "embedding");
    result.embeddings = embed_all(projected, result.chosen, config.threads);
  }
  KMeansOptions km{config.num_clusters, config.seed, config.kmeans_iters, config.threads, {}};
  {
    auto scope = time_stage(timer, "kmeans");
    result.codebook = kmeans_fit(result.embeddings.vectors, km).codebook;
  }
  result.objective_per_iter.push_back(
      joint_objective(result.embeddings, result.codebook, config.duration_weighting));

  const std::size_t n_utts = projected.size();
  const std::size_t batch = config.batch_size == 0 ? n_utts : static_cast<std::size_t>(config.batch_size);
  std::vector<DPResult> dp(n_utts);
  std::vector<bool> flagged(n_utts, false);

  for (int outer = 1; outer <= config.max_outer_iters; ++outer) {
    bool changed = false;
    for (std::size_t lo = 0; lo < n_utts; lo += batch) {
      const std::size_t hi = std::min(n_utts, lo + batch);
      {
        auto scope = time_stage(timer, "dp");
        parallel_for(hi - lo, config.threads, [&](std::size_t k) {
          dp[lo + k] = dp_segment(projected[lo + k], candidates[lo + k], result.codebook, config);
        });
      }
      bool batch_changed = false;
      for (std::size_t u = lo; u < hi; ++u) {
        if (dp[u].fallback && !flagged[u]) {
          flagged[u] = true;
          spdlog::warn("ES-KMeans+: no finite segmentation for '{}', keeping all candidates",
                       candidates[u].utt_id);
        }
        if (dp[u].chosen.frames != result.chosen[u].frames) {
          batch_changed = true;
          result.chosen[u] = std::move(dp[u].chosen);
        }
      }
      if (!batch_changed) continue;
      changed = true;
      {
        auto scope = time_stage(timer, "embedding");
        result.embeddings = embed_all(projected, result.chosen, config.threads);
      }
      {
        auto scope = time_stage(timer, "kmeans");
        const std::vector<double> weights =
            config.duration_weighting ? durations_of(result.embeddings) : std::vector<double>{};
        result.codebook =
            kmeans_refine(result.embeddings.vectors, result.codebook, km, weights).codebook;
      }
    }
    result.outer_iters = outer;
    result.objective_per_iter.push_back(
        joint_objective(result.embeddings, result.codebook, config.duration_weighting));
    spdlog::debug("ES-KMeans+ iteration {}: J = {:.6f}", outer, result.objective_per_iter.back());
    if (!changed) {
      result.converged = true;
      spdlog::info("ES-KMeans+ converged after {} outer iteration(s)", outer);
      break;
    }
  }

  for (std::size_t u = 0; u < n_utts; ++u)
    if (flagged[u]) result.fallback_utts.push_back(candidates[u].utt_id);
  {
    auto scope = time_stage(timer, "kmeans");
    result.assignments = assign(result.embeddings.vectors, result.codebook, config.threads);
  }
  result.lexicon = build_lexicon(manifest, result.embeddings.refs, result.assignments);
  return result;
}

}  // namespace wordseg
