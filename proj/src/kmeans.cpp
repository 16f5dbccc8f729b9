// src/kmeans.cpp

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

#include "wordseg/kmeans.hpp"

#include <cmath>
#include <limits>
#include <map>
#include <stdexcept>
#include <unordered_map>

#include <json.hpp>

#include "wordseg/util.hpp"

namespace wordseg {

namespace {

void check_points(const RowMatrix& points) {
  if (points.rows() == 0) throw std::invalid_argument("k-means needs at least one point");
  if (!points.allFinite()) throw std::invalid_argument("k-means input contains non-finite values");
}

double weight_of(std::span<const double> weights, Eigen::Index i) {
  return weights.empty() ? 1.0 : weights[static_cast<std::size_t>(i)];
}

Codebook kmeans_plus_plus(const RowMatrix& points, int k, Rng& rng, int threads) {
  const Eigen::Index n = points.rows();
  Codebook cb;
  cb.centroids.resize(k, points.cols());
  std::vector<double> nearest(static_cast<std::size_t>(n), std::numeric_limits<double>::infinity());

  Eigen::Index pick = static_cast<Eigen::Index>(uniform_index(rng, static_cast<std::uint64_t>(n)));
  for (int c = 0; c < k; ++c) {
    cb.centroids.row(c) = points.row(pick);
    parallel_for(static_cast<std::size_t>(n), threads, [&](std::size_t i) {
      const double d = (points.row(static_cast<Eigen::Index>(i)) - cb.centroids.row(c)).squaredNorm();
      if (d < nearest[i]) nearest[i] = d;
    });
    if (c + 1 == k) break;

    double total = 0.0;
    for (double d : nearest) total += d;
    if (total > 0.0) {
      const double target = uniform01(rng) * total;
      double acc = 0.0;
      pick = -1;
      for (Eigen::Index i = 0; i < n; ++i) {
        if (nearest[static_cast<std::size_t>(i)] <= 0.0) continue;
        acc += nearest[static_cast<std::size_t>(i)];
        pick = i;
        if (acc > target) break;
      }
    } else {
      // Every point already coincides with a centroid.
      pick = static_cast<Eigen::Index>(uniform_index(rng, static_cast<std::uint64_t>(n)));
    }
  }
  return cb;
}

// Weighted means; empty clusters are re-seeded with the point currently
// farthest (weighted) from its centroid, which is then moved to that cluster.
void update_centroids(const RowMatrix& points, std::span<const double> weights,
                      AssignmentTable& assignments, Codebook& codebook) {
  const int k = codebook.size();
  RowMatrix sums = RowMatrix::Zero(k, points.cols());
  std::vector<double> mass(static_cast<std::size_t>(k), 0.0);
  for (Eigen::Index i = 0; i < points.rows(); ++i) {
    const auto& a = assignments[static_cast<std::size_t>(i)];
    const double w = weight_of(weights, i);
    sums.row(a.cluster) += w * points.row(i);
    mass[static_cast<std::size_t>(a.cluster)] += w;
  }
  std::vector<int> empty;
  for (int c = 0; c < k; ++c) {
    if (mass[static_cast<std::size_t>(c)] > 0.0)
      codebook.centroids.row(c) = sums.row(c) / mass[static_cast<std::size_t>(c)];
    else
      empty.push_back(c);
  }
  for (Eigen::Index i = 0; i < points.rows(); ++i) {
    auto& a = assignments[static_cast<std::size_t>(i)];
    a.distance = (points.row(i) - codebook.centroids.row(a.cluster)).squaredNorm();
  }
  if (empty.empty()) return;

  std::vector<double> cost(static_cast<std::size_t>(points.rows()));
  for (Eigen::Index i = 0; i < points.rows(); ++i)
    cost[static_cast<std::size_t>(i)] = weight_of(weights, i) * assignments[static_cast<std::size_t>(i)].distance;
  for (int c : empty) {
    std::size_t far = 0;
    for (std::size_t i = 1; i < cost.size(); ++i)
      if (cost[i] > cost[far]) far = i;
    if (!(cost[far] > 0.0)) break;
    codebook.centroids.row(c) = points.row(static_cast<Eigen::Index>(far));
    assignments[far] = Assignment{c, 0.0};
    cost[far] = 0.0;
  }
}

bool same_clusters(const AssignmentTable& a, const AssignmentTable& b) {
  for (std::size_t i = 0; i < a.size(); ++i)
    if (a[i].cluster != b[i].cluster) return false;
  return true;
}

KMeansResult lloyd(const RowMatrix& points, Codebook codebook, const KMeansOptions& options,
                   std::span<const double> weights) {
  if (options.max_iters < 0) throw std::invalid_argument("max_iters must be >= 0");
  const auto notify = [&](std::string_view phase, const Codebook& cb, const AssignmentTable& a) {
    if (options.observer) options.observer(phase, objective(points, cb, a, weights));
  };

  KMeansResult result;
  AssignmentTable current = assign(points, codebook, options.threads);
  notify("assign", codebook, current);
  for (int it = 1; it <= options.max_iters; ++it) {
    AssignmentTable updated = current;
    update_centroids(points, weights, updated, codebook);
    notify("update", codebook, updated);
    AssignmentTable next = assign(points, codebook, options.threads);
    notify("assign", codebook, next);
    result.iters_run = it;
    const bool fixpoint = same_clusters(current, next);
    current = std::move(next);
    if (fixpoint) {
      result.converged = true;
      break;
    }
  }
  result.objective = objective(points, codebook, current, weights);
  result.codebook = std::move(codebook);
  result.assignments = std::move(current);
  return result;
}

}  // namespace

Assignment nearest_centroid(const Eigen::Ref<const Eigen::RowVectorXd>& z, const Codebook& codebook) {
  Assignment best{0, std::numeric_limits<double>::infinity()};
  for (int c = 0; c < codebook.size(); ++c) {
    const double d = (codebook.centroids.row(c) - z).squaredNorm();
    if (d < best.distance) best = Assignment{c, d};
  }
  return best;
}

AssignmentTable assign(const RowMatrix& points, const Codebook& codebook, int threads) {
  if (codebook.size() < 1) throw std::invalid_argument("empty codebook");
  if (points.rows() > 0 && points.cols() != codebook.dim())
    throw std::invalid_argument("point and centroid dimensions differ");
  AssignmentTable out(static_cast<std::size_t>(points.rows()));
  parallel_for(out.size(), threads, [&](std::size_t i) {
    out[i] = nearest_centroid(points.row(static_cast<Eigen::Index>(i)), codebook);
  });
  return out;
}

double objective(const RowMatrix& points, const Codebook& codebook,
                 const AssignmentTable& assignments, std::span<const double> weights) {
  if (assignments.size() != static_cast<std::size_t>(points.rows()))
    throw std::invalid_argument("assignment table size does not match point count");
  double total = 0.0;
  for (Eigen::Index i = 0; i < points.rows(); ++i) {
    const int c = assignments[static_cast<std::size_t>(i)].cluster;
    total += weight_of(weights, i) * (points.row(i) - codebook.centroids.row(c)).squaredNorm();
  }
  return total;
}

KMeansResult kmeans_fit(const RowMatrix& points, const KMeansOptions& options) {
  check_points(points);
  if (options.num_clusters < 1) throw std::invalid_argument("K must be >= 1");
  Rng rng(options.seed);
  Codebook init = kmeans_plus_plus(points, options.num_clusters, rng, options.threads);
  return lloyd(points, std::move(init), options, {});
}

KMeansResult kmeans_refine(const RowMatrix& points, const Codebook& initial,
                           const KMeansOptions& options, std::span<const double> weights) {
  check_points(points);
  if (initial.size() < 1 || initial.dim() != points.cols())
    throw std::invalid_argument("initial codebook does not match the points");
  if (!weights.empty()) {
    if (weights.size() != static_cast<std::size_t>(points.rows()))
      throw std::invalid_argument("weight count does not match point count");
    for (double w : weights)
      if (!(w > 0.0) || !std::isfinite(w)) throw std::invalid_argument("weights must be positive");
  }
  return lloyd(points, initial, options, weights);
}

ClassFile build_lexicon(const Manifest& manifest, std::span<const SegmentRef> refs,
                        const AssignmentTable& assignments) {
  if (refs.size() != assignments.size())
    throw std::invalid_argument("build_lexicon: refs and assignments differ in length");
  std::unordered_map<std::string, double> rate;
  for (const auto& e : manifest.entries) rate.emplace(e.utt_id, e.frame_rate_hz);
  std::map<int, std::vector<ClassSegment>> grouped;
  for (std::size_t i = 0; i < refs.size(); ++i) {
    const auto it = rate.find(refs[i].utt_id);
    if (it == rate.end())
      throw std::invalid_argument("segment utterance '" + refs[i].utt_id + "' not in manifest");
    grouped[assignments[i].cluster].push_back(
        ClassSegment{refs[i].utt_id, frames_to_seconds(refs[i].start_frame, it->second),
                     frames_to_seconds(refs[i].end_frame, it->second)});
  }
  ClassFile out;
  for (auto& [id, segs] : grouped) out.classes.push_back(LexiconClass{id, std::move(segs)});
  return out;
}

void save_codebook(const Codebook& codebook, const CodebookInfo& info,
                   const std::filesystem::path& path) {
  FeatureMatrix fm;
  fm.frame_rate_hz = 1.0f;
  fm.data = codebook.centroids.cast<float>();
  save_features(fm, path);
  nlohmann::json j{{"K", codebook.size()},
                   {"seed", info.seed},
                   {"iters_run", info.iters_run},
                   {"objective", info.objective}};
  write_text_file(path.string() + ".json", j.dump(2) + "\n");
}

Codebook load_codebook(const std::filesystem::path& path) {
  Codebook cb;
  cb.centroids = load_features(path).data.cast<double>();
  return cb;
}

}  // namespace wordseg
