// tests/test_eskmeans.cpp

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

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <thread>

#include "oracles.hpp"
#include "synthetic.hpp"
#include "wordseg/eskmeans.hpp"
#include "wordseg/pipeline.hpp"
#include "wordseg/timing.hpp"

using namespace wordseg;

namespace {

FeatureMatrix rows(const std::string& id, const std::vector<std::vector<float>>& r) {
  FeatureMatrix m;
  m.utt_id = id;
  m.data.resize(static_cast<Eigen::Index>(r.size()), static_cast<Eigen::Index>(r[0].size()));
  for (std::size_t i = 0; i < r.size(); ++i)
    for (std::size_t j = 0; j < r[i].size(); ++j)
      m.data(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = r[i][j];
  return m;
}

bool is_subset(const std::vector<int>& inner, const std::vector<int>& outer) {
  return std::includes(outer.begin(), outer.end(), inner.begin(), inner.end());
}

}  // namespace

TEST_CASE("segment_cost examples") {
  Codebook cb{RowMatrix(2, 2)};
  cb.centroids << 1, 0,
                  0, 1;
  const Eigen::RowVector2d on(1, 0);
  CHECK(segment_cost(on, 1, cb, true) == 0.0);
  CHECK(segment_cost(on, 17, cb, true) == 0.0);
  const Eigen::RowVector2d off(0.6, 0.8);
  const double d = (off - Eigen::RowVector2d(0, 1)).squaredNorm();
  CHECK(segment_cost(off, 3, cb, true) == doctest::Approx(3 * d));
  CHECK(segment_cost(off, 6, cb, true) == doctest::Approx(2 * segment_cost(off, 3, cb, true)));
  CHECK(segment_cost(off, 3, cb, false) == doctest::Approx(d));
  CHECK(segment_cost(off, 30, cb, false) == doctest::Approx(d));
}

TEST_CASE("dp_segment: only the edges") {
  const FeatureMatrix x = rows("u", {{1, 0}, {0.8f, 0.6f}, {0, 1}});
  Codebook cb{RowMatrix(1, 2)};
  cb.centroids << 0, 1;
  ESKMeansConfig cfg;
  const DPResult r = dp_segment(x, {"u", {0, 3}, 3}, cb, cfg);
  CHECK(r.chosen.frames == std::vector<int>{0, 3});
  CHECK_FALSE(r.fallback);
  CHECK(r.cost == doctest::Approx(3 * oracle::segment_cost(x, 0, 3, cb.centroids, false)));
}

TEST_CASE("dp_segment: merged segment on a centroid beats the split") {
  // Halves point along (1,0) and (0,1); their average lies on the centroid.
  const FeatureMatrix x = rows("u", {{1, 0}, {1, 0}, {0, 1}, {0, 1}});
  Codebook cb{RowMatrix(1, 2)};
  cb.centroids << 1 / std::sqrt(2.0), 1 / std::sqrt(2.0);
  ESKMeansConfig cfg;
  const BoundarySet cand{"u", {0, 2, 4}, 4};
  const DPResult r = dp_segment(x, cand, cb, cfg);
  const double merged = 4 * oracle::segment_cost(x, 0, 4, cb.centroids, false);
  const double split = 2 * oracle::segment_cost(x, 0, 2, cb.centroids, false) +
                       2 * oracle::segment_cost(x, 2, 4, cb.centroids, false);
  REQUIRE(merged < split);
  CHECK(r.chosen.frames == std::vector<int>{0, 4});
  CHECK(r.cost == doctest::Approx(merged));

  // With the halves as centroids the split wins instead.
  Codebook halves{RowMatrix(2, 2)};
  halves.centroids << 1, 0,
                      0, 1;
  CHECK(dp_segment(x, cand, halves, cfg).chosen.frames == std::vector<int>{0, 2, 4});
}

TEST_CASE("dp_segment equals exhaustive subset search") {
  Rng rng(1234);
  for (int trial = 0; trial < 300; ++trial) {
    const auto inst = testing::random_dp_instance(rng);
    ESKMeansConfig cfg;
    cfg.max_span = inst.max_span;
    cfg.duration_weighting = inst.weighting;
    const DPResult r = dp_segment(inst.features, inst.candidates, Codebook{inst.centroids}, cfg);
    const double best = oracle::best_segmentation_cost(inst.features, inst.candidates.frames,
                                                       inst.centroids, inst.max_span, inst.weighting);
    REQUIRE_FALSE(r.fallback);
    CHECK(std::abs(r.cost - best) < 1e-9);
    CHECK(is_subset(r.chosen.frames, inst.candidates.frames));
    CHECK(r.chosen.frames.front() == 0);
    CHECK(r.chosen.frames.back() == inst.candidates.total_frames);
    for (std::size_t i = 1; i < r.chosen.frames.size(); ++i) {
      const auto a = std::find(inst.candidates.frames.begin(), inst.candidates.frames.end(), r.chosen.frames[i - 1]);
      const auto b = std::find(inst.candidates.frames.begin(), inst.candidates.frames.end(), r.chosen.frames[i]);
      CHECK(b - a <= inst.max_span);
    }
  }
}

TEST_CASE("dp_segment: all costs zero gives the fewest boundaries") {
  FeatureMatrix x;
  x.utt_id = "u";
  x.data = FloatMatrix::Zero(10, 3);
  x.data.col(0).setConstant(0.5f);
  Codebook cb{RowMatrix::Zero(1, 3)};
  cb.centroids(0, 0) = 1.0;
  ESKMeansConfig cfg;
  cfg.max_span = 100;
  const BoundarySet cand{"u", {0, 2, 3, 5, 7, 9, 10}, 10};
  CHECK(dp_segment(x, cand, cb, cfg).chosen.frames == std::vector<int>{0, 10});
  cfg.max_span = 4;
  // Fewest segments possible is 2; the earliest-start tie-break picks {0,3,10}.
  const auto r = dp_segment(x, cand, cb, cfg);
  CHECK(r.chosen.frames.size() == 3);
  CHECK(r.chosen.frames == std::vector<int>{0, 3, 10});
}

TEST_CASE("dp_segment: degenerate segments and fallback") {
  // Segment [0,2) averages to zero; the DP must route around it.
  const FeatureMatrix x = rows("u", {{1, 0}, {-1, 0}, {0, 1}});
  Codebook cb{RowMatrix(1, 2)};
  cb.centroids << 1, 0;
  ESKMeansConfig cfg;
  cfg.max_span = 2;
  const auto r = dp_segment(x, {"u", {0, 1, 2, 3}, 3}, cb, cfg);
  CHECK_FALSE(r.fallback);
  CHECK(std::isfinite(r.cost));

  FeatureMatrix zero;
  zero.utt_id = "z";
  zero.data = FloatMatrix::Zero(4, 2);
  const BoundarySet cand{"z", {0, 2, 4}, 4};
  const auto f = dp_segment(zero, cand, cb, cfg);
  CHECK(f.fallback);
  CHECK(f.chosen == cand);

  CHECK_THROWS(dp_segment(x, {"u", {0, 4}, 4}, cb, cfg));
}

TEST_CASE("eskmeans_fit: edge-only candidates reduce to plain k-means") {
  Rng rng(2);
  auto corpus = testing::random_candidate_corpus(rng, 15, 6, 4);
  std::vector<BoundarySet> edges;
  for (const auto& f : corpus.features) edges.push_back({f.utt_id, {0, f.num_frames()}, f.num_frames()});
  ESKMeansConfig cfg;
  cfg.num_clusters = 4;
  cfg.seed = 3;
  const ESKMeansResult r = eskmeans_fit(corpus.manifest, corpus.features, edges, cfg);
  CHECK(r.outer_iters == 1);
  CHECK(r.converged);
  CHECK(r.chosen == edges);
  const EmbeddingSet e = embed_all(corpus.features, edges);
  const KMeansResult km = kmeans_fit(e.vectors, {4, 3, cfg.kmeans_iters, 1, {}});
  CHECK(format_classfile(r.lexicon) ==
        format_classfile(build_lexicon(corpus.manifest, e.refs, km.assignments)));
}

TEST_CASE("eskmeans_fit: zero outer iterations equals plain k-means on the candidates") {
  Rng rng(3);
  auto corpus = testing::random_candidate_corpus(rng, 12, 8, 3);
  ESKMeansConfig cfg;
  cfg.num_clusters = 5;
  cfg.max_outer_iters = 0;
  const ESKMeansResult r = eskmeans_fit(corpus.manifest, corpus.features, corpus.candidates, cfg);
  CHECK(r.outer_iters == 0);
  CHECK(r.objective_per_iter.size() == 1);
  const EmbeddingSet e = embed_all(corpus.features, corpus.candidates);
  const KMeansResult km = kmeans_fit(e.vectors, {5, 0, cfg.kmeans_iters, 1, {}});
  CHECK(format_classfile(r.lexicon) ==
        format_classfile(build_lexicon(corpus.manifest, e.refs, km.assignments)));
}

TEST_CASE("eskmeans_fit removes spurious word-internal candidates") {
  Rng rng(4);
  const auto corpus = testing::word_pair_corpus(rng, 60, 8, 0.05);
  ESKMeansConfig cfg;
  cfg.num_clusters = 2;
  cfg.seed = 1;
  const ESKMeansResult r = eskmeans_fit(corpus.manifest, corpus.features, corpus.candidates, cfg);
  int clean = 0;
  for (std::size_t u = 0; u < corpus.truth.size(); ++u) clean += r.chosen[u] == corpus.truth[u];
  MESSAGE("utterances with exactly the word boundaries: " << clean << "/" << corpus.truth.size());
  CHECK(clean >= 0.9 * static_cast<double>(corpus.truth.size()));
  CHECK(r.lexicon.classes.size() == 2);
}

TEST_CASE("eskmeans_fit: J never increases and the state stays valid") {
  Rng rng(5);
  for (int trial = 0; trial < 20; ++trial) {
    auto corpus = testing::random_candidate_corpus(rng, 20, 10, 4);
    ESKMeansConfig cfg;
    cfg.num_clusters = testing::random_int(rng, 1, 6);
    cfg.seed = static_cast<std::uint64_t>(trial);
    cfg.max_span = testing::random_int(rng, 1, 6);
    cfg.batch_size = trial % 3 == 0 ? 7 : 0;
    cfg.duration_weighting = trial % 5 != 4;
    const ESKMeansResult r = eskmeans_fit(corpus.manifest, corpus.features, corpus.candidates, cfg);
    REQUIRE(r.objective_per_iter.size() == static_cast<std::size_t>(r.outer_iters) + 1);
    CHECK(r.outer_iters <= cfg.max_outer_iters);
    for (std::size_t i = 1; i < r.objective_per_iter.size(); ++i)
      CHECK(r.objective_per_iter[i] <= r.objective_per_iter[i - 1] + 1e-9);
    for (std::size_t u = 0; u < corpus.candidates.size(); ++u) {
      CHECK_NOTHROW(r.chosen[u].validate());
      CHECK(is_subset(r.chosen[u].frames, corpus.candidates[u].frames));
    }
    // The reported final J matches a direct recomputation.
    CHECK(joint_objective(r.embeddings, r.codebook, cfg.duration_weighting) ==
          doctest::Approx(r.objective_per_iter.back()));
    CHECK(r.lexicon.num_segments() == r.embeddings.size());
  }
}

TEST_CASE("eskmeans_fit: thread count does not change the result") {
  Rng rng(6);
  auto corpus = testing::random_candidate_corpus(rng, 20, 10, 4);
  ESKMeansConfig cfg;
  cfg.num_clusters = 4;
  const auto a = eskmeans_fit(corpus.manifest, corpus.features, corpus.candidates, cfg);
  cfg.threads = 4;
  const auto b = eskmeans_fit(corpus.manifest, corpus.features, corpus.candidates, cfg);
  CHECK(a.chosen == b.chosen);
  CHECK(a.codebook.centroids == b.codebook.centroids);
}

TEST_CASE("eskmeans_fit: errors") {
  Manifest m;
  ESKMeansConfig cfg;
  CHECK_THROWS(eskmeans_fit(m, {}, {}, cfg));
  Rng rng(7);
  auto corpus = testing::random_candidate_corpus(rng, 3, 4, 2);
  cfg.max_span = 0;
  CHECK_THROWS(eskmeans_fit(corpus.manifest, corpus.features, corpus.candidates, cfg));
  cfg.max_span = 3;
  auto wrong = corpus.candidates;
  wrong[1].utt_id = "other";
  CHECK_THROWS(eskmeans_fit(corpus.manifest, corpus.features, wrong, cfg));
}

TEST_CASE("runtime report") {
  StageTimer t;
  t.add("pca", 0.5);
  t.add("kmeans", 1.25);
  t.add("kmeans", 0.25);
  t.add("custom", 2.0);
  const auto j = runtime_report(t);
  for (const auto& s : pipeline_stages()) CHECK(j.at("stages").contains(s));
  CHECK(j.at("stages").at("kmeans").get<double>() == doctest::Approx(1.5));
  CHECK(j.at("stages").at("io").get<double>() == 0.0);
  CHECK(j.at("total_s").get<double>() == doctest::Approx(4.0));
  double sum = 0.0;
  for (const auto& [name, v] : j.at("stages").items()) sum += v.get<double>();
  CHECK(sum == doctest::Approx(j.at("total_s").get<double>()));
  CHECK(format_runtime_table(t).find("kmeans") != std::string::npos);

  {
    auto scope = time_stage(&t, "io");
    std::this_thread::sleep_for(std::chrono::milliseconds(5));
  }
  CHECK(t.get("io") > 0.0);
  { auto scope = time_stage(nullptr, "io"); }

  // Prominence pipeline: no DP time.
  Rng rng(8);
  auto corpus = testing::random_candidate_corpus(rng, 6, 5, 6);
  RunConfig cfg;
  cfg.kmeans.K = 3;
  cfg.pca.target_dim = 3;
  cfg.threads = 1;
  StageTimer prom;
  const auto bounds = detect_boundaries(corpus.features, cfg.segmenter.active(), 1, &prom);
  cluster_segments(corpus.manifest, corpus.features, bounds, cfg, &prom);
  CHECK(prom.get("dp") == 0.0);
  CHECK(runtime_report(prom).at("stages").at("dp").get<double>() == 0.0);
  CHECK(prom.get("kmeans") > 0.0);

  StageTimer es;
  run_eskmeans(corpus.manifest, corpus.features, corpus.candidates, cfg, &es);
  CHECK(es.get("dp") > 0.0);
}
