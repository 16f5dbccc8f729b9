// tests/acceptance.cpp

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

// Acceptance suite: one PASS/FAIL line per criterion. Exit status is nonzero
// when any non-optional criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <string>
#include <vector>

#include <json.hpp>
#include <spdlog/spdlog.h>

#include "oracles.hpp"
#include "synthetic.hpp"
#include "wordseg/pipeline.hpp"

using namespace wordseg;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

struct Outcome {
  enum Status { kPass, kFail, kSkip } status = kFail;
  std::string detail;
};

Outcome verdict(bool ok, std::string detail) {
  return {ok ? Outcome::kPass : Outcome::kFail, std::move(detail)};
}

std::string fmt(const char* f, auto... args) {
  char buf[1024];
  std::snprintf(buf, sizeof(buf), f, args...);
  return buf;
}

bool close(double a, double b, double tol) {
  if (std::isinf(a) || std::isinf(b)) return a == b;
  return std::abs(a - b) <= tol * std::max(1.0, std::abs(b));
}

// ---------------------------------------------------------------------------

Outcome dp_optimality() {
  const auto start = Clock::now();
  Rng rng(20240601);
  int mismatches = 0, fallbacks = 0;
  double worst = 0.0;
  for (int trial = 0; trial < 1000; ++trial) {
    const auto inst = testing::random_dp_instance(rng, 12, 8);
    ESKMeansConfig cfg;
    cfg.num_clusters = static_cast<int>(inst.centroids.rows());
    cfg.max_span = inst.max_span;
    cfg.duration_weighting = inst.weighting;
    const DPResult r = dp_segment(inst.features, inst.candidates, Codebook{inst.centroids}, cfg);
    const double want = oracle::best_segmentation_cost(inst.features, inst.candidates.frames,
                                                       inst.centroids, inst.max_span, inst.weighting);
    if (std::isinf(want)) {
      ++fallbacks;
      if (!r.fallback) ++mismatches;
      continue;
    }
    if (r.fallback || !close(r.cost, want, 1e-9)) ++mismatches;
    else worst = std::max(worst, std::abs(r.cost - want));
  }
  const double elapsed = seconds_since(start);
  return verdict(mismatches == 0 && elapsed < 30.0,
                 fmt("1000 cases, %d mismatches, %d without a finite path, max |diff| %.2e, %.2f s",
                     mismatches, fallbacks, worst, elapsed));
}

Outcome objective_monotonicity() {
  const auto start = Clock::now();
  int violations = 0, overruns = 0, total_iters = 0;
  for (int c = 0; c < 100; ++c) {
    Rng rng(1000 + static_cast<std::uint64_t>(c));
    auto corpus = testing::random_candidate_corpus(rng, 20, 10, 4);
    ESKMeansConfig cfg;
    cfg.num_clusters = testing::random_int(rng, 2, 6);
    cfg.max_outer_iters = 10;
    cfg.max_span = testing::random_int(rng, 2, 6);
    cfg.seed = static_cast<std::uint64_t>(c);
    cfg.duration_weighting = c % 4 != 3;
    cfg.batch_size = c % 5 == 4 ? 7 : 0;
    const auto r = eskmeans_fit(corpus.manifest, corpus.features, corpus.candidates, cfg);
    const auto& J = r.objective_per_iter;
    for (std::size_t i = 1; i < J.size(); ++i)
      if (J[i] > J[i - 1] + 1e-9 * std::max(1.0, std::abs(J[i - 1]))) ++violations;
    if (r.outer_iters > cfg.max_outer_iters || J.size() != static_cast<std::size_t>(r.outer_iters) + 1)
      ++overruns;
    total_iters += r.outer_iters;
  }
  const double elapsed = seconds_since(start);
  return verdict(violations == 0 && overruns == 0 && elapsed < 60.0,
                 fmt("100 corpora, %d increases, %d iteration-limit breaches, %d outer iterations, %.2f s",
                     violations, overruns, total_iters, elapsed));
}

Outcome reduction_property() {
  int identical = 0;
  const int runs = 3;
  for (int s = 0; s < runs; ++s) {
    testing::TempDir dir("wordseg_accept_reduce");
    testing::SyntheticSpec spec;
    spec.n_utts = 40;
    spec.seed = 100 + static_cast<std::uint64_t>(s);
    auto corpus = testing::make_corpus(spec);
    testing::write_corpus(corpus, dir / "data");
    json base = json::object();
    base["paths"]["manifest"] = (dir / "data/manifest.json").string();
    base["pca"]["M"] = 8;
    base["kmeans"]["K"] = 6;
    base["kmeans"]["seed"] = 7 + s;
    base["pca"]["seed"] = 3 + s;
    base["threads"] = 1;

    json seg = base;
    seg["paths"]["output_dir"] = (dir / "cand").string();
    seg["segmenter"]["mode"] = "candidates";
    cmd_segment(resolve_config(seg));
    const std::string cand = (dir / "cand" / run_files::kBoundaries).string();

    json es = base;
    es["paths"]["output_dir"] = (dir / "es").string();
    es["paths"]["candidates"] = cand;
    es["eskmeans"]["max_outer_iters"] = 0;
    cmd_eskmeans(resolve_config(es));

    json cl = base;
    cl["paths"]["output_dir"] = (dir / "cl").string();
    cl["paths"]["boundaries"] = cand;
    cmd_cluster(resolve_config(cl));

    if (read_text_file(dir / "es" / run_files::kClasses) == read_text_file(dir / "cl" / run_files::kClasses))
      ++identical;
  }
  return verdict(identical == runs, fmt("%d/%d class files byte-identical", identical, runs));
}

// ---------------------------------------------------------------------------

struct PlantedSet {
  std::vector<FeatureMatrix> features;
  std::vector<BoundarySet> truth;
};

PlantedSet planted_set(std::uint64_t seed, int n_utts) {
  Rng rng(seed);
  PlantedSet s;
  for (int u = 0; u < n_utts; ++u) {
    auto p = testing::planted_utterance(rng, "p" + std::to_string(u), 16, testing::random_int(rng, 3, 10),
                                        5, 15, 0.1);
    s.features.push_back(std::move(p.features));
    s.truth.push_back(std::move(p.truth));
  }
  return s;
}

struct Counts {
  long ref = 0, hyp = 0, hit = 0;
  double hit_rate() const { return ref ? static_cast<double>(hit) / ref : 0.0; }
  double precision() const { return hyp ? static_cast<double>(hit) / hyp : 0.0; }
  double f1() const {
    const double p = precision(), r = hit_rate();
    return p + r > 0 ? 2 * p * r / (p + r) : 0.0;
  }
};

std::vector<double> interior(const BoundarySet& b) {
  return {b.frames.begin() + 1, b.frames.end() - 1};
}

Counts score_planted(const PlantedSet& set, const SegmenterConfig& cfg) {
  const auto normalized = normalize_corpus(set.features);
  const auto hyp = segment_corpus(normalized, cfg);
  Counts c;
  for (std::size_t u = 0; u < hyp.size(); ++u) {
    const auto r = interior(set.truth[u]), h = interior(hyp[u]);
    c.ref += static_cast<long>(r.size());
    c.hyp += static_cast<long>(h.size());
    c.hit += match_boundaries(r, h, 1.0);
  }
  return c;
}

Outcome planted_recovery() {
  const PlantedSet held_out = planted_set(777, 20);
  SegmenterConfig best{1, 0.05, 1};
  double best_f1 = -1.0;
  for (int w = 1; w <= 3; ++w) {
    for (int i = 1; i <= 19; ++i) {
      const SegmenterConfig cfg{w, 0.05 * i, 1};
      const double f1 = score_planted(held_out, cfg).f1();
      if (f1 > best_f1) {
        best_f1 = f1;
        best = cfg;
      }
    }
  }
  const Counts test = score_planted(planted_set(4242, 200), best);
  return verdict(test.hit_rate() >= 0.90,
                 fmt("window %d, threshold %.2f (held-out F1 %.3f); hit rate %.4f, precision %.4f "
                     "over %ld boundaries",
                     best.window_frames, best.prominence_threshold, best_f1, test.hit_rate(),
                     test.precision(), test.ref));
}

// ---------------------------------------------------------------------------

Alignment phones_of(const std::string& utt, const std::vector<std::string>& labels) {
  Alignment a{utt, Tier::kPhone, {}};
  for (std::size_t i = 0; i < labels.size(); ++i) a.entries.push_back({0.1 * i, 0.1 * (i + 1), labels[i]});
  return a;
}

Outcome metric_hand_cases() {
  std::vector<std::string> failed;
  const auto expect = [&](bool ok, const char* name) {
    if (!ok) failed.push_back(name);
  };
  expect(r_value(1.0, 0.0) * 100.0 == 100.0, "r_value(1,0)");
  expect(std::abs(r_value(0.0, 0.0) * 100.0 - 14.645) <= 0.001, "r_value(0,0)");
  expect(std::abs(r_value(1.0, 1.0) * 100.0 - 14.645) <= 0.001, "r_value(1,1)");

  const std::vector<Alignment> phones = {phones_of("u", {"a", "b", "a", "c", "a", "b"})};
  expect(ned(ClassFile{{{0, {{"u", 0.0, 0.2}, {"u", 0.4, 0.6}}}}}, phones).ned == 0.0, "NED identical");
  expect(ned(ClassFile{{{0, {{"u", 0.0, 0.2}, {"u", 0.2, 0.4}}}}}, phones).ned == 0.5, "NED [a b]/[a c]");
  const std::vector<ClusterPairScores> pooled = {{0.5, 1}, {0.0 + 1.0 + 0.5, 3}};
  const NEDResult p = pool_ned(pooled, NEDPooling::kPairs);
  expect(p.ned == 0.5 && p.n_pairs == 4, "NED 4-pair pooling");

  const std::vector<Token> ref3 = {{0.0, 0.3}, {0.3, 0.7}, {0.7, 1.0}};
  expect(token_f1(ref3, ref3).f1 == 1.0, "token F1 identity");
  expect(token_f1(ref3, std::vector<Token>{{0.0, 1.0}}).n_correct == 0, "token F1 whole utterance");
  const std::vector<Token> ref2 = {{0.0, 0.5}, {0.5, 1.0}};
  const std::vector<Token> hyp2 = {{0.0, 0.49}, {0.49, 1.0}};
  const auto near = token_f1(ref2, hyp2, 0.02);
  expect(near.n_correct == 2 && near.f1 == 1.0, "token F1 within tolerance");

  // Committed three-utterance fixture with its hand computation.
  const fs::path dir = fs::path(WORDSEG_FIXTURE_DIR) / "eval_3utt";
  const Manifest m = load_manifest(dir / "manifest.json", false);
  const auto report = evaluate_run(m, read_classfile(dir / "classes.txt"),
                                   read_boundaries(dir / "boundaries.tsv", m),
                                   load_alignments(dir / "words.tsv", Tier::kWord),
                                   load_alignments(dir / "phones.tsv", Tier::kPhone));
  const json want = json::parse(read_text_file(dir / "expected.json"));
  const json got = report_to_json(report);
  expect(close(got["r_value"], want["r_value"], 1e-12) &&
             close(got["token_f1"], want["token"]["f1"], 1e-12) &&
             close(got["ned"], want["ned_pairs"], 1e-12),
         "3-utterance fixture");

  std::string detail = failed.empty() ? "all hand cases exact" : "failed:";
  for (const auto& f : failed) detail += " [" + f + "]";
  return verdict(failed.empty(), detail);
}

Outcome kmeans_criteria() {
  int increases = 0;
  for (int d = 0; d < 100; ++d) {
    Rng rng(500 + static_cast<std::uint64_t>(d));
    const int n = testing::random_int(rng, 5, 200);
    const RowMatrix z = testing::random_matrix(rng, n, testing::random_int(rng, 1, 8));
    double prev = std::numeric_limits<double>::infinity();
    KMeansOptions opt{testing::random_int(rng, 1, std::min(n, 12)), static_cast<std::uint64_t>(d), 50, 1, {}};
    opt.observer = [&](std::string_view, double j) {
      if (j > prev + 1e-9 * std::max(1.0, std::abs(prev))) ++increases;
      prev = j;
    };
    kmeans_fit(z, opt);
  }

  Rng rng(11);
  const RowMatrix pts = testing::random_matrix(rng, 15, 3);
  const double k_eq_n = kmeans_fit(pts, {15, 0, 25, 1, {}}).objective;

  int oracle_misses = 0;
  double worst = 0.0;
  for (int trial = 0; trial < 25; ++trial) {
    const RowMatrix z = testing::two_boxes(rng, 12, 10.0);
    const double got = kmeans_fit(z, {2, static_cast<std::uint64_t>(trial), 25, 1, {}}).objective;
    const double gap = std::abs(got - oracle::best_two_partition(z));
    worst = std::max(worst, gap);
    if (gap > 1e-9) ++oracle_misses;
  }
  return verdict(increases == 0 && k_eq_n == 0.0 && oracle_misses == 0,
                 fmt("100 datasets, %d half-step increases; K=N objective %.3g; N=12 K=2 oracle "
                     "misses %d/25 (max gap %.2e)",
                     increases, k_eq_n, oracle_misses, worst));
}

// ---------------------------------------------------------------------------

Outcome speed_claim() {
  const auto start = Clock::now();
  testing::TransitionSpec spec;
  spec.n_utts = 1000;
  spec.dim = 64;
  spec.seed = 2024;
  const auto corpus = testing::transition_corpus(spec);
  long frames = 0;
  for (const auto& f : corpus.features) frames += f.num_frames();

  RunConfig cfg = resolve_config(json::object());
  cfg.pca.target_dim = 32;
  cfg.kmeans.K = 300;
  cfg.kmeans.seed = 5;
  cfg.pca.seed = 5;
  cfg.eskmeans.max_outer_iters = 10;
  cfg.threads = 1;

  StageTimer prom_timer;
  const auto t0 = Clock::now();
  const auto bounds = detect_boundaries(corpus.features, cfg.segmenter.prominence, 1, &prom_timer);
  const auto clusters = cluster_segments(corpus.manifest, corpus.features, bounds, cfg, &prom_timer);
  const double prom_s = seconds_since(t0);

  StageTimer es_timer;
  const auto t1 = Clock::now();
  const auto cands = detect_boundaries(corpus.features, cfg.segmenter.candidates, 1, &es_timer);
  const auto es = run_eskmeans(corpus.manifest, corpus.features, cands, cfg, &es_timer);
  const double es_s = seconds_since(t1);

  long n_words = 0, n_cand = 0, cand_hits = 0, n_prom = 0;
  for (std::size_t u = 0; u < cands.size(); ++u) {
    const auto r = interior(corpus.word_boundaries[u]), h = interior(cands[u]);
    n_words += static_cast<long>(r.size());
    n_cand += static_cast<long>(h.size());
    n_prom += static_cast<long>(bounds[u].frames.size()) - 2;
    cand_hits += match_boundaries(r, h, 2.0);
  }
  const double ratio = prom_s / es_s;
  const double total = seconds_since(start);
  return verdict(ratio <= 0.5 && total < 600.0,
                 fmt("%zu utts, %ld frames, D=64, M=32, K=300: prominence %.2f s (%ld boundaries, %zu "
                     "segments, %ld words), ES-KMeans+ %.2f s (%d outer iters, %ld candidates, word recall %.3f at 2 frames); "
                     "ratio %.3f; check took %.1f s",
                     corpus.features.size(), frames, prom_s, n_prom, clusters.embeddings.size(), n_words, es_s,
                     es.result.outer_iters, n_cand, static_cast<double>(cand_hits) / n_words, ratio,
                     total));
}

Outcome librispeech_check() {
  const char* path = std::getenv("WORDSEG_LIBRISPEECH_CONFIG");
  if (path == nullptr || *path == '\0')
    return {Outcome::kSkip, "set WORDSEG_LIBRISPEECH_CONFIG to a run config with extracted features"};
  json cfg = json::parse(read_text_file(path));
  cfg["pipeline"]["mode"] = "prominence";
  const json r = cmd_pipeline(resolve_config(cfg));
  if (!r["prominence"].contains("evaluation")) return {Outcome::kFail, "evaluation did not run"};
  const json& e = r["prominence"]["evaluation"];
  const double ned_v = e["ned"].is_null() ? -100.0 : e["ned"].get<double>();
  const double r_v = e["r_value"].is_null() ? -100.0 : e["r_value"].get<double>();
  const double f1 = e["token_f1"];
  const bool ok = std::abs(ned_v - 40.4) <= 5.0 && std::abs(r_v - 50.7) <= 5.0 && std::abs(f1 - 15.6) <= 5.0;
  return verdict(ok, fmt("NED %.1f, R-value %.1f, token F1 %.1f (pooling %s, overlap %.2f s / %.2f)",
                         ned_v, r_v, f1, e["conventions"]["ned_pooling"].get<std::string>().c_str(),
                         e["conventions"]["overlap_min_s"].get<double>(),
                         e["conventions"]["overlap_min_fraction"].get<double>()));
}

}  // namespace

int main() {
  spdlog::set_level(spdlog::level::warn);
  struct Criterion {
    const char* name;
    Outcome (*run)();
    bool optional;
  };
  const Criterion criteria[] = {
      {"dp-optimality", dp_optimality, false},
      {"objective-monotonicity", objective_monotonicity, false},
      {"reduction-property", reduction_property, false},
      {"planted-boundary-recovery", planted_recovery, false},
      {"metric-hand-cases", metric_hand_cases, false},
      {"kmeans", kmeans_criteria, false},
      {"speed-ratio", speed_claim, false},
      {"librispeech-integration", librispeech_check, true},
  };
  int failures = 0;
  for (const auto& c : criteria) {
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {Outcome::kFail, std::string("exception: ") + e.what()};
    }
    const char* tag = o.status == Outcome::kPass ? "PASS" : o.status == Outcome::kSkip ? "SKIP" : "FAIL";
    std::printf("%s %s: %s\n", tag, c.name, o.detail.c_str());
    std::fflush(stdout);
    if (o.status == Outcome::kFail && !c.optional) ++failures;
  }
  return failures == 0 ? 0 : 1;
}
