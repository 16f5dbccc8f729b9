// src/pipeline.cpp

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

#include "wordseg/pipeline.hpp"

#include <algorithm>
#include <iostream>
#include <map>
#include <stdexcept>
#include <unordered_map>

#include <spdlog/spdlog.h>

#include "wordseg/util.hpp"

namespace wordseg {

namespace fs = std::filesystem;
using nlohmann::json;

int preset_clusters(const std::string& language) {
  static const std::map<std::string, int> presets = {
      {"english", 43000}, {"french", 29000}, {"mandarin", 3000}, {"german", 29000}, {"wolof", 3500}};
  const auto it = presets.find(language);
  if (it == presets.end()) throw std::invalid_argument("no cluster preset for language '" + language + "'");
  return it->second;
}

// ---------------------------------------------------------------------------
// Config

int RunConfig::thread_count() const { return resolve_threads(threads); }

ESKMeansConfig RunConfig::eskmeans_config() const {
  ESKMeansConfig c;
  c.num_clusters = kmeans.K;
  c.max_outer_iters = eskmeans.max_outer_iters;
  c.max_span = eskmeans.max_span;
  c.seed = kmeans.seed;
  c.duration_weighting = eskmeans.duration_weighting;
  c.kmeans_iters = kmeans.max_iters;
  c.batch_size = eskmeans.batch_size;
  c.threads = thread_count();
  return c;
}

EvalOptions RunConfig::eval_options() const {
  EvalOptions o;
  o.tol_s = eval.tol_s;
  o.ned.overlap = OverlapRule{eval.overlap_min_s, eval.overlap_min_fraction};
  o.ned.pooling = eval.ned_pooling == "clusters" ? NEDPooling::kClusters : NEDPooling::kPairs;
  o.matching = eval.matching == "greedy_nearest" ? MatchStrategy::kGreedyNearest : MatchStrategy::kOptimal;
  o.macro_boundary = eval.macro_boundary;
  o.threads = thread_count();
  return o;
}

namespace {

json segmenter_json(const SegmenterConfig& s) {
  return {{"window", s.window_frames}, {"threshold", s.prominence_threshold}};
}

}  // namespace

json config_to_json(const RunConfig& c) {
  return {
      {"paths",
       {{"manifest", c.paths.manifest},
        {"cluster_manifest", c.paths.cluster_manifest},
        {"boundaries", c.paths.boundaries},
        {"candidates", c.paths.candidates},
        {"word_alignments", c.paths.word_alignments},
        {"phone_alignments", c.paths.phone_alignments},
        {"output_dir", c.paths.output_dir}}},
      {"segmenter",
       {{"mode", c.segmenter.mode},
        {"prominence", segmenter_json(c.segmenter.prominence)},
        {"candidates", segmenter_json(c.segmenter.candidates)},
        {"min_segment_frames", c.segmenter.prominence.min_segment_frames}}},
      {"pca", {{"M", c.pca.target_dim}, {"sample_cap", c.pca.sample_cap}, {"seed", c.pca.seed}}},
      {"kmeans",
       {{"K", c.kmeans.K > 0 ? json(c.kmeans.K) : json(nullptr)},
        {"language", c.kmeans.language},
        {"seed", c.kmeans.seed},
        {"max_iters", c.kmeans.max_iters}}},
      {"eskmeans",
       {{"max_outer_iters", c.eskmeans.max_outer_iters},
        {"max_span", c.eskmeans.max_span},
        {"duration_weighting", c.eskmeans.duration_weighting},
        {"batch_size", c.eskmeans.batch_size}}},
      {"eval",
       {{"tol_s", c.eval.tol_s},
        {"ned_pooling", c.eval.ned_pooling},
        {"overlap_min_s", c.eval.overlap_min_s},
        {"overlap_min_fraction", c.eval.overlap_min_fraction},
        {"matching", c.eval.matching},
        {"macro_boundary", c.eval.macro_boundary}}},
      {"pipeline", {{"mode", c.pipeline_mode}}},
      {"threads", c.threads},
  };
}

json default_config_json() { return config_to_json(RunConfig{}); }

namespace {

void merge_checked(json& base, const json& overrides, const std::string& prefix) {
  if (!overrides.is_object()) throw std::invalid_argument("config must be a JSON object");
  for (auto it = overrides.begin(); it != overrides.end(); ++it) {
    const std::string key = prefix.empty() ? it.key() : prefix + "." + it.key();
    if (!base.contains(it.key())) throw std::invalid_argument("unknown config key '" + key + "'");
    json& slot = base[it.key()];
    if (slot.is_object()) {
      merge_checked(slot, it.value(), key);
    } else {
      slot = it.value();
    }
  }
}

template <typename T>
T get_as(const json& j, const char* section, const char* key) {
  try {
    return j.at(section).at(key).get<T>();
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("invalid config value ") + section + "." + key + ": " +
                                e.what());
  }
}

void require_choice(const std::string& value, std::initializer_list<const char*> choices,
                    const std::string& key) {
  for (const char* c : choices)
    if (value == c) return;
  throw std::invalid_argument("invalid value '" + value + "' for " + key);
}

}  // namespace

void apply_override(json& config, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0)
    throw std::invalid_argument("override must look like section.key=value: '" + assignment + "'");
  const std::string path = assignment.substr(0, eq);
  const std::string raw = assignment.substr(eq + 1);
  json value;
  try {
    value = json::parse(raw);
  } catch (const json::exception&) {
    value = raw;
  }
  json* node = &config;
  std::size_t start = 0;
  while (true) {
    const std::size_t dot = path.find('.', start);
    const std::string key = path.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
    if (dot == std::string::npos) {
      (*node)[key] = value;
      return;
    }
    if (!node->contains(key) || !(*node)[key].is_object()) (*node)[key] = json::object();
    node = &(*node)[key];
    start = dot + 1;
  }
}

RunConfig resolve_config(const json& overrides) {
  json j = default_config_json();
  merge_checked(j, overrides, "");

  RunConfig c;
  c.paths.manifest = get_as<std::string>(j, "paths", "manifest");
  c.paths.cluster_manifest = get_as<std::string>(j, "paths", "cluster_manifest");
  c.paths.boundaries = get_as<std::string>(j, "paths", "boundaries");
  c.paths.candidates = get_as<std::string>(j, "paths", "candidates");
  c.paths.word_alignments = get_as<std::string>(j, "paths", "word_alignments");
  c.paths.phone_alignments = get_as<std::string>(j, "paths", "phone_alignments");
  c.paths.output_dir = get_as<std::string>(j, "paths", "output_dir");

  c.segmenter.mode = get_as<std::string>(j, "segmenter", "mode");
  require_choice(c.segmenter.mode, {"prominence", "candidates"}, "segmenter.mode");
  const int min_frames = get_as<int>(j, "segmenter", "min_segment_frames");
  for (auto [name, target] : {std::pair{"prominence", &c.segmenter.prominence},
                              std::pair{"candidates", &c.segmenter.candidates}}) {
    target->window_frames = get_as<int>(j["segmenter"], name, "window");
    target->prominence_threshold = get_as<double>(j["segmenter"], name, "threshold");
    target->min_segment_frames = min_frames;
    target->validate();
  }

  c.pca.target_dim = get_as<int>(j, "pca", "M");
  c.pca.sample_cap = get_as<std::int64_t>(j, "pca", "sample_cap");
  c.pca.seed = get_as<std::uint64_t>(j, "pca", "seed");
  if (c.pca.target_dim < 1) throw std::invalid_argument("pca.M must be >= 1");
  if (c.pca.sample_cap < 1) throw std::invalid_argument("pca.sample_cap must be >= 1");

  c.kmeans.language = get_as<std::string>(j, "kmeans", "language");
  if (j["kmeans"]["K"].is_null()) {
    c.kmeans.K = c.kmeans.language.empty() ? 0 : preset_clusters(c.kmeans.language);
  } else {
    c.kmeans.K = get_as<int>(j, "kmeans", "K");
    if (c.kmeans.K < 1) throw std::invalid_argument("kmeans.K must be >= 1");
  }
  c.kmeans.seed = get_as<std::uint64_t>(j, "kmeans", "seed");
  c.kmeans.max_iters = get_as<int>(j, "kmeans", "max_iters");
  if (c.kmeans.max_iters < 0) throw std::invalid_argument("kmeans.max_iters must be >= 0");

  c.eskmeans.max_outer_iters = get_as<int>(j, "eskmeans", "max_outer_iters");
  c.eskmeans.max_span = get_as<int>(j, "eskmeans", "max_span");
  c.eskmeans.duration_weighting = get_as<bool>(j, "eskmeans", "duration_weighting");
  c.eskmeans.batch_size = get_as<int>(j, "eskmeans", "batch_size");

  c.eval.tol_s = get_as<double>(j, "eval", "tol_s");
  c.eval.ned_pooling = get_as<std::string>(j, "eval", "ned_pooling");
  require_choice(c.eval.ned_pooling, {"pairs", "clusters"}, "eval.ned_pooling");
  c.eval.overlap_min_s = get_as<double>(j, "eval", "overlap_min_s");
  c.eval.overlap_min_fraction = get_as<double>(j, "eval", "overlap_min_fraction");
  c.eval.matching = get_as<std::string>(j, "eval", "matching");
  require_choice(c.eval.matching, {"optimal", "greedy_nearest"}, "eval.matching");
  c.eval.macro_boundary = get_as<bool>(j, "eval", "macro_boundary");
  if (!(c.eval.tol_s >= 0.0)) throw std::invalid_argument("eval.tol_s must be >= 0");

  c.pipeline_mode = get_as<std::string>(j, "pipeline", "mode");
  require_choice(c.pipeline_mode, {"prominence", "eskmeans", "both"}, "pipeline.mode");
  try {
    c.threads = j.at("threads").get<int>();
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("invalid config value threads: ") + e.what());
  }
  ESKMeansConfig es = c.eskmeans_config();
  es.num_clusters = std::max(es.num_clusters, 1);  // K may still come from a later override
  es.validate();
  return c;
}

// ---------------------------------------------------------------------------
// In-memory stages

std::vector<BoundarySet> detect_boundaries(std::span<const FeatureMatrix> features,
                                           const SegmenterConfig& config, int threads,
                                           StageTimer* timer) {
  auto scope = time_stage(timer, "boundary_detection");
  const std::vector<FeatureMatrix> normalized = normalize_corpus(features, threads);
  return segment_corpus(normalized, config, threads);
}

namespace {

std::vector<FeatureMatrix> project(const PCAModel& pca, std::span<const FeatureMatrix> features,
                                   int threads, StageTimer* timer) {
  auto scope = time_stage(timer, "embedding");
  return apply_pca(pca, features, threads);
}

PCAModel fit_projection(std::span<const FeatureMatrix> features, const RunConfig& config,
                        StageTimer* timer) {
  auto scope = time_stage(timer, "pca");
  return fit_pca_corpus(features, config.pca);
}

void require_clusters(const RunConfig& config) {
  if (config.kmeans.K < 1)
    throw std::invalid_argument("kmeans.K is not set (give kmeans.K or kmeans.language)");
}

}  // namespace

ClusterOutputs cluster_segments(const Manifest& manifest, std::span<const FeatureMatrix> features,
                                std::span<const BoundarySet> boundaries, const RunConfig& config,
                                StageTimer* timer) {
  require_clusters(config);
  const int threads = config.thread_count();
  ClusterOutputs out;
  out.pca = fit_projection(features, config, timer);
  const std::vector<FeatureMatrix> projected = project(out.pca, features, threads, timer);
  {
    auto scope = time_stage(timer, "embedding");
    out.embeddings = embed_all(projected, boundaries, threads);
  }
  if (out.embeddings.size() == 0) throw std::runtime_error("no segments left to cluster");
  {
    auto scope = time_stage(timer, "kmeans");
    out.kmeans = kmeans_fit(out.embeddings.vectors,
                            KMeansOptions{config.kmeans.K, config.kmeans.seed,
                                          config.kmeans.max_iters, threads, {}});
  }
  out.lexicon = build_lexicon(manifest, out.embeddings.refs, out.kmeans.assignments);
  return out;
}

ESKMeansOutputs run_eskmeans(const Manifest& manifest, std::span<const FeatureMatrix> features,
                             std::span<const BoundarySet> candidates, const RunConfig& config,
                             StageTimer* timer) {
  require_clusters(config);
  ESKMeansOutputs out;
  out.pca = fit_projection(features, config, timer);
  const std::vector<FeatureMatrix> projected =
      project(out.pca, features, config.thread_count(), timer);
  out.result = eskmeans_fit(manifest, projected, candidates, config.eskmeans_config(), timer);
  return out;
}

// ---------------------------------------------------------------------------
// Commands

namespace {

fs::path out_dir(const RunConfig& config) { return fs::path(config.paths.output_dir); }

// Writes through a temporary file so an interrupted stage never leaves a
// half-written output behind.
template <typename Writer>
void write_atomically(const fs::path& path, Writer&& writer) {
  const fs::path tmp = path.string() + ".tmp";
  writer(tmp);
  fs::rename(tmp, path);
}

void write_json_atomically(const fs::path& path, const json& j) {
  write_atomically(path, [&](const fs::path& p) { write_text_file(p, j.dump(2) + "\n"); });
}

void update_json_section(const fs::path& path, const std::string& key, const json& value) {
  json j = json::object();
  if (fs::exists(path)) {
    try {
      j = json::parse(read_text_file(path));
    } catch (const json::exception&) {
      spdlog::warn("replacing unreadable {}", path.string());
      j = json::object();
    }
    if (!j.is_object()) j = json::object();
  }
  j[key] = value;
  write_json_atomically(path, j);
}

void prepare_run_dir(const RunConfig& config) {
  fs::create_directories(out_dir(config));
  write_json_atomically(out_dir(config) / run_files::kConfig, config_to_json(config));
}

Manifest require_manifest(const std::string& path, const char* key) {
  if (path.empty()) throw std::invalid_argument(std::string("paths.") + key + " is not set");
  Manifest m = load_manifest(path);
  if (m.entries.empty()) throw std::invalid_argument("manifest " + path + " is empty");
  return m;
}

struct ClusterInputs {
  Manifest manifest;
  std::vector<FeatureMatrix> features;
};

ClusterInputs load_cluster_inputs(const RunConfig& config) {
  const std::string& path =
      config.paths.cluster_manifest.empty() ? config.paths.manifest : config.paths.cluster_manifest;
  ClusterInputs in;
  in.manifest = require_manifest(path, "cluster_manifest");
  in.features = load_corpus(in.manifest);
  return in;
}

// Restricts features to the utterances that have boundaries and orders the
// boundaries by manifest order.
void align_to_manifest(ClusterInputs& inputs, std::vector<BoundarySet>& boundaries) {
  std::unordered_map<std::string, std::size_t> by_utt;
  for (std::size_t i = 0; i < boundaries.size(); ++i) by_utt.emplace(boundaries[i].utt_id, i);
  std::vector<FeatureMatrix> features;
  std::vector<BoundarySet> ordered;
  std::size_t skipped = 0;
  for (std::size_t u = 0; u < inputs.features.size(); ++u) {
    const auto it = by_utt.find(inputs.features[u].utt_id);
    if (it == by_utt.end()) {
      ++skipped;
      continue;
    }
    if (boundaries[it->second].total_frames != inputs.features[u].num_frames())
      throw FormatError("boundaries of '" + it->first + "' do not match the clustering features");
    features.push_back(std::move(inputs.features[u]));
    ordered.push_back(std::move(boundaries[it->second]));
    by_utt.erase(it);
  }
  if (!by_utt.empty())
    throw FormatError("boundary utterance '" + by_utt.begin()->first + "' is not in the manifest");
  if (skipped > 0) spdlog::warn("{} manifest utterance(s) have no boundaries and are skipped", skipped);
  if (ordered.empty()) throw std::invalid_argument("no utterances to process");
  inputs.features = std::move(features);
  boundaries = std::move(ordered);
}

long interior_boundaries(std::span<const BoundarySet> sets) {
  long n = 0;
  for (const auto& b : sets) n += static_cast<long>(b.frames.size()) - 2;
  return n;
}

void write_cluster_artifacts(const fs::path& dir, const PCAModel& pca, const Codebook& codebook,
                             const CodebookInfo& info, const ClassFile& lexicon) {
  save_pca(pca, dir / run_files::kPcaPrefix);
  save_codebook(codebook, info, dir / run_files::kCodebook);
  write_atomically(dir / run_files::kClasses,
                   [&](const fs::path& p) { write_classfile(lexicon, p); });
}

json segment_impl(const RunConfig& config, StageTimer& timer) {
  Manifest manifest;
  std::vector<FeatureMatrix> features;
  {
    auto scope = time_stage(&timer, "io");
    manifest = require_manifest(config.paths.manifest, "manifest");
    features = load_corpus(manifest);
  }
  const SegmenterConfig& seg = config.segmenter.active();
  const auto boundaries = detect_boundaries(features, seg, config.thread_count(), &timer);
  {
    auto scope = time_stage(&timer, "io");
    write_atomically(out_dir(config) / run_files::kBoundaries,
                     [&](const fs::path& p) { write_boundaries(boundaries, p); });
  }
  const long n = interior_boundaries(boundaries);
  spdlog::info("segment: {} utterances, {} boundaries ({:.2f} per utterance)", boundaries.size(), n,
               static_cast<double>(n) / static_cast<double>(boundaries.size()));
  return {{"mode", config.segmenter.mode},
          {"window", seg.window_frames},
          {"threshold", seg.prominence_threshold},
          {"n_utterances", boundaries.size()},
          {"n_boundaries", n},
          {"boundaries_per_utterance", static_cast<double>(n) / static_cast<double>(boundaries.size())}};
}

json cluster_impl(const RunConfig& config, StageTimer& timer) {
  require_clusters(config);
  ClusterInputs inputs;
  std::vector<BoundarySet> boundaries;
  {
    auto scope = time_stage(&timer, "io");
    inputs = load_cluster_inputs(config);
    const fs::path bpath = config.paths.boundaries.empty()
                               ? out_dir(config) / run_files::kBoundaries
                               : fs::path(config.paths.boundaries);
    boundaries = read_boundaries(bpath, inputs.manifest);
    align_to_manifest(inputs, boundaries);
  }
  const ClusterOutputs out = cluster_segments(inputs.manifest, inputs.features, boundaries, config, &timer);
  {
    auto scope = time_stage(&timer, "io");
    write_cluster_artifacts(out_dir(config), out.pca, out.kmeans.codebook,
                            CodebookInfo{config.kmeans.seed, out.kmeans.iters_run, out.kmeans.objective},
                            out.lexicon);
  }
  spdlog::info("cluster: {} segments into {} classes (K={}, {} Lloyd iterations)",
               out.embeddings.size(), out.lexicon.classes.size(), config.kmeans.K,
               out.kmeans.iters_run);
  return {{"n_segments", out.embeddings.size()},
          {"n_dropped", out.embeddings.dropped.size()},
          {"n_classes", out.lexicon.classes.size()},
          {"K", config.kmeans.K},
          {"kmeans_iters_run", out.kmeans.iters_run},
          {"kmeans_converged", out.kmeans.converged},
          {"objective", out.kmeans.objective},
          {"pca", {{"M", out.pca.output_dim()}, {"frames_sampled", out.pca.frames_sampled}}}};
}

json eskmeans_impl(const RunConfig& config, StageTimer& timer) {
  require_clusters(config);
  ClusterInputs inputs;
  std::vector<BoundarySet> candidates;
  if (!config.paths.candidates.empty()) {
    auto scope = time_stage(&timer, "io");
    inputs = load_cluster_inputs(config);
    candidates = read_boundaries(config.paths.candidates, inputs.manifest);
  } else {
    Manifest manifest;
    std::vector<FeatureMatrix> features;
    {
      auto scope = time_stage(&timer, "io");
      manifest = require_manifest(config.paths.manifest, "manifest");
      features = load_corpus(manifest);
    }
    candidates = detect_boundaries(features, config.segmenter.candidates, config.thread_count(), &timer);
    auto scope = time_stage(&timer, "io");
    write_atomically(out_dir(config) / run_files::kCandidates,
                     [&](const fs::path& p) { write_boundaries(candidates, p); });
    if (config.paths.cluster_manifest.empty()) {
      inputs.manifest = std::move(manifest);
      inputs.features = std::move(features);
    } else {
      inputs = load_cluster_inputs(config);
    }
  }
  {
    auto scope = time_stage(&timer, "io");
    align_to_manifest(inputs, candidates);
  }
  const ESKMeansOutputs out = run_eskmeans(inputs.manifest, inputs.features, candidates, config, &timer);
  const ESKMeansResult& r = out.result;
  {
    auto scope = time_stage(&timer, "io");
    write_atomically(out_dir(config) / run_files::kBoundaries,
                     [&](const fs::path& p) { write_boundaries(r.chosen, p); });
    const double final_objective = objective(r.embeddings.vectors, r.codebook, r.assignments);
    write_cluster_artifacts(out_dir(config), out.pca, r.codebook,
                            CodebookInfo{config.kmeans.seed, r.outer_iters, final_objective}, r.lexicon);
  }
  if (r.converged)
    spdlog::info("eskmeans: converged after {} outer iteration(s)", r.outer_iters);
  else
    spdlog::info("eskmeans: stopped after {} outer iteration(s) without converging", r.outer_iters);
  json stages = json::object();
  for (const auto& [name, value] : timer.entries()) stages[name] = value;
  return {{"outer_iters", r.outer_iters},
          {"converged", r.converged},
          {"J_per_iter", r.objective_per_iter},
          {"runtime_s", stages},
          {"n_candidates", interior_boundaries(candidates)},
          {"n_chosen", interior_boundaries(r.chosen)},
          {"n_segments", r.embeddings.size()},
          {"n_classes", r.lexicon.classes.size()},
          {"fallback_utts", r.fallback_utts}};
}

bool alignments_available(const RunConfig& config) {
  return !config.paths.word_alignments.empty() && fs::exists(config.paths.word_alignments);
}

json evaluate_impl(const RunConfig& config) {
  if (config.paths.word_alignments.empty())
    throw std::invalid_argument("paths.word_alignments is not set");
  const std::string& mpath =
      config.paths.cluster_manifest.empty() ? config.paths.manifest : config.paths.cluster_manifest;
  if (mpath.empty()) throw std::invalid_argument("paths.manifest is not set");
  const Manifest manifest = load_manifest(mpath, false);
  const ClassFile lexicon = read_classfile(out_dir(config) / run_files::kClasses);
  const auto hyp = read_boundaries(out_dir(config) / run_files::kBoundaries, manifest);
  const auto words = load_alignments(config.paths.word_alignments, Tier::kWord);
  std::vector<Alignment> phones;
  if (config.paths.phone_alignments.empty() || !fs::exists(config.paths.phone_alignments))
    spdlog::warn("no phone alignments; NED is skipped");
  else
    phones = load_alignments(config.paths.phone_alignments, Tier::kPhone);
  const EvalReport report = evaluate_run(manifest, lexicon, hyp, words, phones, config.eval_options());
  std::cout << format_report_table(report);
  return report_to_json(report);
}

template <typename Impl>
json run_command(const RunConfig& config, const std::string& name, Impl&& impl) {
  prepare_run_dir(config);
  StageTimer timer;
  json section = impl(config, timer);
  update_json_section(out_dir(config) / run_files::kReport, name, section);
  update_json_section(out_dir(config) / run_files::kTimings, name, runtime_report(timer));
  return section;
}

}  // namespace

json cmd_segment(const RunConfig& config) { return run_command(config, "segment", segment_impl); }
json cmd_cluster(const RunConfig& config) { return run_command(config, "cluster", cluster_impl); }
json cmd_eskmeans(const RunConfig& config) { return run_command(config, "eskmeans", eskmeans_impl); }

json cmd_evaluate(const RunConfig& config) {
  return run_command(config, "evaluation",
                     [](const RunConfig& c, StageTimer&) { return evaluate_impl(c); });
}

json cmd_pipeline(const RunConfig& config) {
  const bool both = config.pipeline_mode == "both";
  json report = json::object();
  std::map<std::string, double> totals;

  const auto run_mode = [&](const std::string& mode) {
    RunConfig sub = config;
    if (both) sub.paths.output_dir = (out_dir(config) / mode).string();
    prepare_run_dir(sub);
    StageTimer timer;
    json section = json::object();
    if (mode == "prominence") {
      sub.segmenter.mode = "prominence";
      section["segment"] = segment_impl(sub, timer);
      update_json_section(out_dir(sub) / run_files::kReport, "segment", section["segment"]);
      section["cluster"] = cluster_impl(sub, timer);
      update_json_section(out_dir(sub) / run_files::kReport, "cluster", section["cluster"]);
    } else {
      section["eskmeans"] = eskmeans_impl(sub, timer);
      update_json_section(out_dir(sub) / run_files::kReport, "eskmeans", section["eskmeans"]);
    }
    section["runtime"] = runtime_report(timer);
    update_json_section(out_dir(sub) / run_files::kTimings, "pipeline", section["runtime"]);
    totals[mode] = timer.total();
    std::cout << "[" << mode << "] runtime\n" << format_runtime_table(timer);

    if (alignments_available(sub)) {
      section["evaluation"] = evaluate_impl(sub);
      update_json_section(out_dir(sub) / run_files::kReport, "evaluation", section["evaluation"]);
    } else {
      spdlog::warn("[{}] word alignments missing; evaluation skipped", mode);
    }
    report[mode] = section;
  };

  if (config.pipeline_mode == "prominence" || both) run_mode("prominence");
  if (config.pipeline_mode == "eskmeans" || both) run_mode("eskmeans");

  if (both) {
    const double prom = totals["prominence"], es = totals["eskmeans"];
    report["runtime_comparison"] = {{"prominence_s", prom},
                                    {"eskmeans_s", es},
                                    {"speedup", prom > 0.0 ? es / prom : 0.0}};
    std::printf("%-12s %12s %12s %10s\n", "", "prominence", "eskmeans", "speedup");
    std::printf("%-12s %12.2f %12.2f %9.2fx\n", "runtime (s)", prom, es, prom > 0.0 ? es / prom : 0.0);
    fs::create_directories(out_dir(config));
    write_json_atomically(out_dir(config) / run_files::kConfig, config_to_json(config));
    write_json_atomically(out_dir(config) / run_files::kReport, report);
  }
  return report;
}

}  // namespace wordseg
