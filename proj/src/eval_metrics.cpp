// src/eval_metrics.cpp

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

#include "wordseg/eval_metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <stdexcept>
#include <unordered_map>

#include "wordseg/util.hpp"

namespace wordseg {

namespace {

void require_sorted(std::span<const double> xs, const char* what) {
  for (std::size_t i = 1; i < xs.size(); ++i)
    if (xs[i] < xs[i - 1]) throw std::invalid_argument(std::string(what) + " boundaries are not sorted");
}

double safe_ratio(double num, double den) { return den > 0.0 ? num / den : 0.0; }

double f_score(double p, double r) { return p + r > 0.0 ? 2.0 * p * r / (p + r) : 0.0; }

const char* pooling_name(NEDPooling p) { return p == NEDPooling::kPairs ? "pairs" : "clusters"; }
const char* matching_name(MatchStrategy s) {
  return s == MatchStrategy::kOptimal ? "optimal" : "greedy_nearest";
}

}  // namespace

int match_boundaries(std::span<const double> ref, std::span<const double> hyp, double tol_s,
                     MatchStrategy strategy) {
  require_sorted(ref, "reference");
  require_sorted(hyp, "hypothesis");
  const double tol = tol_s + kToleranceSlack;
  int hits = 0;
  if (strategy == MatchStrategy::kOptimal) {
    std::size_t j = 0;
    for (double r : ref) {
      while (j < hyp.size() && hyp[j] < r - tol) ++j;
      if (j < hyp.size() && hyp[j] <= r + tol) {
        ++hits;
        ++j;
      }
    }
    return hits;
  }
  std::vector<bool> used(hyp.size(), false);
  for (double r : ref) {
    std::size_t best = hyp.size();
    double best_gap = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < hyp.size(); ++j) {
      const double gap = std::abs(hyp[j] - r);
      if (!used[j] && gap <= tol && gap < best_gap) {
        best = j;
        best_gap = gap;
      }
    }
    if (best < hyp.size()) {
      used[best] = true;
      ++hits;
    }
  }
  return hits;
}

double r_value(double hit_rate, double over_segmentation) {
  const double r1 = std::sqrt((1.0 - hit_rate) * (1.0 - hit_rate) +
                              over_segmentation * over_segmentation);
  const double r2 = (-over_segmentation + hit_rate - 1.0) / std::sqrt(2.0);
  return 1.0 - (std::abs(r1) + std::abs(r2)) / 2.0;
}

BoundaryEvalResult score_boundaries(long n_ref, long n_hyp, long n_hit) {
  if (n_hit < 0 || n_hit > std::min(n_ref, n_hyp))
    throw std::invalid_argument("boundary hit count exceeds reference or hypothesis count");
  BoundaryEvalResult out;
  out.n_ref = n_ref;
  out.n_hyp = n_hyp;
  out.n_hit = n_hit;
  out.precision = safe_ratio(n_hit, n_hyp);
  out.recall = safe_ratio(n_hit, n_ref);
  out.f1 = f_score(out.precision, out.recall);
  if (n_hit > 0) {
    out.over_segmentation = out.recall / out.precision - 1.0;
    out.r_value = wordseg::r_value(out.recall, *out.over_segmentation);
  }
  return out;
}

long count_correct_tokens(std::span<const Token> ref, std::span<const Token> hyp, double tol_s) {
  for (std::size_t i = 1; i < hyp.size(); ++i)
    if (hyp[i].start_s < hyp[i - 1].end_s - kToleranceSlack)
      throw std::invalid_argument("hypothesis tokens overlap");
  const double tol = tol_s + kToleranceSlack;
  std::vector<bool> used(ref.size(), false);
  long correct = 0;
  for (const Token& h : hyp) {
    for (std::size_t r = 0; r < ref.size(); ++r) {
      if (used[r]) continue;
      if (std::abs(h.start_s - ref[r].start_s) <= tol && std::abs(h.end_s - ref[r].end_s) <= tol) {
        used[r] = true;
        ++correct;
        break;
      }
    }
  }
  return correct;
}

TokenEvalResult score_tokens(long n_ref, long n_hyp, long n_correct) {
  TokenEvalResult out;
  out.n_ref_tokens = n_ref;
  out.n_hyp_tokens = n_hyp;
  out.n_correct = n_correct;
  out.precision = safe_ratio(n_correct, n_hyp);
  out.recall = safe_ratio(n_correct, n_ref);
  out.f1 = f_score(out.precision, out.recall);
  return out;
}

TokenEvalResult token_f1(std::span<const Token> ref, std::span<const Token> hyp, double tol_s) {
  return score_tokens(static_cast<long>(ref.size()), static_cast<long>(hyp.size()),
                      count_correct_tokens(ref, hyp, tol_s));
}

std::vector<std::string> transcribe_segment(const ClassSegment& segment, const Alignment& phones,
                                            const OverlapRule& rule) {
  std::vector<std::string> out;
  for (const auto& p : phones.entries) {
    const double overlap = std::min(segment.offset_s, p.end_s) - std::max(segment.onset_s, p.start_s);
    if (!(overlap > 0.0)) continue;
    if (overlap > rule.min_overlap_s + kToleranceSlack ||
        overlap > rule.min_overlap_fraction * (p.end_s - p.start_s) + kToleranceSlack)
      out.push_back(p.label);
  }
  return out;
}

int levenshtein(std::span<const std::string> a, std::span<const std::string> b) {
  std::vector<int> prev(b.size() + 1), cur(b.size() + 1);
  for (std::size_t j = 0; j <= b.size(); ++j) prev[j] = static_cast<int>(j);
  for (std::size_t i = 1; i <= a.size(); ++i) {
    cur[0] = static_cast<int>(i);
    for (std::size_t j = 1; j <= b.size(); ++j) {
      const int sub = prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1);
      cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, sub});
    }
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

double normalized_edit_distance(std::span<const std::string> a, std::span<const std::string> b) {
  if (a.empty() && b.empty()) return 0.0;
  if (a.empty() || b.empty()) return 1.0;
  return static_cast<double>(levenshtein(a, b)) / static_cast<double>(std::max(a.size(), b.size()));
}

NEDResult pool_ned(std::span<const ClusterPairScores> clusters, NEDPooling pooling) {
  NEDResult out;
  double pair_sum = 0.0, cluster_mean_sum = 0.0;
  for (const auto& s : clusters) {
    if (s.pairs == 0) continue;
    pair_sum += s.sum;
    out.n_pairs += s.pairs;
    cluster_mean_sum += s.sum / static_cast<double>(s.pairs);
    ++out.n_clusters_scored;
  }
  if (out.n_pairs == 0) throw std::invalid_argument("NED: no cluster has two or more members");
  out.ned = pooling == NEDPooling::kPairs
                ? pair_sum / static_cast<double>(out.n_pairs)
                : cluster_mean_sum / static_cast<double>(out.n_clusters_scored);
  return out;
}

NEDResult ned(const ClassFile& lexicon, std::span<const Alignment> phones, const NEDOptions& options) {
  const auto index = index_alignments(phones);
  std::vector<ClusterPairScores> scores(lexicon.classes.size());
  parallel_for(lexicon.classes.size(), options.threads, [&](std::size_t c) {
    const auto& segs = lexicon.classes[c].segments;
    if (segs.size() < 2) return;
    std::vector<std::vector<std::string>> transcripts;
    transcripts.reserve(segs.size());
    for (const auto& s : segs) {
      const auto it = index.find(s.utt_id);
      if (it == index.end())
        throw std::invalid_argument("no phone alignment for utterance '" + s.utt_id + "'");
      transcripts.push_back(transcribe_segment(s, *it->second, options.overlap));
    }
    ClusterPairScores score;
    for (std::size_t i = 0; i < transcripts.size(); ++i)
      for (std::size_t j = i + 1; j < transcripts.size(); ++j) {
        score.sum += normalized_edit_distance(transcripts[i], transcripts[j]);
        ++score.pairs;
      }
    scores[c] = score;
  });

  return pool_ned(scores, options.pooling);
}

EvalReport evaluate_run(const Manifest& manifest, const ClassFile& lexicon,
                        std::span<const BoundarySet> hypothesis, std::span<const Alignment> words,
                        std::span<const Alignment> phones, const EvalOptions& options) {
  const auto word_index = index_alignments(words);
  EvalReport report;
  report.options = options;
  report.n_utterances = hypothesis.size();

  long n_ref = 0, n_hyp = 0, n_hit = 0;
  long tok_ref = 0, tok_hyp = 0, tok_correct = 0;
  double macro_p = 0.0, macro_r = 0.0;
  long macro_p_count = 0, macro_r_count = 0;

  for (const BoundarySet& b : hypothesis) {
    b.validate();
    const ManifestEntry* entry = manifest.find(b.utt_id);
    if (entry == nullptr)
      throw std::invalid_argument("hypothesis utterance '" + b.utt_id + "' not in manifest");
    const auto wit = word_index.find(b.utt_id);
    if (wit == word_index.end())
      throw std::invalid_argument("no word alignment for utterance '" + b.utt_id + "'");
    const double rate = entry->frame_rate_hz;
    const double duration = frames_to_seconds(b.total_frames, rate);

    std::vector<double> hyp_times;
    for (std::size_t i = 1; i + 1 < b.frames.size(); ++i)
      hyp_times.push_back(frames_to_seconds(b.frames[i], rate));

    std::vector<double> ref_times;
    std::vector<Token> ref_tokens, hyp_tokens;
    for (const auto& w : wit->second->entries) {
      ref_times.push_back(w.start_s);
      ref_times.push_back(w.end_s);
      ref_tokens.push_back(Token{w.start_s, w.end_s});
    }
    std::sort(ref_times.begin(), ref_times.end());
    ref_times.erase(std::unique(ref_times.begin(), ref_times.end(),
                                [](double x, double y) { return std::abs(x - y) <= 1e-6; }),
                    ref_times.end());
    std::erase_if(ref_times, [&](double t) { return t <= 1e-6 || t >= duration - 1e-6; });

    for (std::size_t i = 0; i + 1 < b.frames.size(); ++i)
      hyp_tokens.push_back(
          Token{frames_to_seconds(b.frames[i], rate), frames_to_seconds(b.frames[i + 1], rate)});

    const int hits = match_boundaries(ref_times, hyp_times, options.tol_s, options.matching);
    n_ref += static_cast<long>(ref_times.size());
    n_hyp += static_cast<long>(hyp_times.size());
    n_hit += hits;
    if (!hyp_times.empty()) {
      macro_p += static_cast<double>(hits) / static_cast<double>(hyp_times.size());
      ++macro_p_count;
    }
    if (!ref_times.empty()) {
      macro_r += static_cast<double>(hits) / static_cast<double>(ref_times.size());
      ++macro_r_count;
    }

    tok_ref += static_cast<long>(ref_tokens.size());
    tok_hyp += static_cast<long>(hyp_tokens.size());
    tok_correct += count_correct_tokens(ref_tokens, hyp_tokens, options.tol_s);
  }

  report.boundary = score_boundaries(n_ref, n_hyp, n_hit);
  report.token = score_tokens(tok_ref, tok_hyp, tok_correct);
  if (options.macro_boundary) {
    report.macro_precision = safe_ratio(macro_p, static_cast<double>(macro_p_count));
    report.macro_recall = safe_ratio(macro_r, static_cast<double>(macro_r_count));
  }
  if (!phones.empty()) {
    NEDOptions ned_options = options.ned;
    ned_options.threads = options.threads;
    report.ned = ned(lexicon, phones, ned_options);
  }
  return report;
}

nlohmann::json report_to_json(const EvalReport& report) {
  const auto& b = report.boundary;
  const auto opt = [](const std::optional<double>& v, double scale) {
    return v ? nlohmann::json(*v * scale) : nlohmann::json(nullptr);
  };
  nlohmann::json boundary{{"n_ref", b.n_ref},
                          {"n_hyp", b.n_hyp},
                          {"n_hit", b.n_hit},
                          {"precision", b.precision * 100.0},
                          {"recall", b.recall * 100.0},
                          {"f1", b.f1 * 100.0},
                          {"os", opt(b.over_segmentation, 100.0)},
                          {"os_undefined", b.os_undefined()},
                          {"r_value", opt(b.r_value, 100.0)}};
  if (report.macro_precision) {
    boundary["macro_precision"] = *report.macro_precision * 100.0;
    boundary["macro_recall"] = *report.macro_recall * 100.0;
  }
  const auto& t = report.token;
  nlohmann::json j{
      {"ned", report.ned ? nlohmann::json(report.ned->ned * 100.0) : nlohmann::json(nullptr)},
      {"r_value", opt(b.r_value, 100.0)},
      {"token_f1", t.f1 * 100.0},
      {"boundary", boundary},
      {"token",
       {{"n_ref", t.n_ref_tokens},
        {"n_hyp", t.n_hyp_tokens},
        {"n_correct", t.n_correct},
        {"precision", t.precision * 100.0},
        {"recall", t.recall * 100.0},
        {"f1", t.f1 * 100.0}}},
      {"n_pairs", report.ned ? report.ned->n_pairs : 0},
      {"n_clusters_scored", report.ned ? report.ned->n_clusters_scored : 0},
      {"n_utterances", report.n_utterances},
      {"conventions",
       {{"tol_s", report.options.tol_s},
        {"matching", matching_name(report.options.matching)},
        {"ned_pooling", pooling_name(report.options.ned.pooling)},
        {"overlap_min_s", report.options.ned.overlap.min_overlap_s},
        {"overlap_min_fraction", report.options.ned.overlap.min_overlap_fraction},
        {"utterance_edges_scored", false},
        {"boundary_pooling", "corpus"}}}};
  return j;
}

std::string format_report_table(const EvalReport& report) {
  const auto cell = [](std::optional<double> v) {
    char buf[32];
    if (v)
      std::snprintf(buf, sizeof(buf), "%9.1f", *v * 100.0);
    else
      std::snprintf(buf, sizeof(buf), "%9s", "n/a");
    return std::string(buf);
  };
  const auto& b = report.boundary;
  std::string out;
  out += "      NED    R-val.  Token F1\n";
  out += cell(report.ned ? std::optional<double>(report.ned->ned) : std::nullopt) +
         cell(b.r_value) + cell(report.token.f1) + "\n";
  char line[160];
  std::snprintf(line, sizeof(line),
                "boundaries: P %.1f  R %.1f  F %.1f  OS %s  (hits %ld / ref %ld / hyp %ld)\n",
                b.precision * 100.0, b.recall * 100.0, b.f1 * 100.0,
                b.over_segmentation ? std::to_string(*b.over_segmentation * 100.0).c_str() : "undefined",
                b.n_hit, b.n_ref, b.n_hyp);
  out += line;
  if (report.ned) {
    std::snprintf(line, sizeof(line), "NED over %ld pairs in %ld clusters (%s pooling)\n",
                  report.ned->n_pairs, report.ned->n_clusters_scored,
                  pooling_name(report.options.ned.pooling));
    out += line;
  }
  return out;
}

}  // namespace wordseg
