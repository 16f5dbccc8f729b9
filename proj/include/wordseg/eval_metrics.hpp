// include/wordseg/eval_metrics.hpp

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

#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "wordseg/corpus_io.hpp"
#include "wordseg/types.hpp"

namespace wordseg {

// Absolute slack added to every tolerance comparison so that decimal
// tolerances survive binary rounding (1.02 - 1.00 > 0.02 in doubles).
inline constexpr double kToleranceSlack = 1e-9;

enum class MatchStrategy {
  // Maximum one-to-one matching: refs in order, each takes the earliest
  // unmatched hyp inside its window.
  kOptimal,
  // Each ref in order takes the nearest unmatched hyp within tolerance. Not
  // always maximal; kept for comparison.
  kGreedyNearest,
};

// Number of one-to-one matches between sorted boundary times within tol.
// Utterance edges must already be removed. Throws on unsorted input.
int match_boundaries(std::span<const double> ref, std::span<const double> hyp, double tol_s = 0.02,
                     MatchStrategy strategy = MatchStrategy::kOptimal);

// R = 1 - (|r1| + |r2|) / 2 with r1 = sqrt((1-HR)^2 + OS^2) and
// r2 = (-OS + HR - 1) / sqrt(2). Fractions, not percentages.
double r_value(double hit_rate, double over_segmentation);

struct BoundaryEvalResult {
  long n_ref = 0;
  long n_hyp = 0;
  long n_hit = 0;
  double precision = 0.0;
  double recall = 0.0;  // = hit rate
  double f1 = 0.0;
  // Unset when OS = recall/precision - 1 is undefined (no hits); the
  // result is flagged rather than assigned a value.
  std::optional<double> over_segmentation;
  std::optional<double> r_value;

  bool os_undefined() const { return !over_segmentation.has_value(); }
};

BoundaryEvalResult score_boundaries(long n_ref, long n_hyp, long n_hit);

struct Token {
  double start_s = 0.0;
  double end_s = 0.0;
};

struct TokenEvalResult {
  long n_ref_tokens = 0;
  long n_hyp_tokens = 0;
  long n_correct = 0;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

// Correct hyp tokens of one utterance: both ends within tol of an unused ref
// token, scanned in time order. Throws if hyp tokens overlap.
long count_correct_tokens(std::span<const Token> ref, std::span<const Token> hyp, double tol_s = 0.02);
TokenEvalResult score_tokens(long n_ref, long n_hyp, long n_correct);
TokenEvalResult token_f1(std::span<const Token> ref, std::span<const Token> hyp, double tol_s = 0.02);

struct OverlapRule {
  double min_overlap_s = 0.03;
  double min_overlap_fraction = 0.5;
};

// Labels of the phones overlapping the segment by more than min_overlap_s or
// by more than min_overlap_fraction of the phone's own duration.
std::vector<std::string> transcribe_segment(const ClassSegment& segment, const Alignment& phones,
                                            const OverlapRule& rule = {});

// Unit-cost edit distance over whole labels.
int levenshtein(std::span<const std::string> a, std::span<const std::string> b);

// Pairwise normalized distance: levenshtein / max length, 0 for two empty
// sequences and 1 when exactly one is empty.
double normalized_edit_distance(std::span<const std::string> a, std::span<const std::string> b);

enum class NEDPooling {
  kPairs,     // mean over all within-cluster pairs of the lexicon
  kClusters,  // mean over clusters of each cluster's mean pair distance
};

struct NEDResult {
  double ned = 0.0;
  long n_pairs = 0;
  long n_clusters_scored = 0;
};

struct NEDOptions {
  OverlapRule overlap;
  NEDPooling pooling = NEDPooling::kPairs;
  int threads = 1;
};

// Sum of pair distances and number of pairs within one cluster.
struct ClusterPairScores {
  double sum = 0.0;
  long pairs = 0;
};

// Pools per-cluster pair scores; clusters without pairs are skipped. Throws
// if no cluster has a pair.
NEDResult pool_ned(std::span<const ClusterPairScores> clusters, NEDPooling pooling);

// Throws if no cluster has two members or an utterance has no phone
// alignment.
NEDResult ned(const ClassFile& lexicon, std::span<const Alignment> phones,
              const NEDOptions& options = {});

struct EvalOptions {
  double tol_s = 0.02;
  NEDOptions ned;
  MatchStrategy matching = MatchStrategy::kOptimal;
  // Also report per-utterance (macro) averages of boundary scores.
  bool macro_boundary = false;
  int threads = 1;
};

struct EvalReport {
  std::optional<NEDResult> ned;  // unset when phone alignments are missing
  BoundaryEvalResult boundary;
  TokenEvalResult token;
  std::optional<double> macro_precision;
  std::optional<double> macro_recall;
  std::size_t n_utterances = 0;
  EvalOptions options;
};

// Boundary and token counts are pooled over the corpus before scores are
// computed. Hypothesis tokens are the consecutive boundary pairs; reference
// boundaries are the word starts/ends, minus the utterance edges 0 and
// T / frame_rate. Every hypothesis utterance needs a word alignment.
EvalReport evaluate_run(const Manifest& manifest, const ClassFile& lexicon,
                        std::span<const BoundarySet> hypothesis, std::span<const Alignment> words,
                        std::span<const Alignment> phones, const EvalOptions& options = {});

// Percentages, as in the usual result tables.
nlohmann::json report_to_json(const EvalReport& report);
std::string format_report_table(const EvalReport& report);

}  // namespace wordseg
