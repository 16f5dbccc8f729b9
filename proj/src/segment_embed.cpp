// src/segment_embed.cpp

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

#include "wordseg/segment_embed.hpp"

#include <cmath>
#include <stdexcept>

#include <Eigen/Eigenvalues>
#include <json.hpp>
#include <spdlog/spdlog.h>

#include "wordseg/corpus_io.hpp"
#include "wordseg/util.hpp"

namespace wordseg {

namespace fs = std::filesystem;

namespace {

// Eigenvalues at or below this fraction of the largest one count as zero
// when checking that the sample spans M dimensions.
constexpr double kRankTolerance = 1e-10;

}  // namespace

PCAModel fit_pca(const RowMatrix& frames, int target_dim) {
  const Eigen::Index n = frames.rows();
  const Eigen::Index dim = frames.cols();
  if (target_dim < 1) throw std::invalid_argument("PCA target dimension must be >= 1");
  if (target_dim > dim)
    throw std::invalid_argument("PCA target dimension " + std::to_string(target_dim) +
                                " exceeds feature dimension " + std::to_string(dim));
  if (n <= target_dim)
    throw std::invalid_argument("PCA needs more than M=" + std::to_string(target_dim) +
                                " frames, got " + std::to_string(n));
  if (!frames.allFinite()) throw std::invalid_argument("PCA input contains non-finite values");

  const Eigen::VectorXd mean = frames.colwise().mean().transpose();
  const RowMatrix centered = frames.rowwise() - mean.transpose();
  const Eigen::MatrixXd cov = (centered.transpose() * centered) / static_cast<double>(n - 1);

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(cov);
  if (solver.info() != Eigen::Success) throw std::runtime_error("PCA eigendecomposition failed");
  // Ascending order from Eigen; take the last M columns in reverse.
  const Eigen::VectorXd& evals = solver.eigenvalues();
  const Eigen::MatrixXd& evecs = solver.eigenvectors();
  const double largest = evals[dim - 1];
  const double mth = evals[dim - target_dim];
  if (!(largest > 0.0) || mth <= kRankTolerance * largest)
    throw std::invalid_argument("PCA input has rank < M=" + std::to_string(target_dim) +
                                "; more (or more varied) frames are needed");

  PCAModel model;
  model.mean = mean.cast<float>();
  model.components.resize(dim, target_dim);
  model.explained_variance.resize(target_dim);
  for (int m = 0; m < target_dim; ++m) {
    Eigen::VectorXd v = evecs.col(dim - 1 - m);
    Eigen::Index arg = 0;
    v.cwiseAbs().maxCoeff(&arg);
    if (v[arg] < 0.0) v = -v;
    model.components.col(m) = v.cast<float>();
    model.explained_variance[m] = evals[dim - 1 - m];
  }
  model.frames_sampled = n;
  return model;
}

PCAModel fit_pca_corpus(std::span<const FeatureMatrix> corpus, const PCAOptions& options) {
  if (corpus.empty()) throw std::invalid_argument("cannot fit PCA on an empty corpus");
  if (options.sample_cap < 1) throw std::invalid_argument("PCA sample cap must be >= 1");
  const int dim = corpus.front().dim();
  std::int64_t total = 0;
  for (const auto& fm : corpus) {
    if (fm.dim() != dim) throw std::invalid_argument("feature dimension mismatch in corpus");
    total += fm.num_frames();
  }
  const std::int64_t wanted = std::min(total, options.sample_cap);

  // Sequential selection sampling: every subset of size `wanted` is equally
  // likely and the sample keeps corpus order.
  Rng rng(options.seed);
  RowMatrix sample(wanted, dim);
  std::int64_t taken = 0, seen = 0;
  for (const auto& fm : corpus) {
    for (int t = 0; t < fm.num_frames(); ++t, ++seen) {
      const std::int64_t remaining = total - seen;
      const std::int64_t needed = wanted - taken;
      if (needed == 0) break;
      if (needed == remaining ||
          uniform01(rng) * static_cast<double>(remaining) < static_cast<double>(needed)) {
        sample.row(taken++) = fm.data.row(t).cast<double>();
      }
    }
  }
  PCAModel model = fit_pca(sample, options.target_dim);
  model.seed = options.seed;
  return model;
}

FeatureMatrix apply_pca(const PCAModel& model, const FeatureMatrix& features) {
  if (features.dim() != model.input_dim())
    throw std::invalid_argument("PCA expects D=" + std::to_string(model.input_dim()) + ", got " +
                                std::to_string(features.dim()) + " for '" + features.utt_id + "'");
  FeatureMatrix out;
  out.utt_id = features.utt_id;
  out.frame_rate_hz = features.frame_rate_hz;
  const RowMatrix centered =
      features.data.cast<double>().rowwise() - model.mean.cast<double>().transpose();
  out.data = (centered * model.components.cast<double>()).cast<float>();
  return out;
}

std::vector<FeatureMatrix> apply_pca(const PCAModel& model, std::span<const FeatureMatrix> corpus,
                                     int threads) {
  std::vector<FeatureMatrix> out(corpus.size());
  parallel_for(corpus.size(), threads, [&](std::size_t i) { out[i] = apply_pca(model, corpus[i]); });
  return out;
}

void save_pca(const PCAModel& model, const fs::path& prefix) {
  FeatureMatrix mean;
  mean.frame_rate_hz = 1.0f;
  mean.data = model.mean.transpose();
  save_features(mean, prefix.string() + "_mean.ftpk");
  FeatureMatrix components;
  components.frame_rate_hz = 1.0f;
  components.data = model.components;
  save_features(components, prefix.string() + "_components.ftpk");
  nlohmann::json j{{"M", model.output_dim()},
                   {"D", model.input_dim()},
                   {"frames_sampled", model.frames_sampled},
                   {"seed", model.seed},
                   {"explained_variance", std::vector<double>(model.explained_variance.data(),
                                                              model.explained_variance.data() +
                                                                  model.explained_variance.size())}};
  write_text_file(prefix.string() + ".json", j.dump(2) + "\n");
}

PCAModel load_pca(const fs::path& prefix) {
  const FeatureMatrix mean = load_features(prefix.string() + "_mean.ftpk");
  const FeatureMatrix components = load_features(prefix.string() + "_components.ftpk");
  nlohmann::json j = nlohmann::json::parse(read_text_file(prefix.string() + ".json"));
  if (mean.num_frames() != 1 || mean.dim() != components.num_frames() ||
      components.dim() != j.at("M").get<int>())
    throw FormatError("inconsistent PCA model files at " + prefix.string());
  PCAModel model;
  model.mean = mean.data.row(0).transpose();
  model.components = components.data;
  model.frames_sampled = j.at("frames_sampled").get<std::int64_t>();
  model.seed = j.at("seed").get<std::uint64_t>();
  const auto ev = j.value("explained_variance", std::vector<double>{});
  model.explained_variance = Eigen::Map<const Eigen::VectorXd>(ev.data(), ev.size());
  return model;
}

Eigen::VectorXd pooled_embedding(const FeatureMatrix& projected, int start_frame, int end_frame) {
  if (!(0 <= start_frame && start_frame < end_frame && end_frame <= projected.num_frames()))
    throw std::out_of_range("segment [" + std::to_string(start_frame) + ", " +
                            std::to_string(end_frame) + ") outside '" + projected.utt_id + "'");
  const auto rows = projected.data.middleRows(start_frame, end_frame - start_frame).cast<double>();
  Eigen::VectorXd z = rows.colwise().sum().transpose() / static_cast<double>(end_frame - start_frame);
  const double norm = z.norm();
  const double scale = rows.rowwise().norm().mean();
  if (!(scale > 0.0) || !(norm > 1e-9 * scale))
    throw DegenerateSegment("zero-norm average for segment [" + std::to_string(start_frame) +
                            ", " + std::to_string(end_frame) + ") of '" + projected.utt_id + "'");
  return z / norm;
}

SegmentEmbedding embed_segment(const FeatureMatrix& projected, const SegmentRef& ref) {
  return SegmentEmbedding{ref, pooled_embedding(projected, ref.start_frame, ref.end_frame)};
}

EmbeddingSet embed_all(std::span<const FeatureMatrix> projected,
                       std::span<const BoundarySet> boundaries, int threads) {
  if (projected.size() != boundaries.size())
    throw std::invalid_argument("embed_all: features and boundary sets differ in length");
  std::vector<std::vector<SegmentEmbedding>> per_utt(projected.size());
  std::vector<std::vector<SegmentRef>> dropped(projected.size());
  parallel_for(projected.size(), threads, [&](std::size_t u) {
    const BoundarySet& b = boundaries[u];
    if (b.utt_id != projected[u].utt_id || b.total_frames != projected[u].num_frames())
      throw std::invalid_argument("boundary set '" + b.utt_id + "' does not match features '" +
                                  projected[u].utt_id + "'");
    for (int s = 0; s < b.num_segments(); ++s) {
      SegmentRef ref{b.utt_id, b.frames[s], b.frames[s + 1]};
      try {
        per_utt[u].push_back(embed_segment(projected[u], ref));
      } catch (const DegenerateSegment&) {
        dropped[u].push_back(std::move(ref));
      }
    }
  });

  EmbeddingSet out;
  std::size_t count = 0;
  for (const auto& v : per_utt) count += v.size();
  const Eigen::Index dim = projected.empty() ? 0 : projected.front().dim();
  out.vectors.resize(static_cast<Eigen::Index>(count), dim);
  out.refs.reserve(count);
  for (std::size_t u = 0; u < per_utt.size(); ++u) {
    for (auto& e : per_utt[u]) {
      out.vectors.row(static_cast<Eigen::Index>(out.refs.size())) = e.z.transpose();
      out.refs.push_back(std::move(e.ref));
    }
    for (auto& d : dropped[u]) {
      spdlog::warn("dropping degenerate segment [{}, {}) of '{}'", d.start_frame, d.end_frame,
                   d.utt_id);
      out.dropped.push_back(std::move(d));
    }
  }
  return out;
}

EmbeddingSet embed_all(std::span<const FeatureMatrix> features,
                       std::span<const BoundarySet> boundaries, const PCAModel& model,
                       int threads) {
  const std::vector<FeatureMatrix> projected = apply_pca(model, features, threads);
  return embed_all(projected, boundaries, threads);
}

}  // namespace wordseg
