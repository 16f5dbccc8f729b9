// tools/wordseg_main.cpp

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

#include <cstdlib>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <spdlog/cfg/helpers.h>
#include <spdlog/spdlog.h>

#include "wordseg/corpus_io.hpp"
#include "wordseg/pipeline.hpp"

namespace {

void init_logging() {
  spdlog::set_pattern("[%H:%M:%S] [%l] %v");
  spdlog::set_level(spdlog::level::info);
  if (const char* level = std::getenv("WORDSEG_LOG")) spdlog::cfg::helpers::load_levels(level);
}

}  // namespace

int main(int argc, char** argv) {
  init_logging();

  CLI::App app{
      "wordseg: unsupervised word segmentation and lexicon discovery from speech features.\n"
      "Log level via WORDSEG_LOG (trace, debug, info, warn, error)."};
  app.require_subcommand(1);

  std::string config_path;
  std::vector<std::string> overrides;
  int threads = -1;
  std::string output_dir;
  std::string mode;
  app.add_option("--config", config_path, "JSON run configuration");
  app.add_option("--set", overrides, "Override a config value, e.g. kmeans.K=500")
      ->type_name("KEY=VAL");
  app.add_option("--threads", threads, "Worker threads (0 = all cores)");
  app.add_option("--output", output_dir, "Run directory (paths.output_dir)");
  app.add_option("--mode", mode, "Pipeline mode")
      ->check(CLI::IsMember({"prominence", "eskmeans", "both"}));

  auto* segment = app.add_subcommand("segment", "Detect prominence boundaries -> boundaries.tsv");
  auto* cluster = app.add_subcommand("cluster", "PCA + pooled embeddings + k-means -> classes.txt");
  auto* eskmeans = app.add_subcommand("eskmeans", "ES-KMeans+ over high-recall candidates");
  auto* evaluate = app.add_subcommand("evaluate", "Score a run directory against alignments");
  auto* pipeline = app.add_subcommand("pipeline", "Segment, cluster and evaluate (timed)");
  auto* defaults = app.add_subcommand("defaults", "Print the default configuration");
  for (auto* sub : {segment, cluster, eskmeans, evaluate, pipeline, defaults})
    sub->fallthrough();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*defaults) {
      std::cout << wordseg::default_config_json().dump(2) << "\n";
      return 0;
    }
    nlohmann::json cfg = nlohmann::json::object();
    if (!config_path.empty()) cfg = nlohmann::json::parse(wordseg::read_text_file(config_path));
    for (const auto& o : overrides) wordseg::apply_override(cfg, o);
    if (threads >= 0) cfg["threads"] = threads;
    if (!output_dir.empty()) cfg["paths"]["output_dir"] = output_dir;
    if (!mode.empty()) cfg["pipeline"]["mode"] = mode;
    const wordseg::RunConfig config = wordseg::resolve_config(cfg);

    nlohmann::json result;
    if (*segment) result = wordseg::cmd_segment(config);
    else if (*cluster) result = wordseg::cmd_cluster(config);
    else if (*eskmeans) result = wordseg::cmd_eskmeans(config);
    else if (*evaluate) result = wordseg::cmd_evaluate(config);
    else if (*pipeline) result = wordseg::cmd_pipeline(config);
    spdlog::debug("result: {}", result.dump());
  } catch (const std::exception& e) {
    spdlog::error("{}", e.what());
    return 1;
  }
  return 0;
}
