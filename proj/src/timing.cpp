// src/timing.cpp

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

#include "wordseg/timing.hpp"

#include <algorithm>
#include <cstdio>

namespace wordseg {

void StageTimer::add(const std::string& stage, double seconds) {
  for (auto& [name, value] : stages_) {
    if (name == stage) {
      value += seconds;
      return;
    }
  }
  stages_.emplace_back(stage, seconds);
}

double StageTimer::get(const std::string& stage) const {
  for (const auto& [name, value] : stages_)
    if (name == stage) return value;
  return 0.0;
}

double StageTimer::total() const {
  double sum = 0.0;
  for (const auto& [name, value] : entries()) sum += value;
  return sum;
}

void StageTimer::merge(const StageTimer& other) {
  for (const auto& [name, value] : other.stages_) add(name, value);
}

std::vector<std::pair<std::string, double>> StageTimer::entries() const {
  std::vector<std::pair<std::string, double>> out;
  for (const auto& name : pipeline_stages()) out.emplace_back(name, get(name));
  for (const auto& entry : stages_) {
    const auto& std_stages = pipeline_stages();
    if (std::find(std_stages.begin(), std_stages.end(), entry.first) == std_stages.end())
      out.push_back(entry);
  }
  return out;
}

nlohmann::json runtime_report(const StageTimer& timer) {
  nlohmann::json stages = nlohmann::json::object();
  for (const auto& [name, value] : timer.entries()) stages[name] = value;
  return {{"stages", stages}, {"total_s", timer.total()}};
}

std::string format_runtime_table(const StageTimer& timer) {
  std::string out;
  char line[128];
  for (const auto& [name, value] : timer.entries()) {
    std::snprintf(line, sizeof(line), "%-20s %12.3f s\n", name.c_str(), value);
    out += line;
  }
  std::snprintf(line, sizeof(line), "%-20s %12.3f s\n", "total", timer.total());
  out += line;
  return out;
}

}  // namespace wordseg
