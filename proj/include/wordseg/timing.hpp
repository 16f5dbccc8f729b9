// include/wordseg/timing.hpp

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

#include <chrono>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

namespace wordseg {

// Pipeline stages in report order.
inline const std::vector<std::string>& pipeline_stages() {
  static const std::vector<std::string> stages = {"io",        "boundary_detection", "pca",
                                                  "embedding", "kmeans",             "dp"};
  return stages;
}

/// Accumulates wall-clock seconds per named stage.
class StageTimer {
 public:
  class Scope {
   public:
    Scope(StageTimer* timer, std::string stage)
        : timer_(timer), stage_(std::move(stage)), start_(std::chrono::steady_clock::now()) {}
    ~Scope() {
      if (timer_ != nullptr) timer_->add(stage_, elapsed());
    }
    Scope(const Scope&) = delete;
    Scope& operator=(const Scope&) = delete;

   private:
    double elapsed() const {
      return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    }
    StageTimer* timer_;
    std::string stage_;
    std::chrono::steady_clock::time_point start_;
  };

  void add(const std::string& stage, double seconds);
  double get(const std::string& stage) const;
  double total() const;
  void merge(const StageTimer& other);

  // Standard stages first (zero when never timed), then any others.
  std::vector<std::pair<std::string, double>> entries() const;

 private:
  std::vector<std::pair<std::string, double>> stages_;
};

// Null-safe scope helper: timing is skipped when timer is null.
inline StageTimer::Scope time_stage(StageTimer* timer, std::string stage) {
  return StageTimer::Scope(timer, std::move(stage));
}

// {"stages": {name: seconds, ...}, "total_s": seconds}
nlohmann::json runtime_report(const StageTimer& timer);
std::string format_runtime_table(const StageTimer& timer);

}  // namespace wordseg
