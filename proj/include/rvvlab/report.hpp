// Copyright 2026 The rvvlab Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Machine-readable run reports.
//
//   {
//     "metadata": {"tool", "version", "seed", "config": {key: value, ...}},
//     "gemm": [...], "instruction_counts": {...},
//     "miss_reports": {...}, "residuals": [...],
//     "passed": bool
//   }

#pragma once

#include <fstream>
#include <nlohmann/json.hpp>
#include <string>

#include "rvvlab/cachesim.hpp"
#include "rvvlab/config.hpp"
#include "rvvlab/vsim.hpp"

namespace rvvlab {

inline constexpr std::string_view kToolName = "rvvlab";
inline constexpr std::string_view kToolVersion = "0.1.0";

inline nlohmann::ordered_json to_json(const SimStats& s) {
  return {{"vector_load", s.vector_load},   {"vector_store", s.vector_store},
          {"vector_fma", s.vector_fma},     {"vector_other", s.vector_other},
          {"vsetvl", s.vsetvl},             {"scalar", s.scalar},
          {"total_dynamic", s.total_dynamic()}, {"vector_ops", s.vector_ops()},
          {"bytes_loaded", s.bytes_loaded}, {"bytes_stored", s.bytes_stored}};
}

inline nlohmann::ordered_json to_json(const MissReport& r) {
  auto levels = nlohmann::ordered_json::array();
  for (const auto& l : r.levels)
    levels.push_back({{"name", l.name},
                      {"accesses", l.accesses},
                      {"hits", l.hits},
                      {"misses", l.misses},
                      {"miss_rate", l.miss_rate()},
                      {"writebacks", l.writebacks}});
  return {{"trace_events", r.trace_events}, {"levels", std::move(levels)}};
}

class Report {
 public:
  explicit Report(const RunConfig& config) {
    auto cfg = nlohmann::ordered_json::object();
    for (const auto& [k, v] : config.entries()) cfg[k] = v;
    doc_["metadata"] = {{"tool", kToolName},
                        {"version", kToolVersion},
                        {"seed", config.seed},
                        {"config", std::move(cfg)}};
  }

  void add_gemm(nlohmann::ordered_json entry) { append("gemm", std::move(entry)); }
  void add_residual(nlohmann::ordered_json entry) { append("residuals", std::move(entry)); }
  void set_instruction_counts(nlohmann::ordered_json counts) {
    doc_["instruction_counts"] = std::move(counts);
  }
  void add_miss_report(const std::string& name, const MissReport& r) {
    doc_["miss_reports"][name] = to_json(r);
  }
  void set(const std::string& key, nlohmann::ordered_json value) { doc_[key] = std::move(value); }

  /// Records a verification outcome; the report passes iff every one did.
  void verify(bool ok) { passed_ = passed_ && ok; }
  bool passed() const { return passed_; }

  nlohmann::ordered_json json() const {
    auto out = doc_;
    out["passed"] = passed_;
    return out;
  }

  void write(const std::string& path) const {
    std::ofstream os(path);
    if (!os) throw Error("cannot open '" + path + "' for writing");
    os << json().dump(2) << '\n';
  }

 private:
  void append(const std::string& key, nlohmann::ordered_json entry) {
    if (!doc_.contains(key)) doc_[key] = nlohmann::ordered_json::array();
    doc_[key].push_back(std::move(entry));
  }

  nlohmann::ordered_json doc_;
  bool passed_ = true;
};

}  // namespace rvvlab
