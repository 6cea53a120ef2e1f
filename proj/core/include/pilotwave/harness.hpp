// Copyright 2026 The pilotwave Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef PILOTWAVE_HARNESS_HPP_
#define PILOTWAVE_HARNESS_HPP_

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "pilotwave/config.hpp"
#include "pilotwave/io.hpp"

namespace pilotwave {

struct CheckResult {
  std::string name;
  bool pass = false;
  double value = 0.0;
  /// Human-readable bound, e.g. "< 1e-8" or "in [-0.65, -0.35]".
  std::string bound;
};

struct RunReport {
  std::string kind;
  std::uint64_t config_hash = 0;
  std::uint64_t seed = 0;
  unsigned workers = 1;
  double wall_seconds = 0.0;
  std::vector<CheckResult> checks;
  std::vector<std::pair<std::string, double>> metrics;
  std::vector<std::string> warnings;
  /// Emitted files, relative to the output directory (report.json last).
  std::vector<std::string> files;

  bool all_passed() const;
  const CheckResult* check(const std::string& name) const;
  std::optional<double> metric(const std::string& name) const;
};

struct RunOptions {
  unsigned workers = 1;
};

struct RunOutput {
  RunReport report;
  std::vector<Artifact> artifacts;
};

/// Runs the pipeline for cfg.kind. Module errors are rethrown with the same
/// type, prefixed with the run kind.
RunOutput run_experiment(const ExperimentConfig& cfg, const RunOptions& options = {});

/// Writes every artifact and then report.json into `dir` (created if
/// missing) and records the file names in the report.
std::vector<std::filesystem::path> write_outputs(RunReport& report,
                                                 std::span<const Artifact> artifacts,
                                                 const std::filesystem::path& dir);

/// report.json text.
std::string report_json(const RunReport& report);

}  // namespace pilotwave

#endif  // PILOTWAVE_HARNESS_HPP_
