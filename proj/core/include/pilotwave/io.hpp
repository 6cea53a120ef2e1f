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

#ifndef PILOTWAVE_IO_HPP_
#define PILOTWAVE_IO_HPP_

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "pilotwave/equilibrium.hpp"
#include "pilotwave/measurement.hpp"
#include "pilotwave/propagator.hpp"
#include "pilotwave/trajectory.hpp"

namespace pilotwave {

/// Run identity stamped on every data file.
struct ArtifactMeta {
  std::uint64_t config_hash = 0;
  std::uint64_t seed = 0;
  std::string kind;
};

/// One data file, rendered in memory. Writing is a byte copy, so identical
/// runs give identical files.
struct Artifact {
  std::string filename;
  std::string content;
};

struct Column {
  std::string name;
  std::string unit;
};

/// Plain columnar text: `#` metadata lines, then whitespace-separated rows
/// printed with 17 significant digits.
class TableWriter {
 public:
  TableWriter(const ArtifactMeta& meta, std::string title, std::vector<Column> columns);

  /// Extra `# key=value` header line (before the column line).
  void note(const std::string& key, const std::string& value);
  void row(std::span<const double> values);
  void row(std::initializer_list<double> values) { row(std::span<const double>(values.begin(), values.size())); }
  /// Free-form `#` line inside the body (block separators).
  void comment(const std::string& text);

  Artifact finish(std::string filename);

 private:
  void flush_header();

  std::string header_;
  std::string body_;
  std::size_t columns_;
  bool header_done_ = false;
  std::vector<Column> column_list_;
};

std::string format_number(double v);

/// Wavefunction dumps, one `# t=` block per snapshot.
Artifact snapshot_artifact(const ArtifactMeta& meta, std::span<const Snapshot> snapshots,
                           std::string filename = "snapshots.dat");
Artifact trajectory_artifact(const ArtifactMeta& meta, const TrajectoryRecord& record,
                             std::string filename = "trajectory.dat");
/// Columns run_index outcome_index outcome_value x_end y_end epsilon.
Artifact outcome_log_artifact(const ArtifactMeta& meta, std::span<const OutcomeRecord> log,
                              std::string filename = "outcomes.dat");
Artifact convergence_artifact(const ArtifactMeta& meta, std::span<const ConvergencePoint> curve,
                              std::string filename = "convergence.dat");
/// Ensemble positions at start and end (NaN for aborted members).
Artifact ensemble_artifact(const ArtifactMeta& meta, const Ensemble& initial,
                           std::span<const double> final_positions,
                           std::string filename = "ensemble.dat");
Artifact f_table_artifact(const ArtifactMeta& meta, const FSummary& summary,
                          std::string filename = "f_table.dat");
/// Accumulated log-growth against time.
Artifact lyapunov_artifact(const ArtifactMeta& meta, const LyapunovEstimate& estimate,
                           std::string filename = "lyapunov.dat");

/// Writes `content` to `path` (IoError on failure).
void write_text_file(const std::filesystem::path& path, const std::string& content);

}  // namespace pilotwave

#endif  // PILOTWAVE_IO_HPP_
