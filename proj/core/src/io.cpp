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

#include "pilotwave/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>

#include "pilotwave/config.hpp"
#include "pilotwave/error.hpp"

namespace pilotwave {

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

TableWriter::TableWriter(const ArtifactMeta& meta, std::string title, std::vector<Column> columns)
    : columns_(columns.size()), column_list_(std::move(columns)) {
  header_ = "# pilotwave " + title + "\n";
  header_ += "# config_hash=" + hash_hex(meta.config_hash) + "\n";
  header_ += "# seed=" + std::to_string(meta.seed) + "\n";
  if (!meta.kind.empty()) header_ += "# kind=" + meta.kind + "\n";
}

void TableWriter::note(const std::string& key, const std::string& value) {
  if (header_done_) throw ValidationError("table: header notes must precede rows");
  header_ += "# " + key + "=" + value + "\n";
}

void TableWriter::flush_header() {
  if (header_done_) return;
  header_ += "# columns:";
  for (const auto& c : column_list_) header_ += " " + c.name;
  header_ += "\n# units:";
  for (const auto& c : column_list_) header_ += " " + (c.unit.empty() ? "1" : c.unit);
  header_ += "\n";
  header_done_ = true;
}

void TableWriter::row(std::span<const double> values) {
  if (values.size() != columns_) throw ValidationError("table: row width does not match columns");
  flush_header();
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) body_ += ' ';
    body_ += format_number(values[i]);
  }
  body_ += '\n';
}

void TableWriter::comment(const std::string& text) {
  flush_header();
  body_ += "# " + text + "\n";
}

Artifact TableWriter::finish(std::string filename) {
  flush_header();
  return Artifact{std::move(filename), header_ + body_};
}

Artifact snapshot_artifact(const ArtifactMeta& meta, std::span<const Snapshot> snapshots,
                           std::string filename) {
  const bool two_d = !snapshots.empty() && snapshots.front().wf.is_2d();
  std::vector<Column> cols{{"x", "length"}};
  if (two_d) cols.push_back({"y", "length"});
  cols.insert(cols.end(), {{"re", "length^-d/2"}, {"im", "length^-d/2"}, {"density", "length^-d"}});
  TableWriter w(meta, "wavefunction snapshots", std::move(cols));
  w.note("snapshots", std::to_string(snapshots.size()));
  for (const auto& s : snapshots) {
    w.comment("t=" + format_number(s.t));
    const auto& wf = s.wf;
    for (std::size_t ix = 0; ix < wf.nx(); ++ix) {
      for (std::size_t iy = 0; iy < wf.ny(); ++iy) {
        const complex a = wf.at(ix, iy);
        const double d = std::norm(a);
        if (two_d) {
          w.row({wf.gx().point(ix), wf.gy().point(iy), a.real(), a.imag(), d});
        } else {
          w.row({wf.gx().point(ix), a.real(), a.imag(), d});
        }
      }
    }
  }
  return w.finish(std::move(filename));
}

Artifact trajectory_artifact(const ArtifactMeta& meta, const TrajectoryRecord& record,
                             std::string filename) {
  const bool two_d = record.dims == 2;
  std::vector<Column> cols{{"t", "time"}, {"x", "length"}};
  if (two_d) cols.push_back({"y", "length"});
  cols.push_back({"vx", "length/time"});
  if (two_d) cols.push_back({"vy", "length/time"});
  cols.push_back({"flags", "bits"});
  TableWriter w(meta, "trajectory", std::move(cols));
  w.note("flags", "1=substep 2=clamped 4=shifted_stencil");
  for (std::size_t i = 0; i < record.size(); ++i) {
    const auto& p = record.positions[i];
    const auto& v = record.velocities[i];
    const double f = static_cast<double>(record.flags[i]);
    if (two_d) {
      w.row({record.times[i], p[0], p[1], v[0], v[1], f});
    } else {
      w.row({record.times[i], p[0], v[0], f});
    }
  }
  return w.finish(std::move(filename));
}

Artifact outcome_log_artifact(const ArtifactMeta& meta, std::span<const OutcomeRecord> log,
                              std::string filename) {
  TableWriter w(meta, "outcome log",
                {{"run_index", "1"},
                 {"outcome_index", "1"},
                 {"outcome_value", "observable"},
                 {"x_end", "length"},
                 {"y_end", "length"},
                 {"epsilon", "1"}});
  w.note("records", std::to_string(log.size()));
  for (std::size_t i = 0; i < log.size(); ++i) {
    const auto& r = log[i];
    w.row({static_cast<double>(i), static_cast<double>(r.index), r.value, r.particle_at_end[0],
           r.particle_at_end[1], r.epsilon});
  }
  return w.finish(std::move(filename));
}

Artifact convergence_artifact(const ArtifactMeta& meta, std::span<const ConvergencePoint> curve,
                              std::string filename) {
  TableWriter w(meta, "convergence curve", {{"M", "1"}, {"TV", "1"}, {"KS", "1"}});
  for (const auto& p : curve) w.row({static_cast<double>(p.m), p.tv, p.ks});
  return w.finish(std::move(filename));
}

Artifact ensemble_artifact(const ArtifactMeta& meta, const Ensemble& initial,
                           std::span<const double> final_positions, std::string filename) {
  if (final_positions.size() != initial.positions.size()) {
    throw ValidationError("ensemble artifact: initial and final sizes differ");
  }
  TableWriter w(meta, "ensemble", {{"member", "1"}, {"x_initial", "length"}, {"x_final", "length"}});
  w.note("provenance", initial.provenance == Provenance::kBorn ? "born" : "custom");
  if (!initial.density_id.empty()) w.note("density_id", initial.density_id);
  for (std::size_t i = 0; i < final_positions.size(); ++i) {
    w.row({static_cast<double>(i), initial.positions[i], final_positions[i]});
  }
  return w.finish(std::move(filename));
}

Artifact f_table_artifact(const ArtifactMeta& meta, const FSummary& summary, std::string filename) {
  TableWriter w(meta, "f = P / |Psi|^2",
                {{"x", "length"}, {"f", "1"}, {"mass", "1"}, {"expected", "count"}});
  w.note("max_scaled_deviation", format_number(summary.max_scaled_deviation));
  w.note("mean_f", format_number(summary.mean_f));
  if (!summary.trajectory_drift.empty()) w.note("max_drift", format_number(summary.max_drift));
  for (std::size_t i = 0; i < summary.f.size(); ++i) {
    w.row({summary.bin_centers[i], summary.f[i], summary.mass[i], summary.expected[i]});
  }
  return w.finish(std::move(filename));
}

Artifact lyapunov_artifact(const ArtifactMeta& meta, const LyapunovEstimate& estimate,
                           std::string filename) {
  TableWriter w(meta, "lyapunov log-growth", {{"t", "time"}, {"log_growth", "1"}});
  w.note("lambda", format_number(estimate.lambda));
  w.note("window", format_number(estimate.window));
  w.note("renorm_count", std::to_string(estimate.renorm_count));
  w.note("residual", format_number(estimate.residual));
  for (std::size_t i = 0; i < estimate.times.size(); ++i) {
    w.row({estimate.times[i], estimate.log_growth[i]});
  }
  return w.finish(std::move(filename));
}

void write_text_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  out.close();
  if (!out) throw IoError("error writing " + path.string());
}

}  // namespace pilotwave
