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

#ifndef PILOTWAVE_CONFIG_HPP_
#define PILOTWAVE_CONFIG_HPP_

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "pilotwave/equilibrium.hpp"
#include "pilotwave/measurement.hpp"
#include "pilotwave/propagator.hpp"
#include "pilotwave/wavefield.hpp"

namespace pilotwave {

enum class ExperimentKind { kPropagate, kTrajectory, kMeasure, kSequence, kEquilibrium, kLyapunov };

std::string_view kind_name(ExperimentKind kind);
std::optional<ExperimentKind> parse_kind(std::string_view name);

struct GridConfig {
  double min = 0.0;
  double max = 1.0;
  std::size_t n = 64;

  Grid1D make() const { return Grid1D::make(min, max, n); }
};

struct PlanConfig {
  double dt = 1e-3;
  std::size_t steps = 0;
  std::size_t snapshot_every = 0;
};

struct MeasurementConfig {
  ObservableSpec observable = BinnedPosition{};
  double sigma = 1.0;
  double center = 0.0;
  double lambda = 1.0;
  double duration = 1.0;
  std::size_t runs = 1;
  std::optional<double> x0;
  std::optional<double> y0;
  std::size_t min_steps = 32;
};

struct SequenceConfig {
  std::size_t cycles = 100;
  ReprepareMode mode = ReprepareMode::kBakerIdeal;
  std::optional<double> x0;
  std::optional<double> y0;
  PhysicalFlowOptions flow;
};

/// P proportional to (x - lo) on [lo, hi), zero elsewhere.
struct RampDensity {
  double lo = 0.0;
  double hi = 1.0;
};

struct EquilibriumConfig {
  std::size_t members = 1000;
  Provenance provenance = Provenance::kBorn;
  std::string custom_id;
  std::vector<double> custom_values;
  std::optional<RampDensity> ramp;
  double time = 0.0;
  std::size_t record_every = 0;
};

enum class LyapunovReference { kBernoulli, kFlow };

struct LyapunovConfig {
  LyapunovReference reference = LyapunovReference::kBernoulli;
  double delta0 = 1e-8;
  double window = 1e4;
  std::size_t seed_bits = 1024;
  double x0 = 0.0;
};

/// A fully validated run description.
struct ExperimentConfig {
  ExperimentKind kind = ExperimentKind::kPropagate;
  std::uint64_t seed = 0;
  std::string output;
  PhysicalParams physics;
  GridConfig grid_x;
  std::optional<GridConfig> grid_y;
  std::optional<StateSpec> state;
  PotentialSpec potential = FreePotential{};
  PlanConfig plan;
  std::optional<double> trajectory_x0;
  std::optional<MeasurementConfig> measurement;
  std::optional<SequenceConfig> sequence;
  std::optional<EquilibriumConfig> equilibrium;
  std::optional<LyapunovConfig> lyapunov;

  /// Advisory notes from validation (e.g. marginal packet separation).
  std::vector<std::string> warnings;

  /// Canonical text (sorted keys, normalized numbers) and its FNV-1a hash.
  std::string canonical;
  std::uint64_t hash = 0;

  Grid1D x_grid() const { return grid_x.make(); }
  Grid1D y_grid() const;
  DetectorSpec detector() const;
  MeasurementChain chain() const;
  /// Custom density tabulated on the x grid.
  CustomDensity custom_density() const;
};

/// Parses and validates YAML text. Parse errors carry line numbers;
/// unknown keys and violated constraints raise ValidationError.
ExperimentConfig parse_config(const std::string& text, std::optional<std::uint64_t> seed = {});

/// Reads a file (IoError if unreadable) and parses it.
ExperimentConfig load_config(const std::filesystem::path& path,
                             std::optional<std::uint64_t> seed = {});

/// Re-checks cross-field constraints; called by parse_config.
void validate_config(ExperimentConfig& cfg);

/// 64-bit FNV-1a.
std::uint64_t fnv1a64(std::string_view text);
std::string hash_hex(std::uint64_t hash);

}  // namespace pilotwave

#endif  // PILOTWAVE_CONFIG_HPP_
