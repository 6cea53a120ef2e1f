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

#ifndef PILOTWAVE_EQUILIBRIUM_HPP_
#define PILOTWAVE_EQUILIBRIUM_HPP_

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "pilotwave/fixed_point.hpp"
#include "pilotwave/measurement.hpp"
#include "pilotwave/propagator.hpp"
#include "pilotwave/stats.hpp"
#include "pilotwave/trajectory.hpp"
#include "pilotwave/wavefield.hpp"

namespace pilotwave {

enum class Provenance { kBorn, kCustom };

/// Density supplied by the caller, tabulated on the wavefunction grid.
struct CustomDensity {
  std::string id;
  std::vector<double> values;
};

/// Positions of independent systems sharing one wavefunction (1D).
struct Ensemble {
  std::vector<double> positions;
  Provenance provenance = Provenance::kBorn;
  std::string density_id;
  double t = 0.0;
};

/// Inverse-CDF sampling with the cell-linear CDF. Member i draws from
/// stream kEnsembleBase + i, so results do not depend on worker count.
Ensemble sample_ensemble(const Wavefunction& wf, std::size_t n, Provenance provenance,
                         std::uint64_t seed, const CustomDensity* custom = nullptr);

/// Everything needed to carry an ensemble forward in time.
struct EvolutionSetup {
  Wavefunction wf0;
  PotentialSpec potential;
  PhysicalParams params;
  double dt = 1e-3;
  unsigned workers = 1;
  /// Record trajectories and wavefunction snapshots every k steps (0: off).
  std::size_t record_every = 0;
};

struct EvolvedEnsemble {
  Ensemble ensemble;
  Wavefunction wf;
  /// Indices (into the input ensemble) of members that hit a node.
  std::vector<std::size_t> aborted;
  /// Filled when record_every > 0; records[i] follows surviving member i.
  std::vector<TrajectoryRecord> records;
  std::vector<Snapshot> snapshots;
};

/// Co-evolves wf0 and every member to time T (members start at e.t).
/// Throws PhysicsError if more than 0.1% of the members abort.
EvolvedEnsemble evolve_ensemble(const Ensemble& e, const EvolutionSetup& setup, double T);

/// Per-trajectory input for f along trajectories. Records must come from
/// members sorted by starting position (1D flows never reorder them);
/// p0[i] is the initial ensemble density at member i's start and
/// snapshots[k] the wavefunction at record time k.
struct FTrajectories {
  std::vector<TrajectoryRecord> records;
  std::vector<double> p0;
  std::vector<Snapshot> snapshots;
};

struct FSummary {
  std::vector<double> bin_centers;
  std::vector<double> f;
  /// |Psi|^2 mass of each bin and the expected count n*mass.
  std::vector<double> mass;
  std::vector<double> expected;
  /// max_b |f_b - 1| sqrt(n mass_b) over bins expecting at least 5 counts.
  double max_scaled_deviation = 0.0;
  /// Bins entering max_scaled_deviation, and the two-sided Gaussian bound
  /// that all of them stay under with family-wise probability 0.999.
  std::size_t checked_bins = 0;
  double sampling_bound = 0.0;
  double mean_f = 0.0;
  /// Relative drift max_t |f(t)/f(0) - 1| of each interior trajectory.
  std::vector<double> trajectory_drift;
  double max_drift = 0.0;
};

/// f = P / |Psi|^2 from a histogram with 4*dx bins over cells off the node
/// mask. Throws ValidationError below 10^3 members or when more than half
/// of the |Psi|^2 mass lies in empty bins.
FSummary f_statistics(const Ensemble& e, const Wavefunction& wf,
                      const FTrajectories* trajectories = nullptr);

/// Throws ValidationError for fewer than 10 samples or a reference whose
/// integral differs from 1 by more than 1e-6.
DistributionStats compare_distributions(const Ensemble& samples, const Grid1D& grid,
                                        std::span<const double> reference);

// ---------------------------------------------------------------------------
// Doubling-map reference model.

/// State filled from seed material through the counter-based generator.
ShiftState shift_state_from_seed(std::span<const std::uint64_t> seed_words,
                                 std::size_t width_bits);

/// Benettin pair of doubling-map orbits with the circle metric.
class ShiftPair final : public PairDynamics {
 public:
  explicit ShiftPair(const ShiftState& s);

  double step() override;
  double separation() const override;
  void rescale(double target) override;
  double min_delta() const override;

 private:
  FixedFraction a_;
  FixedFraction b_;
};

LyapunovEstimate bernoulli_lyapunov(const ShiftState& s, double delta0, std::size_t iterates);

// ---------------------------------------------------------------------------
// Single-system measurement sequence.

struct ConvergencePoint {
  std::size_t m = 0;
  double tv = 0.0;
  double ks = 0.0;
};

struct SequenceOptions {
  std::size_t m = 100;
  std::uint64_t seed = 0;
  /// Fixed initial x; drawn from |Psi0|^2 when empty.
  std::optional<double> x0;
  /// Fixed detector start; drawn from |Phi_0|^2 when empty.
  std::optional<double> y0;
};

struct SequenceResult {
  std::vector<OutcomeRecord> log;
  std::vector<ConvergencePoint> curve;
  /// Outcome frequencies against the outcome probabilities of Psi0.
  DistributionStats outcome_stats;
  /// Positions entering each measurement against |Psi0|^2.
  DistributionStats position_stats;
  std::vector<double> target_masses;
  std::vector<double> counts;
  /// Block-averaged TV against block length and its log-log slope.
  std::vector<double> block_lengths;
  std::vector<double> block_tv;
  double slope = 0.0;
  /// F_target(x) after each repreparation.
  std::vector<double> coordinates;
  /// Initial CDF coordinate in fixed point (baker_ideal on binned positions).
  std::optional<FixedFraction> initial_u;
  double epsilon = 0.0;
};

/// Runs M measure, restrict, reprepare cycles on one system. Failures are
/// rethrown as PhysicsError naming the cycle.
SequenceResult sequence_experiment(const MeasurementChain& chain, const Wavefunction& wf0,
                                   const PhysicalParams& params, const SequenceOptions& opts);

/// Bits of fixed-point precision needed for M baker cycles.
std::size_t baker_width_bits(std::span<const double> masses, std::size_t m);

}  // namespace pilotwave

#endif  // PILOTWAVE_EQUILIBRIUM_HPP_
