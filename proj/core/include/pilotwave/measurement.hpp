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

#ifndef PILOTWAVE_MEASUREMENT_HPP_
#define PILOTWAVE_MEASUREMENT_HPP_

#include <cstddef>
#include <memory>
#include <optional>
#include <utility>
#include <variant>
#include <vector>

#include "pilotwave/propagator.hpp"
#include "pilotwave/rng.hpp"
#include "pilotwave/trajectory.hpp"
#include "pilotwave/wavefield.hpp"

namespace pilotwave {

/// Overlap below which packets count as disjoint.
inline constexpr double kDisjointOverlap = 1e-3;

/// Gaussian pointer Phi_0 on the detector axis; sigma is the standard
/// deviation of |Phi_0|^2.
struct DetectorSpec {
  Grid1D grid;
  double sigma = 1.0;
  double center = 0.0;

  void validate() const;
};

/// Position measured with finite accuracy: outcome n is [edges[n],
/// edges[n+1]) with eigenvalue edges[n].
struct BinnedPosition {
  std::vector<double> edges;
};

/// Nondegenerate discrete spectrum: values[i] belongs to harmonic
/// eigenstate eigenstates[i] of `basis`.
struct DiscreteSpectrum {
  std::vector<double> values;
  std::vector<int> eigenstates;
  HarmonicBasis basis;
};

using ObservableSpec = std::variant<BinnedPosition, DiscreteSpectrum>;

/// An observable resolved on a system grid.
class Observable {
 public:
  Observable(const ObservableSpec& spec, const Grid1D& gx, const PhysicalParams& params);

  bool binned() const { return binned_; }
  std::size_t outcomes() const { return values_.size(); }
  double value(std::size_t n) const { return values_[n]; }
  const std::vector<double>& values() const { return values_; }
  /// Smallest gap between eigenvalues.
  double min_gap() const;
  const Grid1D& grid() const { return grid_; }

  /// Bin containing x; points outside the edges take the nearest bin.
  std::size_t bin_of(double x) const;
  std::pair<double, double> bin(std::size_t n) const { return {edges_[n], edges_[n + 1]}; }
  const std::vector<double>& edges() const { return edges_; }
  const std::vector<Wavefunction>& eigenstates() const { return eigenstates_; }

  /// Component phi_n of a system state: its restriction to bin n, or
  /// <e_n|psi> e_n for a discrete spectrum.
  std::vector<complex> component(const Wavefunction& wf_x, std::size_t n) const;
  /// Probability of each outcome.
  std::vector<double> weights(const Wavefunction& wf_x) const;
  EigenvalueMap eigenvalue_map() const;

 private:
  bool binned_;
  Grid1D grid_;
  std::vector<double> values_;
  std::vector<double> edges_;
  std::vector<Wavefunction> eigenstates_;
};

/// Classical record of one measurement.
struct OutcomeRecord {
  std::size_t index = 0;
  double value = 0.0;
  /// Bin interval for binned observables (NaN otherwise).
  double bin_lo = 0.0;
  double bin_hi = 0.0;
  std::array<double, 2> particle_at_end{0.0, 0.0};
  double x_start = 0.0;
  double epsilon = 0.0;
  double t_meas = 0.0;
  /// Probability carried by the discarded packets (set by restrict_support).
  double discarded_weight = 0.0;
};

enum class ReprepareMode { kBakerIdeal, kPhysicalFlow };

struct PhysicalFlowOptions {
  /// Static spreading potential; defaults to a harmonic trap on the target
  /// centroid whose quarter period maps the packet width onto the target's.
  std::optional<PotentialSpec> potential;
  /// Trajectory step; 0 picks half the grid's stability bound.
  double dt = 0.0;
  double max_time = 20.0;
  double tol = 0.01;
};

struct MeasurementChain {
  ObservableSpec observable;
  DetectorSpec detector;
  double lambda = 1.0;
  double duration = 1.0;
  ReprepareMode mode = ReprepareMode::kBakerIdeal;
  std::size_t n_measurements = 1;
  PhysicalFlowOptions flow;
  /// Lower bound on RK4 steps across the coupling interval.
  std::size_t min_steps = 32;
};

/// Closed-form overlap of two Gaussian pointers displaced by d:
/// exp(-d^2 / (8 sigma^2)).
double gaussian_overlap(double displacement, double sigma);

/// Precomputed packet tables for one coupling run. Psi(x, y, t) =
/// sum_n phi_n(x) G(y - center - lambda a_n t).
struct CouplingTables {
  CouplingTables(const Grid1D& x, const Grid1D& y) : gx(x), gy(y) {}

  Grid1D gx;
  Grid1D gy;
  double lambda = 0.0;
  double sigma = 1.0;
  double center = 0.0;
  bool disjoint = true;
  std::vector<double> a;
  /// Binned: the whole system state and its bin map.
  std::vector<complex> psi_x;
  std::vector<double> edges;
  /// Discrete: phi_n on the grid and cumulative overlaps C_nm(x).
  std::vector<std::vector<complex>> phi;
  std::vector<std::vector<complex>> overlap;
  double density_floor = 0.0;

  std::size_t outcomes() const { return a.size(); }
  std::size_t bin_of(double x) const;
  /// Pointer amplitude of packet n and its y-derivative.
  std::pair<double, double> pointer(std::size_t n, double y, double t) const;
  /// |phi_n(x) G_n(y)|^2.
  double packet_density(std::size_t n, double x, double y, double t) const;
  double density(double x, double y, double t) const;
  Wavefunction wavefunction(double t) const;
};

/// Builds tables for wf_x coupled to the detector. With only_component
/// set, all other packets are dropped (used to probe locality).
std::shared_ptr<const CouplingTables> make_coupling_tables(
    const Wavefunction& wf_x, const DetectorSpec& det, const Observable& obs, double lambda,
    std::optional<std::size_t> only_component = std::nullopt);

/// Guidance field v = j / |Psi|^2 of the coupling Hamiltonian, evaluated at
/// the particle's exact position.
class CouplingVelocityField final : public VelocityField {
 public:
  CouplingVelocityField(std::shared_ptr<const CouplingTables> tables, double t);

  const FieldShape& shape() const override { return shape_; }
  VelocitySample sample(std::span<const double> pos) const override;
  bool in_node_region(std::span<const double> pos) const override;

 private:
  std::shared_ptr<const CouplingTables> tables_;
  double t_;
  FieldShape shape_;
};

class CouplingFlow final : public GuidanceFlow {
 public:
  explicit CouplingFlow(std::shared_ptr<const CouplingTables> tables, double t0 = 0.0);

  double time() const override { return t_; }
  const FieldShape& shape() const override { return fields_[0]->shape(); }
  const VelocityField& current() const override { return *fields_[0]; }
  StepFields advance(double dt) override;

 private:
  std::shared_ptr<const CouplingTables> tables_;
  double t_;
  std::array<std::unique_ptr<CouplingVelocityField>, 3> fields_;
};

/// Draws y(0) from |Phi_0|^2, wrapped into the detector domain.
double draw_detector_y(const DetectorSpec& det, RandomStream& rng);

struct VonNeumannResult {
  Particle particle;
  OutcomeRecord outcome;
};

/// One coupling of a fixed system state to the detector. Everything that
/// depends only on the wavefunction is computed once, so many particles (or
/// many cycles with the same state) reuse it.
class VonNeumannMeasurement {
 public:
  VonNeumannMeasurement(const Wavefunction& wf_x, const DetectorSpec& det, const Observable& obs,
                        double lambda, double duration, std::size_t min_steps = 32);

  /// Lifts (x, y0), co-evolves it through the coupling and classifies the
  /// outcome. Throws PhysicsError on ambiguous classification, on a
  /// particle outside its packet, or when a binned measurement moves x by
  /// 2*dx or more.
  VonNeumannResult run(const Particle& particle_x, double y0) const;

  /// Psi(x, y) at the end of the coupling.
  const Wavefunction& wavefunction() const { return final_wf_; }
  double epsilon() const { return epsilon_; }
  const CouplingTables& tables() const { return *tables_; }
  std::shared_ptr<const CouplingTables> shared_tables() const { return tables_; }
  std::size_t steps() const { return steps_; }
  double duration() const { return duration_; }

 private:
  std::shared_ptr<const CouplingTables> tables_;
  double duration_;
  std::size_t steps_;
  Wavefunction final_wf_;
  double epsilon_;
  std::array<double, 2> cell_;
};

struct VonNeumannOutput {
  Wavefunction wf2d;
  Particle particle;
  OutcomeRecord outcome;
};

VonNeumannOutput run_von_neumann(const Wavefunction& wf_x, const DetectorSpec& det,
                                 const Observable& obs, const CouplingSpec& coupling,
                                 const Particle& particle_x, double y0,
                                 std::size_t min_steps = 32);

/// Largest amplitude overlap along y between packets adjacent in
/// eigenvalue; 0 with fewer than two populated packets.
double check_separation(const Wavefunction& wf2d, const Observable& obs);

/// Keeps packet out.index, contracts the detector axis and renormalizes.
/// Records the discarded weight in `out`.
Wavefunction restrict_support(const Wavefunction& wf2d, OutcomeRecord& out,
                              const Observable& obs);

struct RepreparedState {
  Wavefunction wf;
  Particle particle;
  double fidelity = 1.0;
  double flow_time = 0.0;
  double l1 = 0.0;
};

/// Moves the particle and the state onto the target. baker_ideal maps the
/// particle by x' = F_target^-1(F_restricted(x)); physical_flow lets it ride
/// the spreading flow.
RepreparedState reprepare(const Wavefunction& wf_restricted, const Particle& particle,
                          ReprepareMode mode, const Wavefunction& target,
                          const PhysicalParams& params, const PhysicalFlowOptions& flow = {});

}  // namespace pilotwave

#endif  // PILOTWAVE_MEASUREMENT_HPP_
