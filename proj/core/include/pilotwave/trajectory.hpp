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

#ifndef PILOTWAVE_TRAJECTORY_HPP_
#define PILOTWAVE_TRAJECTORY_HPP_

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "pilotwave/error.hpp"
#include "pilotwave/interpolate.hpp"
#include "pilotwave/polar.hpp"
#include "pilotwave/propagator.hpp"
#include "pilotwave/wavefield.hpp"

namespace pilotwave {

/// Configuration-space point (x) or (x, y) of the hidden particle.
struct Particle {
  std::array<double, 2> coords{0.0, 0.0};
  int dims = 1;
  double t = 0.0;

  static Particle at(double x, double t = 0.0) { return Particle{{x, 0.0}, 1, t}; }
  static Particle at(double x, double y, double t) { return Particle{{x, y}, 2, t}; }
  std::span<const double> position() const {
    return {coords.data(), static_cast<std::size_t>(dims)};
  }
};

/// Per-step event bits recorded alongside trajectories.
enum StepFlag : std::uint8_t {
  kFlagSubstep = 1,
  kFlagClamped = 2,
  kFlagShiftedStencil = 4,
};

struct VelocitySample {
  std::array<double, 2> v{0.0, 0.0};
  bool shifted = false;
};

/// A velocity field frozen at one instant.
class VelocityField {
 public:
  virtual ~VelocityField() = default;
  virtual const FieldShape& shape() const = 0;
  /// Multilinear interpolation at pos. If the stencil touches a node, the
  /// nearest fully unmasked stencil is used and `shifted` is set. Throws
  /// PhysicsError if no unmasked stencil exists nearby.
  virtual VelocitySample sample(std::span<const double> pos) const = 0;
  /// True if the grid point nearest pos is a node.
  virtual bool in_node_region(std::span<const double> pos) const = 0;
};

/// Guidance field (hbar/m) Im(grad Psi/Psi) of a Schrodinger state.
class GridVelocityField final : public VelocityField {
 public:
  explicit GridVelocityField(PolarFields fields);
  GridVelocityField(const Wavefunction& wf, const PhysicalParams& params);

  const FieldShape& shape() const override { return fields_.shape; }
  VelocitySample sample(std::span<const double> pos) const override;
  bool in_node_region(std::span<const double> pos) const override;
  const PolarFields& fields() const { return fields_; }

 private:
  PolarFields fields_;
};

namespace detail {

/// Shared stencil logic. `corner(ix, iy, v)` writes the velocity at a grid
/// point and returns false if the point is a node.
template <class CornerFn>
VelocitySample sample_stencil(const FieldShape& shape, std::span<const double> pos,
                              CornerFn&& corner) {
  const int dims = shape.dims();
  const AxisCell cx = locate(shape.gx, pos[0]);
  const AxisCell cy = dims == 2 ? locate(*shape.gy, pos[1]) : AxisCell{};
  const std::size_t nx = shape.gx.size();
  const std::size_t ny = shape.ny();

  auto try_stencil = [&](std::ptrdiff_t ox, std::ptrdiff_t oy, double fx, double fy,
                         VelocitySample& out) {
    std::array<std::array<double, 2>, 4> v{};
    const int ycount = dims == 2 ? 2 : 1;
    for (int a = 0; a < 2; ++a) {
      const std::size_t ix = periodic_index(cx.lo + ox + a, nx);
      for (int b = 0; b < ycount; ++b) {
        const std::size_t iy = dims == 2 ? periodic_index(cy.lo + oy + b, ny) : 0;
        if (!corner(ix, iy, v[static_cast<std::size_t>(a * 2 + b)])) return false;
      }
    }
    for (int axis = 0; axis < dims; ++axis) {
      const auto s = static_cast<std::size_t>(axis);
      if (dims == 1) {
        out.v[s] = (1.0 - fx) * v[0][s] + fx * v[2][s];
      } else {
        out.v[s] = (1.0 - fx) * ((1.0 - fy) * v[0][s] + fy * v[1][s]) +
                   fx * ((1.0 - fy) * v[2][s] + fy * v[3][s]);
      }
    }
    return true;
  };

  VelocitySample out;
  if (try_stencil(0, 0, cx.frac, cy.frac, out)) return out;

  // Fallback: nearest stencil within two cells whose corners are all
  // unmasked, evaluated at the point of that stencil closest to pos.
  struct Candidate {
    std::ptrdiff_t ox, oy;
    double dist;
  };
  std::vector<Candidate> candidates;
  const std::ptrdiff_t yr = dims == 2 ? 2 : 0;
  for (std::ptrdiff_t ox = -2; ox <= 2; ++ox) {
    for (std::ptrdiff_t oy = -yr; oy <= yr; ++oy) {
      if (ox == 0 && oy == 0) continue;
      const double gx = std::max(0.0, std::max(static_cast<double>(ox) - cx.frac,
                                               cx.frac - static_cast<double>(ox) - 1.0));
      const double gy = dims == 2 ? std::max(0.0, std::max(static_cast<double>(oy) - cy.frac,
                                                           cy.frac - static_cast<double>(oy) - 1.0))
                                  : 0.0;
      candidates.push_back({ox, oy, gx * gx + gy * gy});
    }
  }
  std::stable_sort(candidates.begin(), candidates.end(),
                   [](const Candidate& a, const Candidate& b) { return a.dist < b.dist; });
  for (const auto& c : candidates) {
    const double fx = std::clamp(cx.frac - static_cast<double>(c.ox), 0.0, 1.0);
    const double fy = std::clamp(cy.frac - static_cast<double>(c.oy), 0.0, 1.0);
    if (try_stencil(c.ox, c.oy, fx, fy, out)) {
      out.shifted = true;
      return out;
    }
  }
  throw PhysicsError("particle sits in a node region: no unmasked interpolation stencil");
}

}  // namespace detail

/// Velocity fields at t, t + dt/2 and t + dt for one step.
struct StepFields {
  const VelocityField* start = nullptr;
  const VelocityField* mid = nullptr;
  const VelocityField* end = nullptr;
};

/// Samples the Schrodinger guidance field of wf at pos.
VelocitySample sample_velocity(const Wavefunction& wf, const PhysicalParams& params,
                               std::span<const double> pos);

/// One classical RK4 step through time-dependent fields. Velocities between
/// the three levels (needed only by halved substeps) come from quadratic
/// interpolation in time. A step that moves more than one grid cell or ends
/// in a node is rejected and halved, up to 8 times; at that depth an
/// oversized displacement is clamped to one cell (kFlagClamped) while a node
/// still throws PhysicsError. `flags` accumulates StepFlag bits.
Particle advance_particle(const Particle& particle, const StepFields& fields, double dt,
                          std::uint8_t* flags = nullptr);

/// Same, building the guidance fields from three wavefunction snapshots.
Particle advance_particle(const Particle& particle, const Wavefunction& wf_t,
                          const Wavefunction& wf_half, const Wavefunction& wf_next, double dt,
                          const PhysicalParams& params, std::uint8_t* flags = nullptr);

// ---------------------------------------------------------------------------
// Time-dependent guidance flows.

class GuidanceFlow {
 public:
  virtual ~GuidanceFlow() = default;
  virtual double time() const = 0;
  virtual const FieldShape& shape() const = 0;
  virtual const VelocityField& current() const = 0;
  /// Moves the flow forward by dt and returns the fields at the old time,
  /// the midpoint and the new time. Pointers stay valid until the next call.
  virtual StepFields advance(double dt) = 0;
};

/// Co-evolves a wavefunction under the split-step propagator at half the
/// trajectory step, so the midpoint field is a genuine propagated state.
class SchrodingerFlow final : public GuidanceFlow {
 public:
  SchrodingerFlow(Wavefunction wf0, const PotentialSpec& potential, const PhysicalParams& params,
                  double dt, double t0 = 0.0);

  double time() const override { return t_; }
  const FieldShape& shape() const override { return shape_; }
  const VelocityField& current() const override { return *fields_[0]; }
  /// dt must equal the step given at construction.
  StepFields advance(double dt) override;
  const Wavefunction& wavefunction() const { return wf_; }

 private:
  Wavefunction wf_;
  PhysicalParams params_;
  SplitStepPropagator half_step_;
  double dt_;
  double t_;
  FieldShape shape_;
  std::array<std::unique_ptr<GridVelocityField>, 3> fields_;
};

struct TrajectoryRecord {
  int dims = 1;
  std::vector<double> times;
  std::vector<std::array<double, 2>> positions;
  std::vector<std::array<double, 2>> velocities;
  std::vector<std::uint8_t> flags;

  std::size_t size() const { return times.size(); }
};

/// Co-evolves wavefunction and particle for plan.n_steps steps and records
/// every step. Throws PhysicsError on a node collision.
TrajectoryRecord integrate_trajectory(const Wavefunction& wf0, const PotentialSpec& potential,
                                      const PhysicalParams& params, const Particle& particle0,
                                      const PropagationPlan& plan);

/// Lockstep ensemble result; members that hit a node are marked failed and
/// frozen where they stopped.
struct EnsembleRun {
  std::vector<Particle> particles;
  std::vector<std::uint8_t> failed;
  std::vector<std::uint8_t> flags;
  std::size_t failures = 0;
  /// Optional per-member records (filled when requested).
  std::vector<TrajectoryRecord> records;
};

/// Advances every active particle through one step of `fields`, in
/// parallel. Failed members are flagged and skipped from then on.
void advance_members(std::span<Particle> particles, std::span<std::uint8_t> failed,
                     std::span<std::uint8_t> flags, const StepFields& fields, double dt,
                     unsigned workers);

/// Runs n_steps of `flow` carrying all particles. With record_every > 0 each
/// member gets a TrajectoryRecord sampled every record_every steps (plus
/// the final step).
EnsembleRun integrate_ensemble(GuidanceFlow& flow, std::vector<Particle> particles, double dt,
                               std::size_t n_steps, unsigned workers,
                               std::size_t record_every = 0);

// ---------------------------------------------------------------------------
// Chaos and ergodicity diagnostics.

struct LyapunovEstimate {
  double lambda = 0.0;
  double window = 0.0;
  std::size_t renorm_count = 0;
  /// RMS deviation of the accumulated log-growth from the straight line
  /// through the origin with the estimated slope.
  double residual = 0.0;
  /// Accumulated log-growth at each renormalization (and at the end).
  std::vector<double> times;
  std::vector<double> log_growth;
};

/// Two nearby states advanced together (Benettin pair).
class PairDynamics {
 public:
  virtual ~PairDynamics() = default;
  /// Advances both members; returns the elapsed time.
  virtual double step() = 0;
  virtual double separation() const = 0;
  /// Moves the second member along the current separation so that the
  /// separation becomes `target`.
  virtual void rescale(double target) = 0;
  /// Smallest admissible initial separation.
  virtual double min_delta() const = 0;
};

/// Benettin estimate: renormalize to delta0 whenever the separation exceeds
/// renorm_factor*delta0 and average the accumulated log-growth over the
/// elapsed time.
LyapunovEstimate benettin(PairDynamics& pair, double delta0, double window,
                          double renorm_factor = 100.0);

/// Two particles carried by one flow, separated by delta0 along x.
class FlowPair final : public PairDynamics {
 public:
  FlowPair(GuidanceFlow& flow, const Particle& particle0, double delta0, double dt);

  double step() override;
  double separation() const override;
  void rescale(double target) override;
  double min_delta() const override;

 private:
  std::array<double, 2> offset() const;

  GuidanceFlow& flow_;
  std::array<Particle, 2> members_;
  double dt_;
};

LyapunovEstimate lyapunov_exponent(GuidanceFlow& flow, const Particle& particle0, double delta0,
                                   double window, double dt);

struct MomentRow {
  int k = 1;
  double time_average = 0.0;
  /// NaN when the caller supplied no ensemble value.
  double ensemble_average = std::nan("");
};

/// <x^k>_t over the x coordinate of a trajectory (at least 100 points).
std::vector<MomentRow> ergodic_moments(const TrajectoryRecord& traj, std::span<const int> ks,
                                       std::span<const double> ensemble_averages = {});

/// Same over a bare sequence of samples.
std::vector<MomentRow> ergodic_moments(std::span<const double> samples, std::span<const int> ks,
                                       std::span<const double> ensemble_averages = {});

}  // namespace pilotwave

#endif  // PILOTWAVE_TRAJECTORY_HPP_
