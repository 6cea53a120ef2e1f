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

#ifndef PILOTWAVE_PROPAGATOR_HPP_
#define PILOTWAVE_PROPAGATOR_HPP_

#include <cstddef>
#include <span>
#include <variant>
#include <vector>

#include "pilotwave/wavefield.hpp"

namespace pilotwave {

/// Largest admissible time step m*dx^2/(hbar*pi) on one axis.
double stability_limit(const Grid1D& grid, double mass, double hbar);

/// Throws ValidationError if |dt| exceeds the stability limit on any axis of
/// the wavefunction's grid.
void check_stability(double dt, const Wavefunction& shape, const PhysicalParams& params);

struct PropagationPlan {
  double dt = 0.0;
  std::size_t n_steps = 0;
  /// Snapshot every k steps (including t = 0); 0 disables snapshots.
  std::size_t snapshot_every = 0;

  /// Validates dt > 0 and the stability bound against `shape`'s grid.
  static PropagationPlan make(double dt, std::size_t n_steps, std::size_t snapshot_every,
                              const Wavefunction& shape, const PhysicalParams& params);
};

/// Strang split-step integrator for i hbar dPsi/dt = [-hbar^2/2m lap + V] Psi
/// with the exact discrete kinetic phase exp(-i hbar k^2 dt / 2m). On a 2D
/// grid the potential acts along the system axis and each axis uses its own
/// mass. Owns precomputed phase tables; step() is const and may run
/// concurrently on distinct wavefunctions.
class SplitStepPropagator {
 public:
  SplitStepPropagator(const Wavefunction& shape, const PotentialSpec& potential,
                      const PhysicalParams& params, double dt);

  /// One step, in place. Throws PhysicsError if the result is not finite.
  void step(Wavefunction& wf) const;

  double dt() const { return dt_; }

 private:
  bool two_d_;
  std::size_t nx_;
  std::size_t ny_;
  double dt_;
  std::vector<complex> half_potential_;
  std::vector<complex> kinetic_;
};

Wavefunction step_potential_split(const Wavefunction& wf, const PotentialSpec& potential,
                                  const PhysicalParams& params, double dt);

struct Snapshot {
  double t = 0.0;
  Wavefunction wf;
};

struct PropagationResult {
  Wavefunction final_state;
  std::vector<Snapshot> snapshots;
};

PropagationResult propagate(const Wavefunction& wf, const PotentialSpec& potential,
                            const PhysicalParams& params, const PropagationPlan& plan);

// ---------------------------------------------------------------------------
// Measurement coupling H = lambda * a(x) * p_y.

/// Piecewise-constant eigenvalue map: values[i] on [edges[i], edges[i+1]).
/// Points left of the first edge or right of the last take the nearest bin.
struct StaircaseMap {
  std::vector<double> edges;
  std::vector<double> values;
};

/// a(x) = slope * x + offset.
struct LinearMap {
  double slope = 1.0;
  double offset = 0.0;
};

using EigenvalueMap = std::variant<StaircaseMap, LinearMap>;

double eigenvalue_at(const EigenvalueMap& map, double x);

struct CouplingSpec {
  double lambda = 0.0;
  EigenvalueMap a_of_x = LinearMap{};
  double duration = 1.0;

  void validate() const;
};

/// Exact evolution under lambda*a(x)*p_y for time t (V switched off): every
/// x-slice is multiplied by exp(-i lambda a(x) k_y t) in the mixed
/// representation, i.e. translated by lambda*a(x)*t along y. Throws
/// ValidationError if some translation exceeds half the detector domain.
Wavefunction step_measurement_coupling(const Wavefunction& wf2d, const CouplingSpec& coupling,
                                       double t);

/// Exact evolution under lambda*A*p_y with A = sum_n a_n |phi_n><phi_n| for
/// orthonormal system states phi_n (the orthogonal complement has a = 0):
/// Psi(x,y,t) = R(x,y) + sum_n phi_n(x) g_n(y - lambda a_n t).
Wavefunction step_spectral_coupling(const Wavefunction& wf2d,
                                    std::span<const Wavefunction> eigenstates,
                                    std::span<const double> eigenvalues, double lambda, double t);

/// Translates a periodic 1D profile by `shift` using the spectral phase.
std::vector<complex> translate_periodic(std::span<const complex> profile, const Grid1D& grid,
                                        double shift);

}  // namespace pilotwave

#endif  // PILOTWAVE_PROPAGATOR_HPP_
