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

#ifndef PILOTWAVE_POLAR_HPP_
#define PILOTWAVE_POLAR_HPP_

#include <array>
#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "pilotwave/interpolate.hpp"
#include "pilotwave/wavefield.hpp"

namespace pilotwave {

/// Points with density below this fraction of the maximum are nodes.
inline constexpr double kRelativeDensityFloor = 1e-12;

/// Psi = R exp(iS/hbar) resolved on the grid. Velocity and quantum potential
/// are NaN at masked points.
struct PolarFields {
  explicit PolarFields(FieldShape s) : shape(std::move(s)) {}

  FieldShape shape;
  std::vector<double> density;
  /// Guidance velocity per axis (index 1 empty in 1D).
  std::array<std::vector<double>, 2> velocity;
  std::vector<double> qpot;
  std::vector<std::uint8_t> node_mask;
  double density_floor = 0.0;

  int dims() const { return shape.dims(); }
};

/// density = |Psi|^2, v = (hbar/m) Im(grad Psi / Psi) per axis,
/// Q = -(hbar^2/2m) lap R / R, all from spectral derivatives.
PolarFields polar_decompose(const Wavefunction& wf, const PhysicalParams& params);

/// E = sum_a m_a v_a^2 / 2 + Q + V at pos, i.e. -dS/dt from the
/// Hamilton-Jacobi form. The potential acts on the system coordinate.
/// Throws ValidationError if the interpolation stencil touches a node.
double local_energy(const Wavefunction& wf, const PhysicalParams& params,
                    const PotentialSpec& potential, std::span<const double> pos);

}  // namespace pilotwave

#endif  // PILOTWAVE_POLAR_HPP_
