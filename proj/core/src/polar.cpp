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

#include "pilotwave/polar.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "pilotwave/error.hpp"
#include "pilotwave/spectral.hpp"

namespace pilotwave {

namespace {
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
}

PolarFields polar_decompose(const Wavefunction& wf, const PhysicalParams& params) {
  params.validate();
  PolarFields out(FieldShape::of(wf));
  const std::size_t n = wf.size();
  out.density = wf.density();
  const double max_density = *std::max_element(out.density.begin(), out.density.end());
  out.density_floor = kRelativeDensityFloor * max_density;
  out.node_mask.resize(n);
  for (std::size_t i = 0; i < n; ++i) out.node_mask[i] = out.density[i] < out.density_floor;

  out.qpot.assign(n, 0.0);
  const int dims = wf.dims();
  for (int axis = 0; axis < dims; ++axis) {
    const double mass = axis == 0 ? params.m_x : params.m_y;
    const auto d1 = spectral::derivative(wf, axis, 1);
    const auto d2 = spectral::derivative(wf, axis, 2);
    auto& v = out.velocity[static_cast<std::size_t>(axis)];
    v.assign(n, kNaN);
    for (std::size_t i = 0; i < n; ++i) {
      if (out.node_mask[i]) {
        out.qpot[i] = kNaN;
        continue;
      }
      const complex psi = wf[i];
      const double rho = out.density[i];
      // Im(conj(psi) d psi) / |psi|^2 = Im(d psi / psi) = dS/hbar.
      const double grad_phase = std::imag(std::conj(psi) * d1[i]) / rho;
      v[i] = params.hbar / mass * grad_phase;
      // lap R / R = Re(lap psi / psi) + (dS/hbar)^2.
      const double lap_r_over_r = std::real(std::conj(psi) * d2[i]) / rho + grad_phase * grad_phase;
      out.qpot[i] += -params.hbar * params.hbar / (2.0 * mass) * lap_r_over_r;
    }
  }
  return out;
}

double local_energy(const Wavefunction& wf, const PhysicalParams& params,
                    const PotentialSpec& potential, std::span<const double> pos) {
  if (static_cast<int>(pos.size()) < wf.dims()) {
    throw ValidationError("local_energy: position has fewer components than the grid");
  }
  const PolarFields fields = polar_decompose(wf, params);
  const auto v = potential_values(wf.gx(), potential, params);
  const auto& shape = fields.shape;

  // Only the stencil around pos needs evaluating; anything masked there is a
  // precondition failure.
  const auto cx = locate(shape.gx, pos[0]);
  std::vector<double> energy(fields.density.size(), kNaN);
  const int dims = wf.dims();
  const std::ptrdiff_t ylo = dims == 2 ? locate(*shape.gy, pos[1]).lo : 0;
  for (std::ptrdiff_t dxi = 0; dxi <= 1; ++dxi) {
    const std::size_t ix = periodic_index(cx.lo + dxi, shape.gx.size());
    for (std::ptrdiff_t dyi = 0; dyi <= (dims == 2 ? 1 : 0); ++dyi) {
      const std::size_t iy = dims == 2 ? periodic_index(ylo + dyi, shape.ny()) : 0;
      const std::size_t i = shape.index(ix, iy);
      if (fields.node_mask[i]) {
        throw ValidationError("local_energy: position lies in a node region");
      }
      double kinetic = 0.5 * params.m_x * fields.velocity[0][i] * fields.velocity[0][i];
      if (dims == 2) kinetic += 0.5 * params.m_y * fields.velocity[1][i] * fields.velocity[1][i];
      energy[i] = kinetic + fields.qpot[i] + v[ix];
    }
  }
  return interpolate(energy, shape, pos);
}

}  // namespace pilotwave
