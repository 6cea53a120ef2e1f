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

#include <cmath>
#include <numbers>

#include <gtest/gtest.h>

#include "pilotwave/error.hpp"

using namespace pilotwave;

TEST(Polar, boosted_gaussian_velocity_and_quantum_potential) {
  const Grid1D g = Grid1D::make(-20.0, 20.0, 512);
  const double sigma = 1.3;
  const PhysicalParams p{1.0, 2.0, 1.0};
  // k0 commensurate with the box keeps the phase periodic.
  const double k0 = 2.0 * std::numbers::pi / g.length() * 6.0;
  const Wavefunction wf = init_state(g, GaussianState{0.0, sigma, k0}, p);
  const PolarFields f = polar_decompose(wf, p);
  for (std::size_t i = 0; i < g.size(); ++i) {
    const double x = g.point(i);
    if (std::abs(x) > 6.0) continue;
    EXPECT_NEAR(f.velocity[0][i], k0 / p.m_x, 1e-9) << x;
    const double lap_r_over_r = x * x / (4.0 * std::pow(sigma, 4)) - 1.0 / (2.0 * sigma * sigma);
    EXPECT_NEAR(f.qpot[i], -lap_r_over_r / (2.0 * p.m_x), 1e-8) << x;
  }
}

TEST(Polar, node_of_first_excited_state_is_masked) {
  const Grid1D g = Grid1D::make(-8.0, 8.0, 256);
  const Wavefunction wf = harmonic_eigenstate(g, {1.0, 0.0}, {}, 1);
  const PolarFields f = polar_decompose(wf, {});
  const std::size_t centre = g.line_index(0.0);
  EXPECT_TRUE(f.node_mask[centre]);
  EXPECT_TRUE(std::isnan(f.velocity[0][centre]));
  EXPECT_FALSE(f.node_mask[centre + 3]);
  // Real eigenfunction: no current anywhere off the nodes. The velocity
  // itself is roundoff over |Psi|^2, so test j = rho v.
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (!f.node_mask[i]) {
      EXPECT_NEAR(f.density[i] * f.velocity[0][i], 0.0, 1e-14);
    }
  }
}

TEST(Polar, stationary_state_local_energy_is_the_eigenvalue) {
  const Grid1D g = Grid1D::make(-10.0, 10.0, 256);
  const HarmonicBasis b{1.5, 0.0};
  for (int n : {0, 2}) {
    const Wavefunction wf = harmonic_eigenstate(g, b, {}, n);
    for (std::size_t i : {100u, 131u, 150u}) {
      const double x = g.point(i);
      const double e = local_energy(wf, {}, HarmonicPotential{1.5, 0.0}, std::span(&x, 1));
      EXPECT_NEAR(e, harmonic_energy(b, {}, n), 1e-8) << n << " at " << x;
    }
  }
}

TEST(Polar, two_dimensional_fields_have_both_axes) {
  // Wide enough that the packets vanish at the periodic edges.
  const Grid1D gx = Grid1D::make(-16.0, 16.0, 128);
  const Grid1D gy = Grid1D::make(-16.0, 16.0, 128);
  const double ky = 2.0 * std::numbers::pi / 32.0 * 3.0;
  const Wavefunction wf = product_state(init_state(gx, GaussianState{0.0, 1.5, 0.0}, {}),
                                        init_state(gy, GaussianState{0.0, 1.5, ky}, {}));
  const PolarFields f = polar_decompose(wf, PhysicalParams{1.0, 1.0, 4.0});
  const std::size_t i = FieldShape::of(wf).index(64, 64);
  EXPECT_NEAR(f.velocity[0][i], 0.0, 1e-10);
  EXPECT_NEAR(f.velocity[1][i], ky / 4.0, 1e-10);
}
