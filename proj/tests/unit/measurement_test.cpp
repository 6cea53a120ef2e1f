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

#include "pilotwave/measurement.hpp"

#include <cmath>
#include <numbers>
#include <vector>

#include <gtest/gtest.h>

#include "pilotwave/error.hpp"
#include "pilotwave/stats.hpp"

using namespace pilotwave;

namespace {

const Grid1D kGx = Grid1D::make(-1.0, 3.0, 256);
const Grid1D kGy = Grid1D::make(-10.0, 20.0, 256);

Wavefunction two_bins(double w0, double w1) {
  return init_state(kGx, PiecewiseDensityState{{{0.0, 1.0, w0}, {1.0, 2.0, w1}}, {}}, {});
}

const Observable& bins() {
  static const Observable obs(BinnedPosition{{0.0, 1.0, 2.0}}, kGx, {});
  return obs;
}

}  // namespace

TEST(Overlap, closed_form) {
  EXPECT_DOUBLE_EQ(gaussian_overlap(0.0, 0.5), 1.0);
  EXPECT_NEAR(gaussian_overlap(3.0, 0.5), std::exp(-4.5), 1e-15);
}

TEST(Detector, validation) {
  EXPECT_THROW((DetectorSpec{kGy, 0.3, 0.0}.validate()), ValidationError);
  EXPECT_THROW((DetectorSpec{kGy, 0.5, 25.0}.validate()), ValidationError);
  EXPECT_NO_THROW((DetectorSpec{kGy, 0.5, 0.0}.validate()));
}

TEST(Detector, draws_follow_the_pointer_density) {
  const DetectorSpec det{kGy, 0.5, 1.0};
  RandomStream rng(3, streams::kDetector);
  std::vector<double> ys(4000);
  for (auto& y : ys) y = draw_detector_y(det, rng);
  std::vector<double> rho(kGy.size());
  for (std::size_t j = 0; j < kGy.size(); ++j) {
    // Cell-averaged Gaussian density.
    const double a = (kGy.point(j) - 1.0) / (0.5 * std::sqrt(2.0));
    const double b = (kGy.point(j) + kGy.dx() - 1.0) / (0.5 * std::sqrt(2.0));
    rho[j] = 0.5 * (std::erf(b) - std::erf(a));
  }
  EXPECT_LT(ks_against_density(ys, kGy, rho), 1.63 / std::sqrt(4000.0));
}

TEST(Observable, binned_resolution_and_errors) {
  const auto& obs = bins();
  EXPECT_TRUE(obs.binned());
  EXPECT_EQ(obs.outcomes(), 2u);
  EXPECT_EQ(obs.value(1), 1.0);
  EXPECT_EQ(obs.bin_of(1.5), 1u);
  EXPECT_EQ(obs.bin_of(-0.5), 0u);
  const auto w = obs.weights(two_bins(0.25, 0.75));
  EXPECT_NEAR(w[0], 0.25, 1e-14);
  EXPECT_NEAR(w[1], 0.75, 1e-14);
  EXPECT_THROW(Observable(BinnedPosition{{0.0, 1.0}}, kGx, {}), ValidationError);
  EXPECT_THROW(Observable(BinnedPosition{{0.0, 1.001, 2.0}}, kGx, {}), ValidationError);
  EXPECT_THROW(Observable(DiscreteSpectrum{{1.0, 1.0}, {0, 1}, {}}, kGx, {}), ValidationError);
}

TEST(Separation, lambda_zero_means_full_overlap) {
  const VonNeumannMeasurement vn(two_bins(0.5, 0.5), {kGy, 0.5, 0.0}, bins(), 0.0, 1.0);
  EXPECT_NEAR(vn.epsilon(), 1.0, 1e-12);
}

TEST(Separation, six_sigma_matches_the_gaussian_overlap) {
  // lambda * da * T = 3 = 6 sigma.
  const VonNeumannMeasurement vn(two_bins(0.5, 0.5), {kGy, 0.5, 0.0}, bins(), 1.0, 3.0);
  EXPECT_NEAR(vn.epsilon() / std::exp(-4.5), 1.0, 0.02);
}

TEST(VonNeumann, binned_measurement_leaves_x_alone_and_tracks_the_bin) {
  const VonNeumannMeasurement vn(two_bins(0.25, 0.75), {kGy, 0.5, 0.0}, bins(), 1.0, 5.0);
  for (double x : {0.1, 0.93, 1.2, 1.77}) {
    for (double y0 : {-0.4, 0.0, 0.6}) {
      const auto r = vn.run(Particle::at(x), y0);
      EXPECT_LT(std::abs(r.particle.coords[0] - x), 2.0 * kGx.dx());
      EXPECT_EQ(r.outcome.index, bins().bin_of(x));
      EXPECT_NEAR(r.particle.coords[1], y0 + 5.0 * bins().value(r.outcome.index), 1e-6);
    }
  }
}

TEST(VonNeumann, binned_outcomes_are_never_ambiguous) {
  // Position bins already separate the branches along x, so even 1 sigma of
  // pointer separation leaves a single packet under the particle.
  const VonNeumannMeasurement vn(two_bins(0.5, 0.5), {kGy, 0.5, 0.0}, bins(), 1.0, 0.5);
  EXPECT_EQ(vn.run(Particle::at(0.5), 0.0).outcome.index, 0u);
  EXPECT_EQ(vn.run(Particle::at(1.5), 0.0).outcome.index, 1u);
}

TEST(VonNeumann, overlapping_discrete_packets_are_ambiguous) {
  const Grid1D gx = Grid1D::make(-8.0, 8.0, 256);
  const HarmonicBasis basis{1.0, 0.0};
  const Wavefunction wf = init_state(
      gx, SuperpositionState{basis, {{{std::sqrt(0.5), 0.0}, 0}, {{std::sqrt(0.5), 0.0}, 1}}}, {});
  const Observable obs(DiscreteSpectrum{{0.0, 1.0}, {0, 1}, basis}, gx, {});
  // lambda * da * T = 0.5 = 1 sigma.
  const VonNeumannMeasurement vn(wf, {kGy, 0.5, 0.0}, obs, 1.0, 0.5);
  EXPECT_THROW(vn.run(Particle::at(0.3), 0.2), PhysicsError);
}

TEST(VonNeumann, discrete_spectrum_pointer_follows_its_packet) {
  const Grid1D gx = Grid1D::make(-8.0, 8.0, 256);
  const HarmonicBasis basis{1.0, 0.0};
  const Wavefunction wf = init_state(
      gx, SuperpositionState{basis, {{{0.5, 0.0}, 0}, {{std::sqrt(0.75), 0.0}, 1}}}, {});
  const Observable obs(DiscreteSpectrum{{0.0, 1.0}, {0, 1}, basis}, gx, {});
  const auto w = obs.weights(wf);
  EXPECT_NEAR(w[0], 0.25, 1e-12);
  const VonNeumannMeasurement vn(wf, {kGy, 0.5, 0.0}, obs, 1.0, 5.0);
  EXPECT_LT(vn.epsilon(), 1e-3);
  for (double x : {-1.5, 0.3, 1.1}) {
    const auto r = vn.run(Particle::at(x), 0.2);
    const double expect_y = 0.2 + 5.0 * obs.value(r.outcome.index);
    EXPECT_NEAR(r.particle.coords[1], expect_y, 2.0) << x;
  }
}

TEST(VonNeumann, state_outside_the_eigen_span_is_rejected) {
  const Grid1D gx = Grid1D::make(-8.0, 8.0, 256);
  const HarmonicBasis basis{1.0, 0.0};
  const Wavefunction wf = harmonic_eigenstate(gx, basis, {}, 2);
  const Observable obs(DiscreteSpectrum{{0.0, 1.0}, {0, 1}, basis}, gx, {});
  EXPECT_THROW(VonNeumannMeasurement(wf, {kGy, 0.5, 0.0}, obs, 1.0, 5.0), ValidationError);
}

TEST(RestrictSupport, keeps_one_bin_and_records_the_rest) {
  const VonNeumannMeasurement vn(two_bins(0.25, 0.75), {kGy, 0.5, 0.0}, bins(), 1.0, 5.0);
  auto r = vn.run(Particle::at(0.4), 0.0);
  ASSERT_EQ(r.outcome.index, 0u);
  const Wavefunction kept = restrict_support(vn.wavefunction(), r.outcome, bins());
  EXPECT_FALSE(kept.is_2d());
  EXPECT_NEAR(kept.norm_squared(), 1.0, 1e-12);
  EXPECT_NEAR(r.outcome.discarded_weight, 0.75, 1e-9);
  for (std::size_t i = 0; i < kGx.size(); ++i) {
    if (kGx.point(i) >= 1.0) {
      EXPECT_EQ(kept[i], complex(0.0, 0.0));
    }
  }
}

TEST(RestrictSupport, refuses_overlapping_packets) {
  const VonNeumannMeasurement vn(two_bins(0.5, 0.5), {kGy, 0.5, 0.0}, bins(), 1.0, 3.0);
  OutcomeRecord rec;
  rec.epsilon = vn.epsilon();
  EXPECT_THROW(restrict_support(vn.wavefunction(), rec, bins()), ValidationError);
}

TEST(Reprepare, baker_maps_the_cdf_coordinate) {
  const Wavefunction restricted = init_state(kGx, PiecewiseDensityState{{{0.0, 1.0, 1.0}}, {}}, {});
  const Wavefunction target = two_bins(0.5, 0.5);
  const auto out = reprepare(restricted, Particle::at(0.3), ReprepareMode::kBakerIdeal, target, {});
  EXPECT_NEAR(out.particle.coords[0], 0.6, 1e-12);
  for (std::size_t i = 0; i < kGx.size(); ++i) EXPECT_EQ(out.wf[i], target[i]);
  EXPECT_THROW(reprepare(restricted, Particle::at(1.5), ReprepareMode::kBakerIdeal, target, {}),
               ValidationError);
}

TEST(Reprepare, physical_flow_widens_a_gaussian_in_a_quarter_period) {
  const Grid1D g = Grid1D::make(-10.0, 10.0, 256);
  const Wavefunction narrow = init_state(g, GaussianState{0.0, 0.5, 0.0}, {});
  const Wavefunction wide = init_state(g, GaussianState{0.0, 1.0, 0.0}, {});
  PhysicalFlowOptions opt;
  opt.tol = 1e-3;
  const auto out = reprepare(narrow, Particle::at(0.2), ReprepareMode::kPhysicalFlow, wide, {}, opt);
  EXPECT_NEAR(out.flow_time, std::numbers::pi / 2.0, 2e-3);
  EXPECT_GT(out.fidelity, 0.999);
  // The particle scales with the width: x -> 2x.
  EXPECT_NEAR(out.particle.coords[0], 0.4, 1e-2);
}

TEST(Reprepare, unreachable_target_is_a_physics_error) {
  const Grid1D g = Grid1D::make(-10.0, 10.0, 256);
  const Wavefunction narrow = init_state(g, GaussianState{0.0, 0.5, 0.0}, {});
  const Wavefunction flat = init_state(g, PiecewiseDensityState{{{-2.5, 2.5, 1.0}}, {}}, {});
  PhysicalFlowOptions opt;
  opt.max_time = 3.0;
  EXPECT_THROW(reprepare(narrow, Particle::at(0.1), ReprepareMode::kPhysicalFlow, flat, {}, opt),
               PhysicsError);
}
