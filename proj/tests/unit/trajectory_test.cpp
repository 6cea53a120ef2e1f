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

#include "pilotwave/trajectory.hpp"

#include <cmath>
#include <numbers>
#include <vector>

#include <gtest/gtest.h>

#include "pilotwave/error.hpp"

using namespace pilotwave;

namespace {

// Separation multiplied by e^rate per unit step: an exact Lyapunov oracle.
class ExponentialPair final : public PairDynamics {
 public:
  explicit ExponentialPair(double rate) : rate_(rate) {}
  double step() override {
    d_ *= std::exp(rate_);
    return 1.0;
  }
  double separation() const override { return d_; }
  void rescale(double target) override { d_ = target; }
  double min_delta() const override { return 1e-300; }

 private:
  double rate_;
  double d_ = 1.0;
};

// Uniform density with a commensurate linear phase: v = hbar k / m.
Wavefunction plane_wave(const Grid1D& g, int mode) {
  const double k = 2.0 * std::numbers::pi * mode / g.length();
  std::vector<double> phase(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) phase[i] = k * g.point(i);
  return init_state(g, PiecewiseDensityState{{{g.x_min(), g.x_max(), 1.0}}, phase}, {});
}

}  // namespace

TEST(Trajectory, spreading_gaussian_scales_with_the_width) {
  const Grid1D g = Grid1D::make(-20.0, 20.0, 512);
  const Wavefunction wf0 = init_state(g, GaussianState{0.0, 1.0, 0.0}, {});
  const double t_end = 2.0 * std::sqrt(3.0);
  const auto plan = PropagationPlan::make(1e-3, 3464, 0, wf0, {});
  const auto rec = integrate_trajectory(wf0, FreePotential{}, {}, Particle::at(1.3), plan);
  for (std::size_t i = 0; i < rec.size(); i += 500) {
    const double t = rec.times[i];
    const double expect = 1.3 * std::sqrt(1.0 + t * t / 4.0);
    EXPECT_NEAR(rec.positions[i][0] / expect - 1.0, 0.0, 1e-6) << t;
  }
  EXPECT_NEAR(rec.times.back(), t_end, 1e-3);
}

TEST(Trajectory, stationary_real_state_holds_the_particle) {
  const Grid1D g = Grid1D::make(-10.0, 10.0, 256);
  const Wavefunction wf0 = harmonic_eigenstate(g, {1.0, 0.0}, {}, 0);
  const auto rec = integrate_trajectory(wf0, HarmonicPotential{1.0, 0.0}, {}, Particle::at(0.77),
                                        PropagationPlan::make(1e-3, 500, 0, wf0, {}));
  // What motion there is comes from the O(dt^2) breathing of the split-step
  // density, about 5e-8 at this step.
  EXPECT_NEAR(rec.positions.back()[0], 0.77, 1e-8);
}

TEST(Trajectory, plane_wave_wraps_around_the_domain) {
  const Grid1D g = Grid1D::make(0.0, 10.0, 128);
  const Wavefunction wf0 = plane_wave(g, 3);
  const double v = 2.0 * std::numbers::pi * 3.0 / 10.0;
  const auto plan = PropagationPlan::make(1e-3, 4000, 0, wf0, {});
  const auto rec = integrate_trajectory(wf0, FreePotential{}, {}, Particle::at(9.0), plan);
  EXPECT_NEAR(rec.positions.back()[0], g.wrap(9.0 + 4.0 * v), 1e-9);
  for (const auto& p : rec.positions) {
    EXPECT_GE(p[0], g.x_min());
    EXPECT_LT(p[0], g.x_max());
  }
}

TEST(Trajectory, starting_on_a_node_is_a_physics_error) {
  const Grid1D g = Grid1D::make(-8.0, 8.0, 256);
  const Wavefunction wf0 = harmonic_eigenstate(g, {1.0, 0.0}, {}, 1);
  EXPECT_THROW(integrate_trajectory(wf0, HarmonicPotential{1.0, 0.0}, {}, Particle::at(0.0),
                                    PropagationPlan::make(1e-3, 10, 0, wf0, {})),
               PhysicsError);
}

TEST(Trajectory, time_step_refinement_converges) {
  const Grid1D g = Grid1D::make(-10.0, 10.0, 256);
  const Wavefunction wf0 = init_state(
      g, SuperpositionState{{1.0, 0.0}, {{{std::sqrt(0.5), 0.0}, 0}, {{0.0, std::sqrt(0.5)}, 1}}},
      {});
  auto end = [&](double dt, std::size_t n) {
    return integrate_trajectory(wf0, HarmonicPotential{1.0, 0.0}, {}, Particle::at(0.4),
                                PropagationPlan::make(dt, n, 0, wf0, {}))
        .positions.back()[0];
  };
  const double ref = end(2e-4, 10000);
  const double e1 = std::abs(end(1.6e-3, 1250) - ref);
  const double e2 = std::abs(end(8e-4, 2500) - ref);
  EXPECT_LT(e2, 1e-6);
  EXPECT_GT(e1 / e2, 3.0);
}

TEST(Ensemble, results_do_not_depend_on_worker_count) {
  const Grid1D g = Grid1D::make(-10.0, 10.0, 256);
  const Wavefunction wf0 = init_state(
      g, SuperpositionState{{1.0, 0.0}, {{{std::sqrt(0.5), 0.0}, 0}, {{0.0, std::sqrt(0.5)}, 1}}},
      {});
  std::vector<Particle> ps;
  for (int i = 0; i < 37; ++i) ps.push_back(Particle::at(-2.0 + 0.11 * i));
  SchrodingerFlow f1(wf0, HarmonicPotential{1.0, 0.0}, {}, 1e-3);
  SchrodingerFlow f3(wf0, HarmonicPotential{1.0, 0.0}, {}, 1e-3);
  const auto a = integrate_ensemble(f1, ps, 1e-3, 200, 1, 50);
  const auto b = integrate_ensemble(f3, ps, 1e-3, 200, 3, 50);
  ASSERT_EQ(a.particles.size(), b.particles.size());
  for (std::size_t i = 0; i < ps.size(); ++i) {
    EXPECT_EQ(a.particles[i].coords[0], b.particles[i].coords[0]);
    EXPECT_EQ(a.records[i].positions, b.records[i].positions);
  }
  EXPECT_EQ(a.records[0].size(), 5u);
}

TEST(Lyapunov, benettin_recovers_an_exact_rate) {
  ExponentialPair pair(0.3);
  const auto est = benettin(pair, 1e-8, 1000.0);
  EXPECT_NEAR(est.lambda, 0.3, 1e-12);
  EXPECT_LT(est.residual, 1e-9);
  EXPECT_GT(est.renorm_count, 50u);
  EXPECT_EQ(est.times.size(), est.log_growth.size());
}

TEST(Lyapunov, argument_checks) {
  ExponentialPair pair(0.3);
  EXPECT_THROW(benettin(pair, 0.0, 10.0), ValidationError);
  EXPECT_THROW(benettin(pair, 1e-8, -1.0), ValidationError);
  EXPECT_THROW(benettin(pair, 1e-8, 10.0, 1.0), ValidationError);
  const Grid1D g = Grid1D::make(-10.0, 10.0, 128);
  SchrodingerFlow flow(harmonic_eigenstate(g, {1.0, 0.0}, {}, 0), HarmonicPotential{1.0, 0.0}, {},
                       1e-3);
  EXPECT_THROW(lyapunov_exponent(flow, Particle::at(0.5), 1e-16, 1.0, 1e-3), ValidationError);
}

TEST(Lyapunov, frozen_flow_has_zero_exponent) {
  const Grid1D g = Grid1D::make(-10.0, 10.0, 128);
  SchrodingerFlow flow(harmonic_eigenstate(g, {1.0, 0.0}, {}, 0), HarmonicPotential{1.0, 0.0}, {},
                       1e-3);
  const auto est = lyapunov_exponent(flow, Particle::at(0.5), 1e-6, 1.0, 1e-3);
  // Only the splitting's O(dt^2) breathing separates the pair.
  EXPECT_NEAR(est.lambda, 0.0, 1e-6);
}

TEST(ErgodicMoments, time_average_of_a_known_sequence) {
  std::vector<double> xs;
  for (int i = 0; i < 1000; ++i) xs.push_back((i + 0.5) / 1000.0);
  const std::vector<int> ks{1, 2};
  const std::vector<double> ens{0.5, 1.0 / 3.0};
  const auto rows = ergodic_moments(xs, ks, ens);
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_NEAR(rows[0].time_average, 0.5, 1e-12);
  EXPECT_NEAR(rows[1].time_average, 1.0 / 3.0, 1e-6);
  EXPECT_EQ(rows[1].ensemble_average, 1.0 / 3.0);
  EXPECT_THROW(ergodic_moments(std::span(xs).first(50), ks), ValidationError);
}
