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

#include <algorithm>
#include <vector>

#include <benchmark/benchmark.h>

#include "pilotwave/equilibrium.hpp"
#include "pilotwave/fixed_point.hpp"
#include "pilotwave/polar.hpp"
#include "pilotwave/propagator.hpp"
#include "pilotwave/trajectory.hpp"
#include "pilotwave/wavefield.hpp"

using namespace pilotwave;

namespace {

Wavefunction gaussian(std::size_t n) {
  return init_state(Grid1D::make(-20.0, 20.0, n), GaussianState{0.0, 1.0, 0.5}, {});
}

void BM_SplitStep(benchmark::State& state) {
  Wavefunction wf = gaussian(static_cast<std::size_t>(state.range(0)));
  const double dt = 0.5 * stability_limit(wf.gx(), 1.0, 1.0);
  const SplitStepPropagator prop(wf, HarmonicPotential{0.5, 0.0}, {}, dt);
  for (auto _ : state) {
    prop.step(wf);
    benchmark::DoNotOptimize(wf[0]);
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_SplitStep)->RangeMultiplier(4)->Range(256, 16384);

void BM_SplitStep2D(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const Wavefunction x = gaussian(n);
  const Wavefunction y = init_state(Grid1D::make(-10.0, 20.0, n), GaussianState{0.0, 0.5, 0.0}, {});
  Wavefunction wf = product_state(x, y);
  const double dt = 0.5 * std::min(stability_limit(x.gx(), 1.0, 1.0), stability_limit(y.gx(), 1.0, 1.0));
  const SplitStepPropagator prop(wf, FreePotential{}, {}, dt);
  for (auto _ : state) {
    prop.step(wf);
    benchmark::DoNotOptimize(wf[0]);
  }
}
BENCHMARK(BM_SplitStep2D)->Arg(256)->Arg(512);

void BM_PolarDecompose(benchmark::State& state) {
  const Wavefunction wf = gaussian(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(polar_decompose(wf, {}));
}
BENCHMARK(BM_PolarDecompose)->Arg(512)->Arg(4096);

void BM_EnsembleStep(benchmark::State& state) {
  const Wavefunction wf = gaussian(512);
  const auto members = static_cast<std::size_t>(state.range(0));
  const auto e = sample_ensemble(wf, members, Provenance::kBorn, 1);
  std::vector<Particle> particles;
  for (const double x : e.positions) particles.push_back(Particle::at(x));
  std::vector<std::uint8_t> failed(members, 0);
  std::vector<std::uint8_t> flags(members, 0);
  SchrodingerFlow flow(wf, FreePotential{}, {}, 1e-3);
  const auto workers = static_cast<unsigned>(state.range(1));
  for (auto _ : state) {
    const StepFields fields = flow.advance(1e-3);
    advance_members(particles, failed, flags, fields, 1e-3, workers);
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_EnsembleStep)->Args({10000, 1})->Args({10000, 4})->UseRealTime();

void BM_DoublingMap(benchmark::State& state) {
  RandomStream rng(1, 0);
  FixedFraction u = FixedFraction::random(rng, static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) {
    u.double_map();
    benchmark::DoNotOptimize(u.top_bits());
  }
}
BENCHMARK(BM_DoublingMap)->Arg(1024)->Arg(16384);

void BM_SequenceCycles(benchmark::State& state) {
  const Grid1D gx = Grid1D::make(-1.0, 3.0, 256);
  const Grid1D gy = Grid1D::make(-10.0, 20.0, 256);
  const Wavefunction wf =
      init_state(gx, PiecewiseDensityState{{{0.0, 1.0, 1.0}, {1.0, 2.0, 1.0}}, {}}, {});
  MeasurementChain chain{.observable = BinnedPosition{{0.0, 1.0, 2.0}},
                         .detector = DetectorSpec{gy, 0.5, 0.0},
                         .lambda = 1.0,
                         .duration = 5.0,
                         .mode = ReprepareMode::kBakerIdeal,
                         .n_measurements = 100,
                         .flow = {},
                         .min_steps = 32};
  SequenceOptions opt;
  opt.m = 100;
  for (auto _ : state) {
    benchmark::DoNotOptimize(sequence_experiment(chain, wf, {}, opt).slope);
  }
  state.SetItemsProcessed(state.iterations() * 100);
}
BENCHMARK(BM_SequenceCycles)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
