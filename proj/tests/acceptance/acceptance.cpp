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

// End-to-end acceptance run. Prints one PASS/FAIL line per criterion and
// exits nonzero if any criterion fails.
//
//   acceptance [--workers N] [--only K]

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "pilotwave/config.hpp"
#include "pilotwave/equilibrium.hpp"
#include "pilotwave/harness.hpp"
#include "pilotwave/measurement.hpp"
#include "pilotwave/propagator.hpp"
#include "pilotwave/wavefield.hpp"

using namespace pilotwave;
namespace fs = std::filesystem;

namespace {

struct Verdict {
  bool pass = false;
  std::string detail;
};

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4g", v);
  return buf;
}

class Clock {
 public:
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

// Appends "; runtime X s (limit L s)" and folds the limit into the verdict.
void runtime_limit(Verdict& v, const Clock& clock, double limit) {
  const double t = clock.seconds();
  v.detail += "; runtime " + num(t) + " s (limit " + num(limit) + " s)";
  v.pass = v.pass && t < limit;
}

RunOutput run(const std::string& yaml, unsigned workers) {
  return run_experiment(parse_config(yaml), RunOptions{workers});
}

double check_value(const RunOutput& out, const std::string& name, bool& pass) {
  const CheckResult* c = out.report.check(name);
  if (c == nullptr) {
    pass = false;
    return std::nan("");
  }
  pass = pass && c->pass;
  return c->value;
}

// ---------------------------------------------------------------------------

const char* kFreeGaussian = R"(
kind: propagate
seed: 1
grid: {x: {min: -20, max: 20, n: 512}}
state: {gaussian: {center: 0, sigma: 1}}
potential: {free: {}}
plan: {dt: 0.001, steps: 10000}
)";

Verdict unitarity(unsigned workers) {
  Clock clock;
  Verdict v{true, ""};
  const auto free = run(kFreeGaussian, workers);
  const double drift = check_value(free, "norm_conserved", v.pass);

  const Grid1D g = Grid1D::make(-10.0, 10.0, 256);
  const HarmonicBasis basis{1.0, 0.0};
  const Wavefunction ground = harmonic_eigenstate(g, basis, {}, 0);
  const auto res = propagate(ground, HarmonicPotential{1.0, 0.0}, {},
                             PropagationPlan::make(5e-5, 10000, 0, ground, {}));
  const auto rho0 = ground.density();
  const auto rho1 = res.final_state.density();
  double density_drift = 0.0;
  for (std::size_t i = 0; i < rho0.size(); ++i) {
    density_drift = std::max(density_drift, std::abs(rho1[i] - rho0[i]));
  }
  v.pass = v.pass && density_drift < 1e-9;
  v.detail = "free |norm-1| " + num(drift) + " (< 1e-8), ground-state density drift " +
             num(density_drift) + " (< 1e-9)";
  runtime_limit(v, clock, 10.0);
  return v;
}

Verdict guidance(unsigned workers) {
  Clock clock;
  // sigma doubles at t = sqrt(3) * 2 m sigma0^2 / hbar.
  const auto out = run(R"(
kind: trajectory
seed: 1
grid: {x: {min: -20, max: 20, n: 512}}
state: {gaussian: {center: 0, sigma: 1}}
potential: {free: {}}
plan: {dt: 0.001, steps: 3465}
trajectory: {x0: 1.0}
)",
                       workers);
  Verdict v{true, ""};
  const double err = check_value(out, "guidance_oracle", v.pass);
  v.detail = "max relative error " + num(err) + " (< 0.001) over t in [0, " +
             num(out.report.metric("steps").value_or(0.0) * 1e-3) + "]";
  runtime_limit(v, clock, 10.0);
  return v;
}

const char* kBornEnsemble = R"(
kind: equilibrium
seed: 3
grid: {x: {min: -20, max: 20, n: 512}}
state: {gaussian: {center: 0, sigma: 1}}
potential: {free: {}}
plan: {dt: 0.001}
equilibrium: {members: 10000, provenance: born, time: 3.4641016151377544}
)";

std::optional<RunOutput> born_run;

Verdict equivariance(unsigned workers) {
  Clock clock;
  born_run = run(kBornEnsemble, std::max(4u, workers));
  const double ks = born_run->report.metric("ks").value_or(1.0);
  const double aborted = born_run->report.metric("aborted").value_or(-1.0);
  Verdict v{ks < 0.05, "KS " + num(ks) + " (< 0.05) for 10000 members, " + num(aborted) +
                           " aborted"};
  runtime_limit(v, clock, 120.0);
  return v;
}

Verdict separation(unsigned) {
  const Grid1D gx = Grid1D::make(-1.0, 3.0, 256);
  const Grid1D gy = Grid1D::make(-10.0, 20.0, 256);
  const Wavefunction wf =
      init_state(gx, PiecewiseDensityState{{{0.0, 1.0, 1.0}, {1.0, 2.0, 1.0}}, {}}, {});
  const Observable obs(BinnedPosition{{0.0, 1.0, 2.0}}, gx, {});
  const DetectorSpec det{gy, 0.5, 0.0};
  // lambda * da * T = 6 sigma and 12 sigma.
  const VonNeumannMeasurement six(wf, det, obs, 1.0, 3.0);
  const VonNeumannMeasurement twelve(wf, det, obs, 1.0, 6.0);
  const double ratio = six.epsilon() / std::exp(-4.5);
  return {std::abs(ratio - 1.0) < 0.1 && twelve.epsilon() < 1e-6,
          "6 sigma: eps/e^-4.5 = " + num(ratio) + " (within 10%), 12 sigma: eps " +
              num(twelve.epsilon()) + " (< 1e-6)"};
}

std::string two_bin_measure(double w0, double w1, int runs) {
  return R"(
kind: measure
seed: 7
grid:
  x: {min: -1, max: 3, n: 256}
  y: {min: -10, max: 20, n: 256}
state:
  piecewise:
    intervals: [{lo: 0, hi: 1, weight: )" +
         num(w0) + "}, {lo: 1, hi: 2, weight: " + num(w1) + R"(}]
measurement:
  observable: {binned: {edges: [0, 1, 2]}}
  detector: {sigma: 0.5, center: 0}
  lambda: 1
  duration: 5
  runs: )" + std::to_string(runs) + "\n";
}

Verdict invariance(unsigned workers) {
  const auto out = run(two_bin_measure(0.5, 0.5, 100), workers);
  Verdict v{true, ""};
  const double shift = check_value(out, "position_invariance", v.pass);
  v.detail = "max |x(T) - x(0)| " + num(shift) + " over 100 runs (< 2 dx = " +
             num(2.0 * 4.0 / 256.0) + ")";
  return v;
}

Verdict born_frequencies(unsigned workers) {
  Clock clock;
  const auto out = run(two_bin_measure(0.25, 0.75, 1000), workers);
  Verdict v{true, ""};
  const double z = check_value(out, "born_frequencies", v.pass);
  v.detail = "worst deviation " + num(z) + " binomial sigma (<= 3) over 1000 runs";
  runtime_limit(v, clock, 300.0);
  return v;
}

Verdict bernoulli(unsigned workers) {
  const auto out = run(R"(
kind: lyapunov
seed: 42
grid: {x: {min: 0, max: 1, n: 64}}
lyapunov: {reference: bernoulli, delta0: 1.0e-8, window: 10000, seed_bits: 1024}
)",
                       workers);
  Verdict v{true, ""};
  const double lambda = check_value(out, "lyapunov_ln2", v.pass);
  const double ks = check_value(out, "orbit_uniform", v.pass);
  v.detail = "lambda " + num(lambda) + " (ln 2 +- 0.01), orbit KS " + num(ks) + " (< 0.02)";
  return v;
}

Verdict baker(unsigned) {
  const Grid1D gx = Grid1D::make(-1.0, 3.0, 256);
  const Grid1D gy = Grid1D::make(-10.0, 20.0, 256);
  const Wavefunction wf =
      init_state(gx, PiecewiseDensityState{{{0.0, 1.0, 1.0}, {1.0, 2.0, 1.0}}, {}}, {});
  MeasurementChain chain{.observable = BinnedPosition{{0.0, 1.0, 2.0}},
                         .detector = DetectorSpec{gy, 0.5, 0.0},
                         .lambda = 1.0,
                         .duration = 5.0,
                         .mode = ReprepareMode::kBakerIdeal,
                         .n_measurements = 1000,
                         .flow = {},
                         .min_steps = 32};
  SequenceOptions opt;
  opt.m = 1000;
  opt.seed = 8;
  const auto res = sequence_experiment(chain, wf, {}, opt);
  if (!res.initial_u || res.coordinates.size() != 1000) return {false, "no baker coordinates"};
  const auto orbit = bernoulli_shift(ShiftState{*res.initial_u}, 1000);
  double worst = 0.0;
  for (std::size_t i = 0; i < orbit.size(); ++i) {
    worst = std::max(worst, std::abs(res.coordinates[i] - orbit[i]));
  }
  return {worst < 1e-12, "max |u_n - 2^n u_0 mod 1| " + num(worst) + " over 1000 cycles (< 1e-12)"};
}

Verdict single_system(unsigned workers) {
  Clock clock;
  const auto out = run(R"(
kind: sequence
seed: 11
grid:
  x: {min: -1, max: 3, n: 256}
  y: {min: -10, max: 20, n: 256}
state:
  piecewise:
    intervals: [{lo: 0, hi: 1}, {lo: 1, hi: 2}]
measurement:
  observable: {binned: {edges: [0, 1, 2]}}
  detector: {sigma: 0.5, center: 0}
  lambda: 1
  duration: 5
sequence: {cycles: 10000, reprepare: baker_ideal}
)",
                       workers);
  Verdict v{true, ""};
  const double tv = check_value(out, "single_system_tv", v.pass);
  const double slope = check_value(out, "convergence_slope", v.pass);
  v.detail = "TV " + num(tv) + " (< 0.02), slope " + num(slope) + " (in [-0.65, -0.35])";
  runtime_limit(v, clock, 600.0);
  return v;
}

// Uniform |Psi|^2 on a ring in the potential cos(x): the density thins over
// the maximum and piles up at the minimum without reaching zero by t = 1.
std::string ramp_config() {
  const Grid1D g = Grid1D::make(0.0, 2.0 * std::numbers::pi, 128);
  std::string table;
  for (std::size_t i = 0; i < g.size(); ++i) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%s%.17g", i == 0 ? "" : ", ", std::cos(g.point(i)));
    table += buf;
  }
  char two_pi[40];
  std::snprintf(two_pi, sizeof two_pi, "%.17g", 2.0 * std::numbers::pi);
  return std::string(R"(
kind: equilibrium
seed: 5
grid: {x: {min: 0, max: )") +
         two_pi + R"(, n: 128}}
state: {piecewise: {intervals: [{lo: 0, hi: )" +
         two_pi + R"(}]}}
potential: {tabulated: {values: [)" +
         table + R"(]}}
plan: {dt: 0.0005}
equilibrium:
  members: 2000
  provenance: custom
  custom: {id: ramp, ramp: {lo: 0, hi: )" +
         two_pi + R"(}}
  time: 1.0
  record_every: 50
)";
}

Verdict f_constancy(unsigned workers) {
  Verdict v{true, ""};
  const auto ramp = run(ramp_config(), workers);
  const double drift = check_value(ramp, "f_constant_along_trajectories", v.pass);
  if (!born_run) born_run = run(kBornEnsemble, std::max(4u, workers));
  const double dev = check_value(*born_run, "f_equals_one", v.pass);
  const CheckResult* c = born_run->report.check("f_equals_one");
  v.detail = "ramp ensemble max drift " + num(drift) + " (< 0.02), born ensemble max |f-1| sqrt(n p) " +
             num(dev) + " (" + (c != nullptr ? c->bound : std::string("?")) + ")";
  return v;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

Verdict determinism(unsigned workers) {
  const std::vector<std::string> configs{
      two_bin_measure(0.25, 0.75, 200), ramp_config(),
      R"(
kind: sequence
seed: 12
grid:
  x: {min: -1, max: 3, n: 256}
  y: {min: -10, max: 20, n: 256}
state: {piecewise: {intervals: [{lo: 0, hi: 1, weight: 0.3}, {lo: 1, hi: 2, weight: 0.7}]}}
measurement:
  observable: {binned: {edges: [0, 1, 2]}}
  detector: {sigma: 0.5, center: 0}
  lambda: 1
  duration: 5
sequence: {cycles: 500}
)",
      R"(
kind: propagate
seed: 2
grid: {x: {min: -20, max: 20, n: 256}}
state: {gaussian: {center: -2, sigma: 1, k0: 1.5}}
plan: {dt: 0.002, steps: 500, snapshot_every: 100}
)"};
  const fs::path root = fs::temp_directory_path() / "pilotwave_acceptance_determinism";
  std::size_t files = 0;
  std::string mismatch;
  for (std::size_t k = 0; k < configs.size(); ++k) {
    const auto cfg = parse_config(configs[k]);
    // The second run uses a different worker count on purpose.
    auto a = run_experiment(cfg, RunOptions{1});
    auto b = run_experiment(cfg, RunOptions{std::max(2u, workers)});
    const fs::path da = root / (std::to_string(k) + "a");
    const fs::path db = root / (std::to_string(k) + "b");
    fs::remove_all(da);
    fs::remove_all(db);
    write_outputs(a.report, a.artifacts, da);
    write_outputs(b.report, b.artifacts, db);
    for (const auto& art : a.artifacts) {
      ++files;
      if (slurp(da / art.filename) != slurp(db / art.filename)) {
        mismatch += " " + a.report.kind + "/" + art.filename;
      }
    }
  }
  fs::remove_all(root);
  return {mismatch.empty() && files > 0,
          std::to_string(files) + " data files compared" +
              (mismatch.empty() ? std::string(", all byte-identical") : ", differ:" + mismatch)};
}

struct Criterion {
  int id;
  const char* name;
  std::function<Verdict(unsigned)> fn;
};

}  // namespace

int main(int argc, char** argv) {
  unsigned workers = 4;
  int only = 0;
  for (int i = 1; i < argc; ++i) {
    const std::string a = argv[i];
    if (a == "--workers" && i + 1 < argc) {
      workers = static_cast<unsigned>(std::max(1, std::atoi(argv[++i])));
    } else if (a == "--only" && i + 1 < argc) {
      only = std::atoi(argv[++i]);
    } else {
      std::fprintf(stderr, "usage: acceptance [--workers N] [--only K]\n");
      return 2;
    }
  }

  const std::vector<Criterion> criteria{
      {1, "unitarity_and_stationarity", unitarity},
      {2, "guidance_oracle", guidance},
      {3, "equivariance", equivariance},
      {4, "packet_separation", separation},
      {5, "position_invariance", invariance},
      {6, "born_frequencies", born_frequencies},
      {7, "bernoulli_shift", bernoulli},
      {8, "baker_cycle_equivalence", baker},
      {9, "single_system_born_rule", single_system},
      {10, "f_constancy", f_constancy},
      {11, "determinism", determinism},
  };

  int failed = 0;
  for (const auto& c : criteria) {
    if (only != 0 && c.id != only) continue;
    Clock clock;
    Verdict v;
    try {
      v = c.fn(workers);
    } catch (const std::exception& e) {
      v = {false, std::string("error: ") + e.what()};
    }
    failed += v.pass ? 0 : 1;
    std::printf("%s criterion %2d %s: %s [%.1f s]\n", v.pass ? "PASS" : "FAIL", c.id, c.name,
                v.detail.c_str(), clock.seconds());
    std::fflush(stdout);
  }
  std::printf("%d criteria failed\n", failed);
  return failed == 0 ? 0 : 1;
}
