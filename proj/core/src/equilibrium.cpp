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

#include "pilotwave/equilibrium.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include <boost/math/special_functions/erf.hpp>

#include "pilotwave/error.hpp"
#include "pilotwave/interpolate.hpp"
#include "pilotwave/rng.hpp"

namespace pilotwave {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr double kMaxAbortFraction = 1e-3;
constexpr std::size_t kCellsPerFBin = 4;
constexpr double kFamilyWiseFalseAlarm = 1e-3;
constexpr int kMassSnapBits = 40;

void require_1d(const Wavefunction& wf, const char* what) {
  if (wf.is_2d()) throw ValidationError(std::string(what) + ": ensembles live on a 1D grid");
}

}  // namespace

Ensemble sample_ensemble(const Wavefunction& wf, std::size_t n, Provenance provenance,
                         std::uint64_t seed, const CustomDensity* custom) {
  require_1d(wf, "sample_ensemble");
  if (n < 1) throw ValidationError("sample_ensemble: n must be at least 1");
  Ensemble e;
  e.provenance = provenance;
  std::vector<double> density;
  if (provenance == Provenance::kBorn) {
    density = wf.density();
  } else {
    if (custom == nullptr) throw ValidationError("sample_ensemble: custom density missing");
    if (custom->values.size() != wf.size()) {
      throw ValidationError("sample_ensemble: custom density does not match the grid");
    }
    double total = 0.0;
    for (const double v : custom->values) {
      if (!(std::isfinite(v) && v >= 0.0)) {
        throw ValidationError("custom density not normalizable: negative or non-finite value");
      }
      total += v;
    }
    if (!(total > 0.0 && std::isfinite(total))) {
      throw ValidationError("custom density not normalizable: zero total mass");
    }
    density = custom->values;
    e.density_id = custom->id;
  }
  const GridCdf cdf(wf.gx(), density);
  e.positions.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    RandomStream rng(seed, streams::kEnsembleBase + i);
    e.positions[i] = cdf.inverse(rng.uniform());
  }
  return e;
}

EvolvedEnsemble evolve_ensemble(const Ensemble& e, const EvolutionSetup& setup, double T) {
  require_1d(setup.wf0, "evolve_ensemble");
  if (e.positions.empty()) throw ValidationError("evolve_ensemble: empty ensemble");
  if (!(T >= e.t)) throw ValidationError("evolve_ensemble: T precedes the ensemble time");
  if (!(setup.dt > 0.0)) throw ValidationError("evolve_ensemble: dt must be positive");
  const double span = T - e.t;
  const auto n_steps = static_cast<std::size_t>(std::ceil(span / setup.dt - 1e-9));
  const double dt = n_steps > 0 ? span / static_cast<double>(n_steps) : setup.dt;

  SchrodingerFlow flow(setup.wf0, setup.potential, setup.params, dt, e.t);
  const std::size_t n = e.positions.size();
  std::vector<Particle> particles(n);
  std::vector<std::uint8_t> failed(n, 0);
  std::vector<std::uint8_t> flags(n, 0);
  for (std::size_t i = 0; i < n; ++i) {
    particles[i] = Particle::at(e.positions[i], e.t);
    if (flow.current().in_node_region(particles[i].position())) failed[i] = 1;
  }

  EvolvedEnsemble out{Ensemble{}, setup.wf0, {}, {}, {}};
  const bool record = setup.record_every > 0;
  std::vector<TrajectoryRecord> records;
  auto take_record = [&](const VelocityField& field, const std::vector<std::uint8_t>& step_flags) {
    for (std::size_t i = 0; i < n; ++i) {
      auto& r = records[i];
      r.times.push_back(particles[i].t);
      r.positions.push_back(particles[i].coords);
      VelocitySample v;
      if (!failed[i]) {
        try {
          v = field.sample(particles[i].position());
        } catch (const PhysicsError&) {
          v.v = {kNaN, kNaN};
        }
      }
      r.velocities.push_back(v.v);
      r.flags.push_back(step_flags[i]);
    }
    out.snapshots.push_back(Snapshot{flow.time(), flow.wavefunction()});
  };
  if (record) {
    records.resize(n);
    take_record(flow.current(), flags);
  }

  for (std::size_t s = 1; s <= n_steps; ++s) {
    const StepFields fields = flow.advance(dt);
    std::fill(flags.begin(), flags.end(), 0);
    advance_members(particles, failed, flags, fields, dt, setup.workers);
    if (record && (s % setup.record_every == 0 || s == n_steps)) take_record(*fields.end, flags);
  }

  out.wf = flow.wavefunction();
  out.ensemble.provenance = e.provenance;
  out.ensemble.density_id = e.density_id;
  out.ensemble.t = T;
  for (std::size_t i = 0; i < n; ++i) {
    if (failed[i]) {
      out.aborted.push_back(i);
      continue;
    }
    out.ensemble.positions.push_back(particles[i].coords[0]);
    if (record) out.records.push_back(std::move(records[i]));
  }
  if (static_cast<double>(out.aborted.size()) > kMaxAbortFraction * static_cast<double>(n)) {
    throw PhysicsError("evolve_ensemble: " + std::to_string(out.aborted.size()) + " of " +
                       std::to_string(n) + " members hit a node");
  }
  return out;
}

FSummary f_statistics(const Ensemble& e, const Wavefunction& wf,
                      const FTrajectories* trajectories) {
  require_1d(wf, "f_statistics");
  const std::size_t n = e.positions.size();
  if (n < 1000) throw ValidationError("f_statistics: need at least 1000 members");
  const Grid1D& grid = wf.gx();
  const double norm = wf.norm_squared();
  auto rho = wf.density();
  for (auto& r : rho) r /= norm;
  const double floor = kRelativeDensityFloor * *std::max_element(rho.begin(), rho.end());

  const auto counts = histogram(e.positions, grid, kCellsPerFBin);
  const std::size_t bins = counts.size();
  std::vector<double> mass(bins, 0.0);
  for (std::size_t i = 0; i < rho.size(); ++i) {
    if (rho[i] >= floor) mass[i / kCellsPerFBin] += rho[i] * grid.dx();
  }

  FSummary s;
  double empty_mass = 0.0;
  double f_sum = 0.0;
  std::size_t f_count = 0;
  const double dn = static_cast<double>(n);
  for (std::size_t b = 0; b < bins; ++b) {
    if (!(mass[b] > 0.0)) continue;
    if (counts[b] == 0.0) empty_mass += mass[b];
    const double f = counts[b] / dn / mass[b];
    const double lo = grid.point(b * kCellsPerFBin);
    const double width = static_cast<double>(
        std::min(kCellsPerFBin, grid.size() - b * kCellsPerFBin)) * grid.dx();
    s.bin_centers.push_back(lo + 0.5 * width);
    s.f.push_back(f);
    s.mass.push_back(mass[b]);
    s.expected.push_back(dn * mass[b]);
    if (dn * mass[b] >= 5.0) {
      s.max_scaled_deviation =
          std::max(s.max_scaled_deviation, std::abs(f - 1.0) * std::sqrt(dn * mass[b]));
      f_sum += f;
      ++f_count;
    }
  }
  s.checked_bins = f_count;
  if (f_count > 0) {
    s.sampling_bound = std::sqrt(2.0) *
        boost::math::erfc_inv(kFamilyWiseFalseAlarm / static_cast<double>(f_count));
  }
  if (empty_mass > 0.5) {
    throw ValidationError("f_statistics: undersampled, " + std::to_string(empty_mass) +
                          " of the |Psi|^2 mass lies in empty bins");
  }
  s.mean_f = f_count > 0 ? f_sum / static_cast<double>(f_count) : kNaN;

  if (trajectories != nullptr) {
    const auto& recs = trajectories->records;
    const auto& snaps = trajectories->snapshots;
    if (recs.size() < 3) throw ValidationError("f_statistics: need at least three trajectories");
    if (trajectories->p0.size() != recs.size()) {
      throw ValidationError("f_statistics: one initial density per trajectory is required");
    }
    const std::size_t steps = recs.front().size();
    for (const auto& r : recs) {
      if (r.size() != steps) throw ValidationError("f_statistics: ragged trajectory records");
    }
    if (snaps.size() != steps) {
      throw ValidationError("f_statistics: one snapshot per record time is required");
    }
    std::vector<std::vector<double>> snap_density;
    for (const auto& sn : snaps) {
      auto d = sn.wf.density();
      const double nn = sn.wf.norm_squared();
      for (auto& v : d) v /= nn;
      snap_density.push_back(std::move(d));
    }
    const FieldShape shape{grid, std::nullopt};
    for (std::size_t i = 1; i + 1 < recs.size(); ++i) {
      const double dx0 = recs[i + 1].positions[0][0] - recs[i - 1].positions[0][0];
      double f0 = 0.0;
      double drift = 0.0;
      for (std::size_t k = 0; k < steps; ++k) {
        const double dxt = recs[i + 1].positions[k][0] - recs[i - 1].positions[k][0];
        // 1D continuity: P(x(t), t) dx(t) = P(x(0), 0) dx(0).
        const double p = trajectories->p0[i] * dx0 / dxt;
        const double x = recs[i].positions[k][0];
        const double psi2 = interpolate(snap_density[k], shape, std::span<const double>(&x, 1));
        const double f = p / psi2;
        if (k == 0) {
          f0 = f;
        } else {
          drift = std::max(drift, std::abs(f / f0 - 1.0));
        }
      }
      s.trajectory_drift.push_back(drift);
      s.max_drift = std::max(s.max_drift, drift);
    }
  }
  return s;
}

DistributionStats compare_distributions(const Ensemble& samples, const Grid1D& grid,
                                        std::span<const double> reference) {
  if (samples.positions.size() < 10) {
    throw ValidationError("compare_distributions: need at least 10 samples");
  }
  if (reference.size() != grid.size()) {
    throw ValidationError("compare_distributions: reference does not match the grid");
  }
  const double total = std::accumulate(reference.begin(), reference.end(), 0.0) * grid.dx();
  if (std::abs(total - 1.0) > 1e-6) {
    throw ValidationError("compare_distributions: reference integrates to " +
                          std::to_string(total) + ", not 1");
  }
  return density_stats(samples.positions, grid, reference);
}

// ---------------------------------------------------------------------------
// Doubling map.

ShiftState shift_state_from_seed(std::span<const std::uint64_t> seed_words,
                                 std::size_t width_bits) {
  if (seed_words.empty()) throw ValidationError("shift seed: no seed material");
  std::uint64_t key = 0;
  for (const auto w : seed_words) key = mix64(key ^ w);
  RandomStream rng(key, streams::kShiftSeed);
  return ShiftState{FixedFraction::random(rng, width_bits)};
}

ShiftPair::ShiftPair(const ShiftState& s) : a_(s.value), b_(s.value) {}

double ShiftPair::step() {
  a_.double_map();
  b_.double_map();
  return 1.0;
}

double ShiftPair::separation() const {
  FixedFraction d = b_;
  d.subtract(a_);
  const double x = d.to_double();
  return std::min(x, 1.0 - x);
}

void ShiftPair::rescale(double target) {
  FixedFraction d = b_;
  d.subtract(a_);
  const bool forward = d.to_double() <= 0.5;
  const FixedFraction delta = FixedFraction::from_double(target, a_.width_bits());
  b_ = a_;
  if (forward) {
    b_.add(delta);
  } else {
    b_.subtract(delta);
  }
}

double ShiftPair::min_delta() const { return 10.0 * std::numeric_limits<double>::epsilon(); }

LyapunovEstimate bernoulli_lyapunov(const ShiftState& s, double delta0, std::size_t iterates) {
  if (s.width_bits() < iterates + 64) {
    throw ValidationError("bernoulli_lyapunov: state too narrow for the requested iterates");
  }
  ShiftPair pair(s);
  return benettin(pair, delta0, static_cast<double>(iterates));
}

// ---------------------------------------------------------------------------
// Sequence experiment.

std::size_t baker_width_bits(std::span<const double> masses, std::size_t m) {
  double worst = 1.0;
  for (const double w : masses) {
    if (w > 0.0) worst = std::max(worst, std::log2(1.0 / w));
  }
  return static_cast<std::size_t>(std::ceil(static_cast<double>(m) * worst)) + 128;
}

namespace {

std::vector<double> block_lengths_for(std::size_t m) {
  std::vector<double> out;
  for (std::size_t decade = 10; decade <= m; decade *= 10) {
    for (const std::size_t k : {1, 2, 5}) {
      const std::size_t len = decade * k;
      if (len * 4 <= m) out.push_back(static_cast<double>(len));
    }
  }
  return out;
}

double tv_of_counts(std::span<const double> counts, std::span<const double> masses,
                    double total) {
  double s = 0.0;
  for (std::size_t i = 0; i < counts.size(); ++i) s += std::abs(counts[i] / total - masses[i]);
  return std::min(1.0, 0.5 * s);
}

}  // namespace

SequenceResult sequence_experiment(const MeasurementChain& chain, const Wavefunction& wf0,
                                   const PhysicalParams& params, const SequenceOptions& opts) {
  require_1d(wf0, "sequence_experiment");
  if (opts.m < 100) throw ValidationError("sequence_experiment: M must be at least 100");
  chain.detector.validate();
  const Wavefunction target = normalized(wf0);
  const Grid1D& grid = target.gx();
  const Observable obs(chain.observable, grid, params);

  SequenceResult res;
  res.target_masses = obs.weights(target);
  const std::size_t k = obs.outcomes();
  res.counts.assign(k, 0.0);

  const VonNeumannMeasurement meas(target, chain.detector, obs, chain.lambda, chain.duration,
                                   chain.min_steps);
  res.epsilon = meas.epsilon();
  if (!(meas.epsilon() < kDisjointOverlap)) {
    throw ValidationError("sequence_experiment: packets overlap (epsilon = " +
                          std::to_string(meas.epsilon()) + "), outcomes are not disjoint");
  }

  const auto rho_t = target.density();
  const GridCdf cdf(grid, rho_t);
  RandomStream pos_rng(opts.seed, streams::kInitialPosition);
  RandomStream det_rng(opts.seed, streams::kDetector);

  const bool exact = chain.mode == ReprepareMode::kBakerIdeal && obs.binned();
  FixedFraction u;
  std::vector<std::uint64_t> lattice;
  double x = 0.0;
  if (exact) {
    const std::size_t width = baker_width_bits(res.target_masses, opts.m);
    u = opts.x0 ? FixedFraction::from_double(std::min(cdf.cdf(*opts.x0), 1.0 - 1e-16), width)
                : FixedFraction::random(pos_rng, width);
    res.initial_u = u;
    x = cdf.inverse(u.to_double());
    double acc = 0.0;
    lattice.push_back(0);
    for (std::size_t n = 0; n < k; ++n) {
      acc += res.target_masses[n];
      // Grid quadrature leaves ~1e-16 of noise on the masses; snapping it
      // away keeps dyadic masses dyadic.
      const double snapped = std::ldexp(std::round(std::ldexp(acc, kMassSnapBits)), -kMassSnapBits);
      lattice.push_back(n + 1 == k ? (std::uint64_t{1} << kEdgeBits)
                                   : quantize_edge(std::min(snapped, 1.0)));
    }
  } else {
    x = opts.x0 ? *opts.x0 : cdf.inverse(pos_rng.uniform());
  }

  std::vector<std::optional<Wavefunction>> restricted(k);
  std::vector<double> discarded(k, 0.0);
  std::vector<double> positions;
  positions.reserve(opts.m);
  std::vector<std::size_t> outcomes;
  outcomes.reserve(opts.m);
  res.log.reserve(opts.m);
  res.curve.reserve(opts.m);

  for (std::size_t c = 0; c < opts.m; ++c) {
    try {
      const double y0 = opts.y0 ? *opts.y0 : draw_detector_y(chain.detector, det_rng);
      positions.push_back(x);
      const auto r = meas.run(Particle::at(x), y0);
      OutcomeRecord out = r.outcome;
      const std::size_t n = out.index;
      if (!restricted[n]) {
        OutcomeRecord probe = out;
        restricted[n] = restrict_support(meas.wavefunction(), probe, obs);
        discarded[n] = probe.discarded_weight;
      }
      out.discarded_weight = discarded[n];

      if (exact) {
        const std::uint64_t lo = lattice[n];
        const std::uint64_t width = lattice[n + 1] - lo;
        const std::uint64_t top = u.top_bits();
        if (top < lo || top - lo >= width) {
          throw PhysicsError("baker coordinate disagrees with the measured outcome");
        }
        u.stretch(lo, width);
        x = cdf.inverse(u.to_double());
      } else {
        const auto rep = reprepare(*restricted[n], Particle::at(r.particle.coords[0]), chain.mode,
                                   target, params, chain.flow);
        x = rep.particle.coords[0];
      }
      res.coordinates.push_back(cdf.cdf(x));
      res.counts[n] += 1.0;
      outcomes.push_back(n);
      res.log.push_back(out);

      const double m = static_cast<double>(c + 1);
      ConvergencePoint pt;
      pt.m = c + 1;
      pt.tv = tv_of_counts(res.counts, res.target_masses, m);
      double cp = 0.0, cq = 0.0;
      for (std::size_t j = 0; j < k; ++j) {
        cp += res.counts[j] / m;
        cq += res.target_masses[j];
        pt.ks = std::max(pt.ks, std::abs(cp - cq));
      }
      res.curve.push_back(pt);
    } catch (const Error& e) {
      throw PhysicsError("sequence cycle " + std::to_string(c) + ": " + e.what());
    }
  }

  res.outcome_stats = categorical_stats(res.counts, res.target_masses);
  res.position_stats = density_stats(positions, grid, rho_t);

  res.block_lengths = block_lengths_for(opts.m);
  std::vector<double> block_counts(k);
  for (const double len_d : res.block_lengths) {
    const auto len = static_cast<std::size_t>(len_d);
    const std::size_t blocks = opts.m / len;
    double sum = 0.0;
    for (std::size_t b = 0; b < blocks; ++b) {
      std::fill(block_counts.begin(), block_counts.end(), 0.0);
      for (std::size_t i = b * len; i < (b + 1) * len; ++i) block_counts[outcomes[i]] += 1.0;
      sum += tv_of_counts(block_counts, res.target_masses, len_d);
    }
    res.block_tv.push_back(sum / static_cast<double>(blocks));
  }
  std::size_t positive = 0;
  for (const double v : res.block_tv) positive += v > 0.0;
  res.slope = positive >= 2 ? loglog_slope(res.block_lengths, res.block_tv) : kNaN;
  return res;
}

}  // namespace pilotwave
