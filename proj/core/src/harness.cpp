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

#include "pilotwave/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <cmath>
#include <numbers>
#include <system_error>

#include <json.hpp>

#include "pilotwave/equilibrium.hpp"
#include "pilotwave/error.hpp"
#include "pilotwave/measurement.hpp"
#include "pilotwave/parallel.hpp"
#include "pilotwave/propagator.hpp"
#include "pilotwave/rng.hpp"
#include "pilotwave/stats.hpp"
#include "pilotwave/trajectory.hpp"

namespace pilotwave {

bool RunReport::all_passed() const {
  return std::all_of(checks.begin(), checks.end(), [](const CheckResult& c) { return c.pass; });
}

const CheckResult* RunReport::check(const std::string& name) const {
  for (const auto& c : checks) {
    if (c.name == name) return &c;
  }
  return nullptr;
}

std::optional<double> RunReport::metric(const std::string& name) const {
  for (const auto& [k, v] : metrics) {
    if (k == name) return v;
  }
  return std::nullopt;
}

namespace {

constexpr double kNormTolerance = 1e-8;
constexpr double kGuidanceTolerance = 1e-3;
constexpr double kBornSigmas = 3.0;
constexpr double kInvarianceCells = 2.0;
constexpr double kSequenceTv = 0.02;
constexpr double kSlopeLo = -0.65;
constexpr double kSlopeHi = -0.35;
constexpr double kDriftTolerance = 0.02;
constexpr double kLyapunovTolerance = 0.01;
constexpr double kOrbitKs = 0.02;

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", v);
  return buf;
}

class Pipeline {
 public:
  Pipeline(const ExperimentConfig& cfg, const RunOptions& opt)
      : cfg_(cfg), opt_(opt), meta_{cfg.hash, cfg.seed, std::string(kind_name(cfg.kind))} {
    out_.report.kind = meta_.kind;
    out_.report.config_hash = cfg.hash;
    out_.report.seed = cfg.seed;
    out_.report.workers = std::max(1u, opt.workers);
    out_.report.warnings = cfg.warnings;
  }

  RunOutput run() {
    switch (cfg_.kind) {
      case ExperimentKind::kPropagate: propagate_run(); break;
      case ExperimentKind::kTrajectory: trajectory_run(); break;
      case ExperimentKind::kMeasure: measure_run(); break;
      case ExperimentKind::kSequence: sequence_run(); break;
      case ExperimentKind::kEquilibrium: equilibrium_run(); break;
      case ExperimentKind::kLyapunov: lyapunov_run(); break;
    }
    return std::move(out_);
  }

 private:
  void metric(const std::string& name, double v) { out_.report.metrics.emplace_back(name, v); }
  void check(const std::string& name, bool pass, double value, const std::string& bound) {
    out_.report.checks.push_back(CheckResult{name, pass, value, bound});
  }
  void emit(Artifact a) { out_.artifacts.push_back(std::move(a)); }

  Wavefunction initial_state() const { return init_state(cfg_.x_grid(), *cfg_.state, cfg_.physics); }

  void propagate_run() {
    const Wavefunction wf0 = initial_state();
    const auto plan = PropagationPlan::make(cfg_.plan.dt, cfg_.plan.steps, cfg_.plan.snapshot_every,
                                            wf0, cfg_.physics);
    auto res = propagate(wf0, cfg_.potential, cfg_.physics, plan);
    const double drift = std::abs(res.final_state.norm() - 1.0);
    metric("final_time", cfg_.plan.dt * static_cast<double>(cfg_.plan.steps));
    metric("norm_drift", drift);
    check("norm_conserved", drift < kNormTolerance, drift, "< " + fmt(kNormTolerance));
    std::vector<Snapshot> snaps = std::move(res.snapshots);
    if (snaps.empty()) {
      snaps.push_back(Snapshot{0.0, wf0});
      snaps.push_back(Snapshot{plan.dt * static_cast<double>(plan.n_steps), res.final_state});
    }
    emit(snapshot_artifact(meta_, snaps));
  }

  void trajectory_run() {
    const Wavefunction wf0 = initial_state();
    const auto plan = PropagationPlan::make(cfg_.plan.dt, cfg_.plan.steps, 0, wf0, cfg_.physics);
    const auto rec = integrate_trajectory(wf0, cfg_.potential, cfg_.physics,
                                          Particle::at(*cfg_.trajectory_x0), plan);
    std::size_t flagged = 0;
    for (const auto f : rec.flags) flagged += f != 0;
    metric("steps", static_cast<double>(rec.size()));
    metric("flagged_steps", static_cast<double>(flagged));
    metric("x_final", rec.positions.back()[0]);

    // Free Gaussian: x(t) = c + hbar k0 t / m + (x0 - c) sigma(t) / sigma0.
    const auto* g = std::get_if<GaussianState>(&*cfg_.state);
    if (g != nullptr && std::holds_alternative<FreePotential>(cfg_.potential) &&
        *cfg_.trajectory_x0 != g->center) {
      const double tau = 2.0 * cfg_.physics.m_x * g->sigma * g->sigma / cfg_.physics.hbar;
      const Grid1D grid = cfg_.x_grid();
      double worst = 0.0;
      for (std::size_t i = 0; i < rec.size(); ++i) {
        const double t = rec.times[i];
        const double c = g->center + cfg_.physics.hbar * g->k0 * t / cfg_.physics.m_x;
        const double offset = (*cfg_.trajectory_x0 - g->center) * std::sqrt(1.0 + (t / tau) * (t / tau));
        double err = rec.positions[i][0] - grid.wrap(c + offset);
        err -= grid.length() * std::round(err / grid.length());
        worst = std::max(worst, std::abs(err) / std::abs(offset));
      }
      check("guidance_oracle", worst < kGuidanceTolerance, worst, "< " + fmt(kGuidanceTolerance));
    }
    emit(trajectory_artifact(meta_, rec));
  }

  void measure_run() {
    const auto& m = *cfg_.measurement;
    const Wavefunction wf = initial_state();
    const Observable obs(m.observable, cfg_.x_grid(), cfg_.physics);
    const DetectorSpec det = cfg_.detector();
    const VonNeumannMeasurement vn(wf, det, obs, m.lambda, m.duration, m.min_steps);
    const std::size_t runs = m.runs;

    std::vector<double> xs(runs);
    if (m.x0) {
      std::fill(xs.begin(), xs.end(), *m.x0);
    } else {
      xs = sample_ensemble(wf, runs, Provenance::kBorn, cfg_.seed).positions;
    }
    std::vector<double> ys(runs);
    RandomStream det_rng(cfg_.seed, streams::kDetector);
    for (auto& y : ys) y = m.y0 ? *m.y0 : draw_detector_y(det, det_rng);

    std::vector<OutcomeRecord> log(runs);
    parallel_for(runs, opt_.workers, [&](std::size_t r) {
      log[r] = vn.run(Particle::at(xs[r]), ys[r]).outcome;
    });

    const auto weights = obs.weights(wf);
    std::vector<double> counts(obs.outcomes(), 0.0);
    double max_shift = 0.0;
    for (const auto& rec : log) {
      counts[rec.index] += 1.0;
      max_shift = std::max(max_shift, std::abs(rec.particle_at_end[0] - rec.x_start));
    }
    double worst_z = 0.0;
    const double n = static_cast<double>(runs);
    for (std::size_t k = 0; k < counts.size(); ++k) {
      const double p = weights[k];
      const double sd = std::sqrt(p * (1.0 - p) / n);
      const double dev = std::abs(counts[k] / n - p);
      worst_z = std::max(worst_z, sd > 0.0 ? dev / sd : (dev > 0.0 ? INFINITY : 0.0));
    }
    metric("epsilon", vn.epsilon());
    metric("coupling_steps", static_cast<double>(vn.steps()));
    if (!m.x0) {
      check("born_frequencies", worst_z <= kBornSigmas, worst_z,
            "<= " + fmt(kBornSigmas) + " binomial sigma");
    }
    if (obs.binned()) {
      const double bound = kInvarianceCells * cfg_.x_grid().dx();
      metric("max_position_change", max_shift);
      check("position_invariance", max_shift < bound, max_shift, "< " + fmt(bound));
    }
    emit(outcome_log_artifact(meta_, log));
    emit(frequency_artifact(obs, weights, counts));
  }

  Artifact frequency_artifact(const Observable& obs, std::span<const double> probs,
                              std::span<const double> counts) const {
    double total = 0.0;
    for (const double c : counts) total += c;
    TableWriter w(meta_, "outcome statistics",
                  {{"outcome_index", "1"},
                   {"outcome_value", "observable"},
                   {"probability", "1"},
                   {"count", "1"},
                   {"frequency", "1"}});
    for (std::size_t k = 0; k < counts.size(); ++k) {
      w.row({static_cast<double>(k), obs.value(k), probs[k], counts[k],
             total > 0.0 ? counts[k] / total : 0.0});
    }
    return w.finish("stats.dat");
  }

  void sequence_run() {
    const auto& q = *cfg_.sequence;
    const Wavefunction wf0 = initial_state();
    const MeasurementChain chain = cfg_.chain();
    SequenceOptions so;
    so.m = q.cycles;
    so.seed = cfg_.seed;
    so.x0 = q.x0;
    so.y0 = q.y0;
    const auto res = sequence_experiment(chain, wf0, cfg_.physics, so);
    const double tv = res.outcome_stats.total_variation;
    metric("tv", tv);
    metric("ks", res.curve.empty() ? 0.0 : res.curve.back().ks);
    metric("chi2_pvalue", res.outcome_stats.chi2_pvalue);
    metric("position_tv", res.position_stats.total_variation);
    metric("position_ks", res.position_stats.ks_distance);
    metric("slope", res.slope);
    metric("epsilon", res.epsilon);
    check("single_system_tv", tv < kSequenceTv, tv, "< " + fmt(kSequenceTv));
    if (!res.block_lengths.empty()) {
      check("convergence_slope", res.slope >= kSlopeLo && res.slope <= kSlopeHi, res.slope,
            "in [" + fmt(kSlopeLo) + ", " + fmt(kSlopeHi) + "]");
    }
    const Observable obs(chain.observable, cfg_.x_grid(), cfg_.physics);
    emit(outcome_log_artifact(meta_, res.log));
    emit(convergence_artifact(meta_, res.curve));
    emit(frequency_artifact(obs, res.target_masses, res.counts));
    TableWriter blocks(meta_, "block-averaged TV", {{"block_length", "1"}, {"mean_tv", "1"}});
    blocks.note("slope", fmt(res.slope));
    for (std::size_t i = 0; i < res.block_lengths.size(); ++i) {
      blocks.row({res.block_lengths[i], res.block_tv[i]});
    }
    emit(blocks.finish("block_tv.dat"));
  }

  void equilibrium_run() {
    const auto& e = *cfg_.equilibrium;
    const Wavefunction wf0 = initial_state();
    const Grid1D grid = cfg_.x_grid();
    CustomDensity custom;
    if (e.provenance == Provenance::kCustom) custom = cfg_.custom_density();
    Ensemble ens = sample_ensemble(wf0, e.members, e.provenance, cfg_.seed,
                                   e.provenance == Provenance::kCustom ? &custom : nullptr);
    // 1D flows preserve order, which the trajectory drift needs.
    std::sort(ens.positions.begin(), ens.positions.end());

    EvolutionSetup setup{wf0, cfg_.potential, cfg_.physics, cfg_.plan.dt,
                         std::max(1u, opt_.workers), e.record_every};
    const auto evolved = evolve_ensemble(ens, setup, e.time);

    FTrajectories traj;
    const bool with_traj = e.record_every > 0;
    if (with_traj) {
      std::vector<double> p0 = e.provenance == Provenance::kCustom ? custom.values : wf0.density();
      double total = 0.0;
      for (const double v : p0) total += v;
      for (auto& v : p0) v /= total * grid.dx();
      std::size_t next_abort = 0;
      for (std::size_t i = 0; i < ens.positions.size(); ++i) {
        if (next_abort < evolved.aborted.size() && evolved.aborted[next_abort] == i) {
          ++next_abort;
          continue;
        }
        const double x = ens.positions[i];
        const auto cell = static_cast<std::size_t>(std::floor((x - grid.x_min()) / grid.dx()));
        traj.p0.push_back(p0[std::min(cell, grid.size() - 1)]);
      }
      traj.records = evolved.records;
      traj.snapshots = evolved.snapshots;
    }
    const FSummary f = f_statistics(evolved.ensemble, evolved.wf, with_traj ? &traj : nullptr);

    auto rho = evolved.wf.density();
    const double nn = evolved.wf.norm_squared();
    for (auto& v : rho) v /= nn;
    const auto stats = compare_distributions(evolved.ensemble, grid, rho);

    metric("aborted", static_cast<double>(evolved.aborted.size()));
    metric("ks", stats.ks_distance);
    metric("tv", stats.total_variation);
    metric("chi2_pvalue", stats.chi2_pvalue);
    metric("mean_f", f.mean_f);
    metric("max_scaled_deviation", f.max_scaled_deviation);
    if (e.provenance == Provenance::kBorn) {
      check("f_equals_one", f.max_scaled_deviation < f.sampling_bound, f.max_scaled_deviation,
            "< " + fmt(f.sampling_bound));
    }
    if (with_traj) {
      metric("max_drift", f.max_drift);
      check("f_constant_along_trajectories", f.max_drift < kDriftTolerance, f.max_drift,
            "< " + fmt(kDriftTolerance));
    }

    std::vector<double> finals(ens.positions.size(), std::nan(""));
    std::size_t next_abort = 0;
    std::size_t k = 0;
    for (std::size_t i = 0; i < finals.size(); ++i) {
      if (next_abort < evolved.aborted.size() && evolved.aborted[next_abort] == i) {
        ++next_abort;
        continue;
      }
      finals[i] = evolved.ensemble.positions[k++];
    }
    emit(ensemble_artifact(meta_, ens, finals));
    emit(f_table_artifact(meta_, f));
  }

  void lyapunov_run() {
    const auto& l = *cfg_.lyapunov;
    if (l.reference == LyapunovReference::kBernoulli) {
      const auto iterates = static_cast<std::size_t>(l.window);
      std::vector<std::uint64_t> words((l.seed_bits + 63) / 64);
      RandomStream rng(cfg_.seed, streams::kShiftSeed);
      for (auto& w : words) w = rng.next_u64();
      const ShiftState s = shift_state_from_seed(words, iterates + 128);
      const auto est = bernoulli_lyapunov(s, l.delta0, iterates);
      const auto orbit = bernoulli_shift(s, iterates);
      const double ks = ks_uniform(orbit, 0.0, 1.0);
      const double err = std::abs(est.lambda - std::numbers::ln2);
      metric("lambda", est.lambda);
      metric("residual", est.residual);
      metric("renorm_count", static_cast<double>(est.renorm_count));
      metric("orbit_ks", ks);
      check("lyapunov_ln2", err < kLyapunovTolerance, est.lambda,
            "within " + fmt(kLyapunovTolerance) + " of ln 2");
      check("orbit_uniform", ks < kOrbitKs, ks, "< " + fmt(kOrbitKs));
      emit(lyapunov_artifact(meta_, est));
      TableWriter w(meta_, "doubling-map orbit", {{"n", "1"}, {"x", "1"}});
      for (std::size_t i = 0; i < orbit.size(); ++i) w.row({static_cast<double>(i + 1), orbit[i]});
      emit(w.finish("orbit.dat"));
    } else {
      SchrodingerFlow flow(initial_state(), cfg_.potential, cfg_.physics, cfg_.plan.dt);
      const auto est = lyapunov_exponent(flow, Particle::at(l.x0), l.delta0, l.window, cfg_.plan.dt);
      metric("lambda", est.lambda);
      metric("residual", est.residual);
      metric("renorm_count", static_cast<double>(est.renorm_count));
      emit(lyapunov_artifact(meta_, est));
    }
  }

  const ExperimentConfig& cfg_;
  RunOptions opt_;
  ArtifactMeta meta_;
  RunOutput out_;
};

}  // namespace

RunOutput run_experiment(const ExperimentConfig& cfg, const RunOptions& options) {
  const auto start = std::chrono::steady_clock::now();
  const std::string ctx = "run " + std::string(kind_name(cfg.kind)) + ": ";
  RunOutput out;
  try {
    out = Pipeline(cfg, options).run();
  } catch (const PhysicsError& e) {
    throw PhysicsError(ctx + e.what());
  } catch (const ValidationError& e) {
    throw ValidationError(ctx + e.what());
  } catch (const IoError& e) {
    throw IoError(ctx + e.what());
  }
  out.report.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return out;
}

std::string report_json(const RunReport& report) {
  nlohmann::ordered_json j;
  j["kind"] = report.kind;
  j["config_hash"] = hash_hex(report.config_hash);
  j["seed"] = report.seed;
  j["workers"] = report.workers;
  j["wall_seconds"] = report.wall_seconds;
  j["all_passed"] = report.all_passed();
  auto& checks = j["checks"] = nlohmann::ordered_json::array();
  for (const auto& c : report.checks) {
    nlohmann::ordered_json row;
    row["name"] = c.name;
    row["pass"] = c.pass;
    // JSON has no NaN or infinity.
    if (std::isfinite(c.value)) {
      row["value"] = c.value;
    } else {
      row["value"] = format_number(c.value);
    }
    row["bound"] = c.bound;
    checks.push_back(std::move(row));
  }
  auto& metrics = j["metrics"] = nlohmann::ordered_json::object();
  for (const auto& [k, v] : report.metrics) {
    if (std::isfinite(v)) {
      metrics[k] = v;
    } else {
      metrics[k] = format_number(v);
    }
  }
  j["warnings"] = report.warnings;
  j["files"] = report.files;
  return j.dump(2) + "\n";
}

std::vector<std::filesystem::path> write_outputs(RunReport& report,
                                                 std::span<const Artifact> artifacts,
                                                 const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create output directory " + dir.string() + ": " + ec.message());
  std::vector<std::filesystem::path> paths;
  report.files.clear();
  for (const auto& a : artifacts) {
    const auto p = dir / a.filename;
    write_text_file(p, a.content);
    paths.push_back(p);
    report.files.push_back(a.filename);
  }
  report.files.push_back("report.json");
  const auto rp = dir / "report.json";
  write_text_file(rp, report_json(report));
  paths.push_back(rp);
  return paths;
}

}  // namespace pilotwave
