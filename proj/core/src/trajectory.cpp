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
#include <limits>
#include <string>

#include "pilotwave/parallel.hpp"

namespace pilotwave {

namespace {

constexpr int kMaxHalvings = 8;

}  // namespace

GridVelocityField::GridVelocityField(PolarFields fields) : fields_(std::move(fields)) {}

GridVelocityField::GridVelocityField(const Wavefunction& wf, const PhysicalParams& params)
    : fields_(polar_decompose(wf, params)) {}

VelocitySample GridVelocityField::sample(std::span<const double> pos) const {
  const auto& f = fields_;
  const int dims = f.dims();
  return detail::sample_stencil(f.shape, pos,
                                [&](std::size_t ix, std::size_t iy, std::array<double, 2>& v) {
                                  const std::size_t i = f.shape.index(ix, iy);
                                  if (f.node_mask[i]) return false;
                                  v[0] = f.velocity[0][i];
                                  v[1] = dims == 2 ? f.velocity[1][i] : 0.0;
                                  return true;
                                });
}

bool GridVelocityField::in_node_region(std::span<const double> pos) const {
  return fields_.node_mask[fields_.shape.nearest(pos)] != 0;
}

VelocitySample sample_velocity(const Wavefunction& wf, const PhysicalParams& params,
                               std::span<const double> pos) {
  if (static_cast<int>(pos.size()) < wf.dims()) {
    throw ValidationError("sample_velocity: position has fewer components than the grid");
  }
  return GridVelocityField(wf, params).sample(pos);
}

// ---------------------------------------------------------------------------
// RK4 with step rejection.

namespace {

struct Stepper {
  const StepFields& fields;
  double dt;
  int dims;
  std::array<double, 2> cell;
  std::uint8_t flags = 0;

  // Velocity at fractional time s in [0, 1] of the step.
  std::array<double, 2> velocity(const std::array<double, 2>& pos, double s) {
    const std::span<const double> p(pos.data(), static_cast<std::size_t>(dims));
    auto take = [&](const VelocityField* f) {
      const auto out = f->sample(p);
      if (out.shifted) flags |= kFlagShiftedStencil;
      return out.v;
    };
    if (s == 0.0) return take(fields.start);
    if (s == 0.5) return take(fields.mid);
    if (s == 1.0) return take(fields.end);
    const auto v0 = take(fields.start);
    const auto v1 = take(fields.mid);
    const auto v2 = take(fields.end);
    const double l0 = 2.0 * (s - 0.5) * (s - 1.0);
    const double l1 = -4.0 * s * (s - 1.0);
    const double l2 = 2.0 * s * (s - 0.5);
    return {l0 * v0[0] + l1 * v1[0] + l2 * v2[0], l0 * v0[1] + l1 * v1[1] + l2 * v2[1]};
  }

  const VelocityField& nearest_level(double s) const {
    if (s <= 0.25) return *fields.start;
    if (s <= 0.75) return *fields.mid;
    return *fields.end;
  }

  void wrap(std::array<double, 2>& pos) const {
    const auto& shape = fields.start->shape();
    pos[0] = shape.gx.wrap(pos[0]);
    if (dims == 2) pos[1] = shape.gy->wrap(pos[1]);
  }

  bool in_node(const std::array<double, 2>& pos, double s) const {
    return nearest_level(s).in_node_region(
        std::span<const double>(pos.data(), static_cast<std::size_t>(dims)));
  }

  // Advances pos over the fraction [s0, s0 + h] of the step.
  void advance(std::array<double, 2>& pos, double s0, double h, int depth) {
    const double tau = h * dt;
    std::array<double, 2> delta{0.0, 0.0};
    bool node_hit = false;
    try {
      auto shifted = [&](const std::array<double, 2>& k, double c) {
        std::array<double, 2> q = pos;
        for (int a = 0; a < dims; ++a) q[a] += c * k[a];
        return q;
      };
      const auto k1 = velocity(pos, s0);
      const auto k2 = velocity(shifted(k1, 0.5 * tau), s0 + 0.5 * h);
      const auto k3 = velocity(shifted(k2, 0.5 * tau), s0 + 0.5 * h);
      const auto k4 = velocity(shifted(k3, tau), s0 + h);
      for (int a = 0; a < dims; ++a) {
        delta[a] = tau / 6.0 * (k1[a] + 2.0 * k2[a] + 2.0 * k3[a] + k4[a]);
      }
    } catch (const PhysicsError&) {
      node_hit = true;
    }

    bool too_far = false;
    for (int a = 0; a < dims; ++a) {
      if (!(std::abs(delta[a]) <= cell[a])) too_far = true;
    }
    std::array<double, 2> next = pos;
    if (!node_hit && !too_far) {
      for (int a = 0; a < dims; ++a) next[a] += delta[a];
      wrap(next);
      if (!in_node(next, s0 + h)) {
        pos = next;
        return;
      }
      node_hit = true;
    }

    if (depth < kMaxHalvings) {
      flags |= kFlagSubstep;
      advance(pos, s0, 0.5 * h, depth + 1);
      advance(pos, s0 + 0.5 * h, 0.5 * h, depth + 1);
      return;
    }
    if (node_hit) {
      throw PhysicsError("node collision: step rejected " + std::to_string(kMaxHalvings) +
                         " consecutive times");
    }
    // Persistent oversized displacement: clamp to one cell per axis.
    flags |= kFlagClamped;
    next = pos;
    for (int a = 0; a < dims; ++a) {
      const double d = std::isfinite(delta[a]) ? delta[a] : 0.0;
      next[a] += std::clamp(d, -cell[a], cell[a]);
    }
    wrap(next);
    if (in_node(next, s0 + h)) {
      throw PhysicsError("node collision: clamped step lands in a node region");
    }
    pos = next;
  }
};

}  // namespace

Particle advance_particle(const Particle& particle, const StepFields& fields, double dt,
                          std::uint8_t* flags) {
  if (fields.start == nullptr || fields.mid == nullptr || fields.end == nullptr) {
    throw ValidationError("advance_particle: missing velocity field");
  }
  if (!(std::isfinite(dt) && dt > 0.0)) {
    throw ValidationError("advance_particle: dt must be positive and finite");
  }
  const FieldShape& shape = fields.start->shape();
  if (particle.dims != shape.dims()) {
    throw ValidationError("advance_particle: particle dimension does not match the field");
  }
  const auto cell = shape.cell();
  Stepper stepper{fields, dt, particle.dims, cell};
  Particle out = particle;
  stepper.wrap(out.coords);
  stepper.advance(out.coords, 0.0, 1.0, 0);
  out.t = particle.t + dt;
  if (flags != nullptr) *flags |= stepper.flags;
  return out;
}

Particle advance_particle(const Particle& particle, const Wavefunction& wf_t,
                          const Wavefunction& wf_half, const Wavefunction& wf_next, double dt,
                          const PhysicalParams& params, std::uint8_t* flags) {
  if (!wf_t.same_grid(wf_half) || !wf_t.same_grid(wf_next)) {
    throw ValidationError("advance_particle: snapshots live on different grids");
  }
  const GridVelocityField f0(wf_t, params);
  const GridVelocityField f1(wf_half, params);
  const GridVelocityField f2(wf_next, params);
  return advance_particle(particle, StepFields{&f0, &f1, &f2}, dt, flags);
}

// ---------------------------------------------------------------------------
// Flows.

SchrodingerFlow::SchrodingerFlow(Wavefunction wf0, const PotentialSpec& potential,
                                 const PhysicalParams& params, double dt, double t0)
    : wf_(std::move(wf0)),
      params_(params),
      half_step_(wf_, potential, params, 0.5 * dt),
      dt_(dt),
      t_(t0),
      shape_(FieldShape::of(wf_)) {
  if (!(std::isfinite(dt) && dt > 0.0)) {
    throw ValidationError("SchrodingerFlow: dt must be positive and finite");
  }
  check_stability(dt, wf_, params_);
  fields_[0] = std::make_unique<GridVelocityField>(wf_, params_);
}

StepFields SchrodingerFlow::advance(double dt) {
  if (std::abs(dt - dt_) > 1e-12 * dt_) {
    throw ValidationError("SchrodingerFlow: step differs from the configured dt");
  }
  half_step_.step(wf_);
  fields_[1] = std::make_unique<GridVelocityField>(wf_, params_);
  half_step_.step(wf_);
  fields_[2] = std::make_unique<GridVelocityField>(wf_, params_);
  t_ += dt_;
  // Rotate so that the old end becomes the next start; the returned view
  // keeps pointing at the three live objects.
  std::swap(fields_[0], fields_[2]);
  return StepFields{fields_[2].get(), fields_[1].get(), fields_[0].get()};
}

namespace {

void record_point(TrajectoryRecord& rec, const Particle& p, const VelocityField& field,
                  std::uint8_t flags) {
  rec.times.push_back(p.t);
  rec.positions.push_back(p.coords);
  VelocitySample v;
  try {
    v = field.sample(p.position());
  } catch (const PhysicsError&) {
    v.v = {std::nan(""), std::nan("")};
  }
  rec.velocities.push_back(v.v);
  rec.flags.push_back(flags);
}

}  // namespace

TrajectoryRecord integrate_trajectory(const Wavefunction& wf0, const PotentialSpec& potential,
                                      const PhysicalParams& params, const Particle& particle0,
                                      const PropagationPlan& plan) {
  if (particle0.dims != wf0.dims()) {
    throw ValidationError("integrate_trajectory: particle dimension does not match the grid");
  }
  SchrodingerFlow flow(wf0, potential, params, plan.dt, particle0.t);
  if (flow.current().in_node_region(particle0.position())) {
    throw PhysicsError("integrate_trajectory: initial position lies in a node region");
  }
  TrajectoryRecord rec;
  rec.dims = particle0.dims;
  rec.times.reserve(plan.n_steps + 1);
  Particle p = particle0;
  record_point(rec, p, flow.current(), 0);
  for (std::size_t i = 0; i < plan.n_steps; ++i) {
    const StepFields fields = flow.advance(plan.dt);
    std::uint8_t flags = 0;
    p = advance_particle(p, fields, plan.dt, &flags);
    record_point(rec, p, *fields.end, flags);
  }
  return rec;
}

void advance_members(std::span<Particle> particles, std::span<std::uint8_t> failed,
                     std::span<std::uint8_t> flags, const StepFields& fields, double dt,
                     unsigned workers) {
  if (failed.size() != particles.size() || flags.size() != particles.size()) {
    throw ValidationError("advance_members: bookkeeping arrays have the wrong length");
  }
  parallel_for(particles.size(), workers, [&](std::size_t i) {
    if (failed[i]) return;
    try {
      particles[i] = advance_particle(particles[i], fields, dt, &flags[i]);
    } catch (const PhysicsError&) {
      failed[i] = 1;
    }
  });
}

EnsembleRun integrate_ensemble(GuidanceFlow& flow, std::vector<Particle> particles, double dt,
                               std::size_t n_steps, unsigned workers, std::size_t record_every) {
  EnsembleRun run;
  const std::size_t n = particles.size();
  run.particles = std::move(particles);
  run.failed.assign(n, 0);
  run.flags.assign(n, 0);
  for (std::size_t i = 0; i < n; ++i) {
    if (run.particles[i].dims != flow.shape().dims()) {
      throw ValidationError("integrate_ensemble: particle dimension does not match the flow");
    }
    if (flow.current().in_node_region(run.particles[i].position())) run.failed[i] = 1;
  }
  if (record_every > 0) {
    run.records.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      run.records[i].dims = run.particles[i].dims;
      record_point(run.records[i], run.particles[i], flow.current(), 0);
    }
  }
  std::vector<std::uint8_t> step_flags(n);
  for (std::size_t s = 1; s <= n_steps; ++s) {
    const StepFields fields = flow.advance(dt);
    std::fill(step_flags.begin(), step_flags.end(), 0);
    advance_members(run.particles, run.failed, step_flags, fields, dt, workers);
    for (std::size_t i = 0; i < n; ++i) run.flags[i] |= step_flags[i];
    if (record_every > 0 && (s % record_every == 0 || s == n_steps)) {
      for (std::size_t i = 0; i < n; ++i) {
        if (!run.failed[i]) record_point(run.records[i], run.particles[i], *fields.end, step_flags[i]);
      }
    }
  }
  for (const auto f : run.failed) run.failures += f;
  return run;
}

// ---------------------------------------------------------------------------
// Lyapunov estimate.

LyapunovEstimate benettin(PairDynamics& pair, double delta0, double window,
                          double renorm_factor) {
  if (!(std::isfinite(delta0) && delta0 > 0.0)) {
    throw ValidationError("lyapunov: delta0 must be positive");
  }
  if (delta0 < pair.min_delta()) {
    throw ValidationError("lyapunov: delta0 is below the resolvable separation");
  }
  if (!(std::isfinite(window) && window > 0.0)) {
    throw ValidationError("lyapunov: window must be positive");
  }
  if (!(renorm_factor > 1.0)) throw ValidationError("lyapunov: renorm factor must exceed 1");

  pair.rescale(delta0);
  LyapunovEstimate est;
  double t = 0.0;
  double log_sum = 0.0;
  std::vector<double> ts;
  std::vector<double> ls;
  while (t < window) {
    t += pair.step();
    const double d = pair.separation();
    if (!(std::isfinite(d) && d > 0.0)) {
      throw PhysicsError("lyapunov: separation collapsed or became non-finite");
    }
    if (d > renorm_factor * delta0) {
      log_sum += std::log(d / delta0);
      pair.rescale(delta0);
      ++est.renorm_count;
      ts.push_back(t);
      ls.push_back(log_sum);
    }
  }
  // Growth since the last renormalization.
  const double tail = pair.separation();
  log_sum += std::log(tail / delta0);
  ts.push_back(t);
  ls.push_back(log_sum);

  est.window = t;
  est.lambda = log_sum / t;
  double stt = 0.0;
  double stl = 0.0;
  for (std::size_t i = 0; i < ts.size(); ++i) {
    stt += ts[i] * ts[i];
    stl += ts[i] * ls[i];
  }
  const double slope = stl / stt;
  double ss = 0.0;
  for (std::size_t i = 0; i < ts.size(); ++i) {
    const double r = ls[i] - slope * ts[i];
    ss += r * r;
  }
  est.residual = std::sqrt(ss / static_cast<double>(ts.size()));
  est.times = std::move(ts);
  est.log_growth = std::move(ls);
  return est;
}

FlowPair::FlowPair(GuidanceFlow& flow, const Particle& particle0, double delta0, double dt)
    : flow_(flow), members_{particle0, particle0}, dt_(dt) {
  if (particle0.dims != flow.shape().dims()) {
    throw ValidationError("lyapunov: particle dimension does not match the flow");
  }
  if (!(std::isfinite(dt) && dt > 0.0)) throw ValidationError("lyapunov: dt must be positive");
  members_[1].coords[0] = flow.shape().gx.wrap(members_[1].coords[0] + delta0);
}

std::array<double, 2> FlowPair::offset() const {
  const auto& shape = flow_.shape();
  std::array<double, 2> d{0.0, 0.0};
  for (int a = 0; a < members_[0].dims; ++a) {
    const Grid1D& g = a == 0 ? shape.gx : *shape.gy;
    double v = members_[1].coords[a] - members_[0].coords[a];
    v -= g.length() * std::round(v / g.length());
    d[a] = v;
  }
  return d;
}

double FlowPair::step() {
  const StepFields fields = flow_.advance(dt_);
  std::uint8_t flags = 0;
  for (auto& m : members_) m = advance_particle(m, fields, dt_, &flags);
  return dt_;
}

double FlowPair::separation() const {
  const auto d = offset();
  return std::hypot(d[0], d[1]);
}

void FlowPair::rescale(double target) {
  auto d = offset();
  double norm = std::hypot(d[0], d[1]);
  if (norm == 0.0) {
    d = {1.0, 0.0};
    norm = 1.0;
  }
  const auto& shape = flow_.shape();
  for (int a = 0; a < members_[0].dims; ++a) {
    const Grid1D& g = a == 0 ? shape.gx : *shape.gy;
    members_[1].coords[a] = g.wrap(members_[0].coords[a] + d[a] * target / norm);
  }
}

double FlowPair::min_delta() const {
  const auto& shape = flow_.shape();
  double extent = shape.gx.length();
  if (shape.gy) extent = std::max(extent, shape.gy->length());
  return 10.0 * std::numeric_limits<double>::epsilon() * extent;
}

LyapunovEstimate lyapunov_exponent(GuidanceFlow& flow, const Particle& particle0, double delta0,
                                   double window, double dt) {
  FlowPair pair(flow, particle0, delta0, dt);
  return benettin(pair, delta0, window);
}

// ---------------------------------------------------------------------------
// Ergodic moments.

std::vector<MomentRow> ergodic_moments(std::span<const double> samples, std::span<const int> ks,
                                       std::span<const double> ensemble_averages) {
  if (samples.size() < 100) {
    throw ValidationError("ergodic_moments: need at least 100 samples");
  }
  if (ks.empty()) throw ValidationError("ergodic_moments: no exponents requested");
  if (!ensemble_averages.empty() && ensemble_averages.size() != ks.size()) {
    throw ValidationError("ergodic_moments: one ensemble value per exponent is required");
  }
  std::vector<MomentRow> rows;
  for (std::size_t j = 0; j < ks.size(); ++j) {
    double sum = 0.0;
    for (const double x : samples) sum += std::pow(x, ks[j]);
    MomentRow row;
    row.k = ks[j];
    row.time_average = sum / static_cast<double>(samples.size());
    if (!ensemble_averages.empty()) row.ensemble_average = ensemble_averages[j];
    rows.push_back(row);
  }
  return rows;
}

std::vector<MomentRow> ergodic_moments(const TrajectoryRecord& traj, std::span<const int> ks,
                                       std::span<const double> ensemble_averages) {
  std::vector<double> xs;
  xs.reserve(traj.size());
  for (const auto& p : traj.positions) xs.push_back(p[0]);
  return ergodic_moments(std::span<const double>(xs), ks, ensemble_averages);
}

}  // namespace pilotwave
