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

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <string>
#include <tuple>

#include "pilotwave/error.hpp"
#include "pilotwave/stats.hpp"

namespace pilotwave {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr double kEmptyPacket = 1e-12;

complex interp_complex(std::span<const complex> f, const Grid1D& g, double x) {
  const auto c = locate(g, x);
  const complex a = f[periodic_index(c.lo, g.size())];
  const complex b = f[periodic_index(c.lo + 1, g.size())];
  return (1.0 - c.frac) * a + c.frac * b;
}

std::size_t nearest_bin(std::span<const double> edges, double x) {
  const std::size_t bins = edges.size() - 1;
  if (x < edges.front()) return 0;
  if (x >= edges.back()) return bins - 1;
  const auto it = std::upper_bound(edges.begin(), edges.end(), x);
  return static_cast<std::size_t>(it - edges.begin()) - 1;
}

double min_image(double d, double length) { return d - length * std::round(d / length); }

}  // namespace

void DetectorSpec::validate() const {
  if (!(std::isfinite(sigma) && sigma > 0.0)) {
    throw ValidationError("detector sigma must be positive and finite");
  }
  if (sigma < 4.0 * grid.dx()) {
    throw ValidationError("detector sigma " + std::to_string(sigma) +
                          " is below 4*dy = " + std::to_string(4.0 * grid.dx()));
  }
  if (!(center >= grid.x_min() && center < grid.x_max())) {
    throw ValidationError("detector center lies outside the detector grid");
  }
}

// ---------------------------------------------------------------------------
// Observable.

Observable::Observable(const ObservableSpec& spec, const Grid1D& gx, const PhysicalParams& params)
    : binned_(std::holds_alternative<BinnedPosition>(spec)), grid_(gx) {
  if (binned_) {
    edges_ = std::get<BinnedPosition>(spec).edges;
    if (edges_.size() < 3) throw ValidationError("binned observable needs at least two bins");
    for (std::size_t i = 0; i < edges_.size(); ++i) {
      if (!std::isfinite(edges_[i])) throw ValidationError("bin edge is not finite");
      if (i > 0 && !(edges_[i] > edges_[i - 1])) {
        throw ValidationError("bin edges must be strictly increasing");
      }
      if (edges_[i] < gx.x_min() || edges_[i] > gx.x_max() || !gx.on_grid_line(edges_[i])) {
        throw ValidationError("bin edge " + std::to_string(edges_[i]) + " is not a grid point");
      }
    }
    values_.assign(edges_.begin(), edges_.end() - 1);
    return;
  }
  const auto& d = std::get<DiscreteSpectrum>(spec);
  if (d.values.size() != d.eigenstates.size()) {
    throw ValidationError("discrete observable needs one eigenstate per eigenvalue");
  }
  if (d.values.size() < 2) throw ValidationError("discrete observable needs two eigenvalues");
  for (std::size_t i = 0; i < d.values.size(); ++i) {
    if (!std::isfinite(d.values[i])) throw ValidationError("eigenvalue is not finite");
    if (d.eigenstates[i] < 0) throw ValidationError("eigenstate index must be non-negative");
    for (std::size_t j = 0; j < i; ++j) {
      if (d.values[i] == d.values[j]) {
        throw ValidationError("degenerate eigenvalue " + std::to_string(d.values[i]));
      }
      if (d.eigenstates[i] == d.eigenstates[j]) {
        throw ValidationError("eigenstate listed twice");
      }
    }
  }
  values_ = d.values;
  for (const int n : d.eigenstates) {
    eigenstates_.push_back(harmonic_eigenstate(gx, d.basis, params, n));
  }
}

double Observable::min_gap() const {
  std::vector<double> v = values_;
  std::sort(v.begin(), v.end());
  double gap = std::numeric_limits<double>::infinity();
  for (std::size_t i = 1; i < v.size(); ++i) gap = std::min(gap, v[i] - v[i - 1]);
  return gap;
}

std::size_t Observable::bin_of(double x) const {
  if (!binned_) throw ValidationError("bin_of: observable is not a binned position");
  return nearest_bin(edges_, x);
}

std::vector<complex> Observable::component(const Wavefunction& wf_x, std::size_t n) const {
  if (wf_x.is_2d() || !(wf_x.gx() == grid_)) {
    throw ValidationError("observable: state is not on the observable's grid");
  }
  if (n >= outcomes()) throw ValidationError("observable: outcome index out of range");
  std::vector<complex> out(grid_.size(), complex{0.0, 0.0});
  if (binned_) {
    for (std::size_t i = 0; i < grid_.size(); ++i) {
      if (nearest_bin(edges_, grid_.point(i)) == n) out[i] = wf_x[i];
    }
    return out;
  }
  const Wavefunction& e = eigenstates_[n];
  const complex c = inner_product(e, wf_x);
  for (std::size_t i = 0; i < grid_.size(); ++i) out[i] = c * e[i];
  return out;
}

std::vector<double> Observable::weights(const Wavefunction& wf_x) const {
  std::vector<double> w(outcomes());
  for (std::size_t n = 0; n < outcomes(); ++n) {
    const auto c = component(wf_x, n);
    double s = 0.0;
    for (const auto& z : c) s += std::norm(z);
    w[n] = s * grid_.dx();
  }
  return w;
}

EigenvalueMap Observable::eigenvalue_map() const {
  if (!binned_) throw ValidationError("eigenvalue_map: only binned observables act as a(x)");
  return StaircaseMap{edges_, values_};
}

double gaussian_overlap(double displacement, double sigma) {
  return std::exp(-displacement * displacement / (8.0 * sigma * sigma));
}

// ---------------------------------------------------------------------------
// Coupling tables and guidance.

std::size_t CouplingTables::bin_of(double x) const { return nearest_bin(edges, x); }

std::pair<double, double> CouplingTables::pointer(std::size_t n, double y, double t) const {
  const double d = min_image(y - center - lambda * a[n] * t, gy.length());
  const double norm = std::pow(2.0 * std::numbers::pi * sigma * sigma, -0.25);
  const double g = norm * std::exp(-d * d / (4.0 * sigma * sigma));
  return {g, -d / (2.0 * sigma * sigma) * g};
}

double CouplingTables::packet_density(std::size_t n, double x, double y, double t) const {
  const double g = pointer(n, y, t).first;
  if (disjoint) {
    if (bin_of(x) != n) return 0.0;
    return std::norm(interp_complex(psi_x, gx, x)) * g * g;
  }
  return std::norm(interp_complex(phi[n], gx, x)) * g * g;
}

double CouplingTables::density(double x, double y, double t) const {
  if (disjoint) return packet_density(bin_of(x), x, y, t);
  complex psi{0.0, 0.0};
  for (std::size_t n = 0; n < outcomes(); ++n) {
    psi += interp_complex(phi[n], gx, x) * pointer(n, y, t).first;
  }
  return std::norm(psi);
}

Wavefunction CouplingTables::wavefunction(double t) const {
  Wavefunction wf(Grid2D{gx, gy});
  const std::size_t nx = gx.size();
  const std::size_t ny = gy.size();
  std::vector<std::vector<double>> g(outcomes(), std::vector<double>(ny));
  for (std::size_t n = 0; n < outcomes(); ++n) {
    for (std::size_t j = 0; j < ny; ++j) g[n][j] = pointer(n, gy.point(j), t).first;
  }
  for (std::size_t i = 0; i < nx; ++i) {
    if (disjoint) {
      const std::size_t k = bin_of(gx.point(i));
      for (std::size_t j = 0; j < ny; ++j) wf.at(i, j) = psi_x[i] * g[k][j];
    } else {
      for (std::size_t j = 0; j < ny; ++j) {
        complex s{0.0, 0.0};
        for (std::size_t n = 0; n < outcomes(); ++n) s += phi[n][i] * g[n][j];
        wf.at(i, j) = s;
      }
    }
  }
  return wf;
}

std::shared_ptr<const CouplingTables> make_coupling_tables(
    const Wavefunction& wf_x, const DetectorSpec& det, const Observable& obs, double lambda,
    std::optional<std::size_t> only_component) {
  det.validate();
  if (wf_x.is_2d() || !(wf_x.gx() == obs.grid())) {
    throw ValidationError("coupling: system state is not on the observable's grid");
  }
  if (!std::isfinite(lambda)) throw ValidationError("coupling: lambda must be finite");
  if (only_component && *only_component >= obs.outcomes()) {
    throw ValidationError("coupling: component index out of range");
  }
  auto t = std::make_shared<CouplingTables>(obs.grid(), det.grid);
  t->lambda = lambda;
  t->sigma = det.sigma;
  t->center = det.center;
  t->disjoint = obs.binned();
  t->a = obs.values();
  const double dx = obs.grid().dx();
  if (obs.binned()) {
    t->edges = obs.edges();
    t->psi_x.assign(wf_x.amp().begin(), wf_x.amp().end());
    if (only_component) {
      for (std::size_t i = 0; i < t->psi_x.size(); ++i) {
        if (t->bin_of(obs.grid().point(i)) != *only_component) t->psi_x[i] = 0.0;
      }
    }
  } else {
    const std::size_t n = obs.outcomes();
    std::vector<complex> rest(wf_x.amp().begin(), wf_x.amp().end());
    for (std::size_t k = 0; k < n; ++k) {
      t->phi.push_back(obs.component(wf_x, k));
      for (std::size_t i = 0; i < rest.size(); ++i) rest[i] -= t->phi[k][i];
    }
    double outside = 0.0;
    for (const auto& z : rest) outside += std::norm(z);
    if (outside * dx > 1e-8) {
      throw ValidationError("state carries weight " + std::to_string(outside * dx) +
                            " outside the observable's eigenstates");
    }
    if (only_component) {
      for (std::size_t k = 0; k < n; ++k) {
        if (k != *only_component) std::fill(t->phi[k].begin(), t->phi[k].end(), complex{});
      }
    }
    // C_nm(x): cumulative overlap, half-weighting the current cell.
    t->overlap.assign(n * n, std::vector<complex>(wf_x.size()));
    for (std::size_t a = 0; a < n; ++a) {
      for (std::size_t b = 0; b < n; ++b) {
        auto& c = t->overlap[a * n + b];
        complex acc{0.0, 0.0};
        for (std::size_t i = 0; i < c.size(); ++i) {
          const complex term = std::conj(t->phi[a][i]) * t->phi[b][i] * dx;
          c[i] = acc + 0.5 * term;
          acc += term;
        }
      }
    }
  }
  const auto d0 = t->wavefunction(0.0).density();
  t->density_floor = kRelativeDensityFloor * *std::max_element(d0.begin(), d0.end());
  return t;
}

CouplingVelocityField::CouplingVelocityField(std::shared_ptr<const CouplingTables> tables,
                                             double t)
    : tables_(std::move(tables)), t_(t), shape_{tables_->gx, tables_->gy} {}

VelocitySample CouplingVelocityField::sample(std::span<const double> pos) const {
  const auto& tb = *tables_;
  const double x = pos[0];
  const double y = pos[1];
  VelocitySample out;
  if (tb.disjoint) {
    out.v = {0.0, tb.lambda * tb.a[tb.bin_of(x)]};
    return out;
  }
  const std::size_t n = tb.outcomes();
  std::vector<complex> phi(n);
  std::vector<double> g(n), dg(n);
  complex psi{0.0, 0.0};
  for (std::size_t k = 0; k < n; ++k) {
    phi[k] = interp_complex(tb.phi[k], tb.gx, x);
    std::tie(g[k], dg[k]) = tb.pointer(k, y, t_);
    psi += phi[k] * g[k];
  }
  const double rho = std::norm(psi);
  if (!(rho >= tb.density_floor)) {
    throw PhysicsError("particle sits in a node region of the coupled state");
  }
  double jx = 0.0;
  double jy = 0.0;
  for (std::size_t a = 0; a < n; ++a) {
    for (std::size_t b = 0; b < n; ++b) {
      const double mean = 0.5 * (tb.a[a] + tb.a[b]);
      jy += mean * std::real(std::conj(phi[a]) * phi[b]) * g[a] * g[b];
      if (a != b) {
        const complex c = interp_complex(tb.overlap[a * n + b], tb.gx, x);
        jx += 0.5 * (tb.a[b] - tb.a[a]) * std::real(c) * (g[a] * dg[b] - dg[a] * g[b]);
      }
    }
  }
  out.v = {tb.lambda * jx / rho, tb.lambda * jy / rho};
  return out;
}

bool CouplingVelocityField::in_node_region(std::span<const double> pos) const {
  return tables_->density(pos[0], pos[1], t_) < tables_->density_floor;
}

CouplingFlow::CouplingFlow(std::shared_ptr<const CouplingTables> tables, double t0)
    : tables_(std::move(tables)), t_(t0) {
  fields_[0] = std::make_unique<CouplingVelocityField>(tables_, t_);
}

StepFields CouplingFlow::advance(double dt) {
  fields_[1] = std::make_unique<CouplingVelocityField>(tables_, t_ + 0.5 * dt);
  fields_[2] = std::make_unique<CouplingVelocityField>(tables_, t_ + dt);
  t_ += dt;
  std::swap(fields_[0], fields_[2]);
  return StepFields{fields_[2].get(), fields_[1].get(), fields_[0].get()};
}

double draw_detector_y(const DetectorSpec& det, RandomStream& rng) {
  // Box-Muller from raw uniforms; 1 - u keeps the logarithm finite.
  const double u1 = 1.0 - rng.uniform();
  const double u2 = rng.uniform();
  const double z = std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  return det.grid.wrap(det.center + det.sigma * z);
}

// ---------------------------------------------------------------------------
// Measurement.

VonNeumannMeasurement::VonNeumannMeasurement(const Wavefunction& wf_x, const DetectorSpec& det,
                                             const Observable& obs, double lambda,
                                             double duration, std::size_t min_steps)
    : tables_(make_coupling_tables(wf_x, det, obs, lambda)),
      duration_(duration),
      final_wf_(tables_->wavefunction(duration)),
      epsilon_(0.0),
      cell_{obs.grid().dx(), det.grid.dx()} {
  if (!(std::isfinite(duration) && duration > 0.0)) {
    throw ValidationError("measurement duration must be positive");
  }
  double max_speed = 0.0;
  for (const double a : tables_->a) max_speed = std::max(max_speed, std::abs(lambda * a));
  if (max_speed * duration > 0.5 * det.grid.length()) {
    throw ValidationError("pointer displacement exceeds half the detector domain");
  }
  const auto needed = static_cast<std::size_t>(std::ceil(max_speed * duration / (0.5 * cell_[1])));
  steps_ = std::max({min_steps, needed, std::size_t{1}});
  epsilon_ = check_separation(final_wf_, obs);
}

VonNeumannResult VonNeumannMeasurement::run(const Particle& particle_x, double y0) const {
  const auto& tb = *tables_;
  if (particle_x.dims != 1) throw ValidationError("measurement: particle must be 1D");
  Particle p = Particle::at(particle_x.coords[0], tb.gy.wrap(y0), particle_x.t);
  CouplingFlow flow(tables_);
  if (flow.current().in_node_region(p.position())) {
    throw PhysicsError("measurement: initial position lies in a node region");
  }
  const double dt = duration_ / static_cast<double>(steps_);
  for (std::size_t s = 0; s < steps_; ++s) {
    const StepFields fields = flow.advance(dt);
    p = advance_particle(p, fields, dt);
  }

  VonNeumannResult r;
  r.particle = p;
  OutcomeRecord& out = r.outcome;
  const double x = p.coords[0];
  const double y = p.coords[1];
  std::size_t best = 0;
  double best_rho = -1.0;
  std::size_t populated = 0;
  for (std::size_t n = 0; n < tb.outcomes(); ++n) {
    const double rho = tb.packet_density(n, x, y, duration_);
    if (rho > tb.density_floor) ++populated;
    if (rho > best_rho) {
      best_rho = rho;
      best = n;
    }
  }
  if (!(best_rho > tb.density_floor)) {
    throw PhysicsError("measurement: particle ended outside every packet support");
  }
  if (populated > 1 && epsilon_ > kDisjointOverlap) {
    throw PhysicsError("measurement: ambiguous outcome, packets overlap (epsilon = " +
                       std::to_string(epsilon_) + ")");
  }
  out.index = best;
  out.value = tb.a[best];
  out.bin_lo = kNaN;
  out.bin_hi = kNaN;
  if (tb.disjoint) {
    out.bin_lo = tb.edges[best];
    out.bin_hi = tb.edges[best + 1];
    const double moved = std::abs(min_image(x - particle_x.coords[0], tb.gx.length()));
    if (moved >= 2.0 * tb.gx.dx()) {
      throw PhysicsError("measurement: position moved by " + std::to_string(moved) +
                         " during a position measurement");
    }
  }
  out.particle_at_end = p.coords;
  out.x_start = particle_x.coords[0];
  out.epsilon = epsilon_;
  out.t_meas = duration_;
  return r;
}

VonNeumannOutput run_von_neumann(const Wavefunction& wf_x, const DetectorSpec& det,
                                 const Observable& obs, const CouplingSpec& coupling,
                                 const Particle& particle_x, double y0, std::size_t min_steps) {
  coupling.validate();
  const VonNeumannMeasurement m(wf_x, det, obs, coupling.lambda, coupling.duration, min_steps);
  auto r = m.run(particle_x, y0);
  return VonNeumannOutput{m.wavefunction(), r.particle, r.outcome};
}

double check_separation(const Wavefunction& wf2d, const Observable& obs) {
  if (!wf2d.is_2d() || !(wf2d.gx() == obs.grid())) {
    throw ValidationError("check_separation: needs a 2D state on the observable's grid");
  }
  const std::size_t nx = wf2d.nx();
  const std::size_t ny = wf2d.ny();
  const double dx = wf2d.gx().dx();
  const double dy = wf2d.gy().dx();

  struct Packet {
    double a;
    std::vector<double> profile;
  };
  std::vector<Packet> packets;
  for (std::size_t n = 0; n < obs.outcomes(); ++n) {
    std::vector<double> p(ny, 0.0);
    if (obs.binned()) {
      for (std::size_t i = 0; i < nx; ++i) {
        if (obs.bin_of(wf2d.gx().point(i)) != n) continue;
        for (std::size_t j = 0; j < ny; ++j) p[j] += std::norm(wf2d.at(i, j)) * dx;
      }
      for (auto& v : p) v = std::sqrt(v);
    } else {
      const Wavefunction& e = obs.eigenstates()[n];
      for (std::size_t j = 0; j < ny; ++j) {
        complex g{0.0, 0.0};
        for (std::size_t i = 0; i < nx; ++i) g += std::conj(e[i]) * wf2d.at(i, j);
        p[j] = std::abs(g * dx);
      }
    }
    double w = 0.0;
    for (const double v : p) w += v * v * dy;
    if (w <= kEmptyPacket) continue;
    for (auto& v : p) v /= std::sqrt(w);
    packets.push_back({obs.value(n), std::move(p)});
  }
  if (packets.size() < 2) return 0.0;
  std::sort(packets.begin(), packets.end(),
            [](const Packet& l, const Packet& r) { return l.a < r.a; });
  double eps = 0.0;
  for (std::size_t k = 1; k < packets.size(); ++k) {
    double s = 0.0;
    for (std::size_t j = 0; j < ny; ++j) s += packets[k - 1].profile[j] * packets[k].profile[j];
    eps = std::max(eps, s * dy);
  }
  return eps;
}

Wavefunction restrict_support(const Wavefunction& wf2d, OutcomeRecord& out,
                              const Observable& obs) {
  if (!wf2d.is_2d() || !(wf2d.gx() == obs.grid())) {
    throw ValidationError("restrict_support: needs a 2D state on the observable's grid");
  }
  if (!(out.epsilon < kDisjointOverlap)) {
    throw ValidationError("restrict_support: packets are not disjoint (epsilon = " +
                          std::to_string(out.epsilon) + ")");
  }
  if (out.index >= obs.outcomes()) throw ValidationError("restrict_support: bad outcome index");
  const std::size_t nx = wf2d.nx();
  const std::size_t ny = wf2d.ny();
  const double dx = wf2d.gx().dx();
  const double dy = wf2d.gy().dx();
  const double total = wf2d.norm_squared();

  if (!obs.binned()) {
    const Wavefunction& e = obs.eigenstates()[out.index];
    double weight = 0.0;
    for (std::size_t j = 0; j < ny; ++j) {
      complex g{0.0, 0.0};
      for (std::size_t i = 0; i < nx; ++i) g += std::conj(e[i]) * wf2d.at(i, j);
      weight += std::norm(g * dx) * dy;
    }
    if (weight < kEmptyPacket) {
      throw PhysicsError("restrict_support: the winning packet is numerically empty");
    }
    out.discarded_weight = std::max(0.0, 1.0 - weight / total);
    return normalized(e);
  }

  std::vector<std::uint8_t> keep(nx);
  for (std::size_t i = 0; i < nx; ++i) keep[i] = obs.bin_of(wf2d.gx().point(i)) == out.index;
  double weight = 0.0;
  std::size_t best_row = 0;
  double best_norm = -1.0;
  for (std::size_t i = 0; i < nx; ++i) {
    if (!keep[i]) continue;
    double row = 0.0;
    for (std::size_t j = 0; j < ny; ++j) row += std::norm(wf2d.at(i, j));
    weight += row * dx * dy;
    if (row > best_norm) {
      best_norm = row;
      best_row = i;
    }
  }
  if (weight < kEmptyPacket) {
    throw PhysicsError("restrict_support: the winning packet is numerically empty");
  }
  out.discarded_weight = std::max(0.0, 1.0 - weight / total);

  // The packet is phi(x) g(y); recover phi by projecting every row onto the
  // pointer profile of the strongest row, phased to be real at its peak.
  std::size_t peak = 0;
  for (std::size_t j = 1; j < ny; ++j) {
    if (std::norm(wf2d.at(best_row, j)) > std::norm(wf2d.at(best_row, peak))) peak = j;
  }
  const complex phase = wf2d.at(best_row, peak) / std::abs(wf2d.at(best_row, peak));
  const double row_norm = std::sqrt(best_norm * dy);
  std::vector<complex> g(ny);
  for (std::size_t j = 0; j < ny; ++j) g[j] = wf2d.at(best_row, j) * std::conj(phase) / row_norm;

  Wavefunction out_wf(wf2d.gx());
  for (std::size_t i = 0; i < nx; ++i) {
    if (!keep[i]) continue;
    complex s{0.0, 0.0};
    for (std::size_t j = 0; j < ny; ++j) s += std::conj(g[j]) * wf2d.at(i, j);
    out_wf[i] = s * dy;
  }
  out_wf.normalize();
  return out_wf;
}

// ---------------------------------------------------------------------------
// Repreparation.

namespace {

double l1_distance(std::span<const double> a, std::span<const double> b, double dx) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += std::abs(a[i] - b[i]);
  return s * dx;
}

struct Moments {
  double mean;
  double sd;
};

Moments moments(const Wavefunction& wf) {
  const auto rho = wf.density();
  double m0 = 0.0, m1 = 0.0, m2 = 0.0;
  for (std::size_t i = 0; i < rho.size(); ++i) {
    const double x = wf.gx().point(i);
    m0 += rho[i];
    m1 += rho[i] * x;
    m2 += rho[i] * x * x;
  }
  const double mean = m1 / m0;
  return {mean, std::sqrt(std::max(0.0, m2 / m0 - mean * mean))};
}

}  // namespace

RepreparedState reprepare(const Wavefunction& wf_restricted, const Particle& particle,
                          ReprepareMode mode, const Wavefunction& target,
                          const PhysicalParams& params, const PhysicalFlowOptions& flow) {
  if (wf_restricted.is_2d() || target.is_2d() || !wf_restricted.same_grid(target)) {
    throw ValidationError("reprepare: restricted and target states must share a 1D grid");
  }
  if (std::abs(wf_restricted.norm_squared() - 1.0) > 1e-8) {
    throw ValidationError("reprepare: restricted state is not normalized");
  }
  const Grid1D& grid = target.gx();
  const double x = particle.coords[0];
  RepreparedState out{normalized(target), Particle::at(x, particle.t)};
  const auto rho_r = wf_restricted.density();
  const auto rho_t = out.wf.density();
  {
    // Inside the support means strictly between the ends of its CDF, which
    // also admits the last half cell before a support edge.
    const double f = GridCdf(grid, rho_r).cdf(x);
    if (f <= 0.0 || f >= 1.0) throw ValidationError("reprepare: particle outside the support");
  }

  if (mode == ReprepareMode::kBakerIdeal) {
    const GridCdf from(grid, rho_r);
    const GridCdf to(grid, rho_t);
    out.particle.coords[0] = to.inverse(from.cdf(x));
    out.l1 = 0.0;
    return out;
  }

  if (!(flow.dt >= 0.0 && flow.max_time > 0.0 && flow.tol > 0.0)) {
    throw ValidationError("reprepare: physical_flow needs positive dt, time budget and tolerance");
  }
  const double dt = flow.dt > 0.0 ? flow.dt : 0.5 * stability_limit(grid, params.m_x, params.hbar);
  PotentialSpec potential;
  if (flow.potential) {
    potential = *flow.potential;
  } else {
    const auto mr = moments(wf_restricted);
    const auto mt = moments(out.wf);
    // A minimum-uncertainty packet of width s0 reaches width hbar/(2 m w s0)
    // after a quarter period of a trap of frequency w.
    const double omega = params.hbar / (2.0 * params.m_x * mr.sd * mt.sd);
    potential = HarmonicPotential{omega, mt.mean};
  }
  SchrodingerFlow sf(wf_restricted, potential, params, dt);
  Particle p = Particle::at(x, 0.0);
  double prev_l1 = l1_distance(rho_r, rho_t, grid.dx());
  Wavefunction prev_wf = wf_restricted;
  Particle prev_p = p;
  double prev_t = 0.0;
  bool done = prev_l1 < flow.tol;
  const auto max_steps = static_cast<std::size_t>(std::ceil(flow.max_time / dt));
  for (std::size_t s = 0; s < max_steps && !done; ++s) {
    const StepFields fields = sf.advance(dt);
    const Particle next = advance_particle(p, fields, dt);
    const double l1 = l1_distance(sf.wavefunction().density(), rho_t, grid.dx());
    if (prev_l1 < flow.tol && l1 >= prev_l1) {
      done = true;
      break;
    }
    prev_l1 = l1;
    prev_wf = sf.wavefunction();
    prev_p = next;
    prev_t = sf.time();
    p = next;
  }
  if (!(prev_l1 < flow.tol)) {
    throw PhysicsError("reprepare: physical_flow did not reach L1 < " + std::to_string(flow.tol) +
                       " within t = " + std::to_string(flow.max_time));
  }
  const complex ov = inner_product(out.wf, prev_wf);
  out.fidelity = std::abs(ov);
  for (auto& z : out.wf.amp()) z *= ov / std::abs(ov);
  out.particle = prev_p;
  out.particle.t = particle.t + prev_t;
  out.flow_time = prev_t;
  out.l1 = prev_l1;
  return out;
}

}  // namespace pilotwave
