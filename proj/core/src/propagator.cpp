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

#include "pilotwave/propagator.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <string>

#include "pilotwave/error.hpp"
#include "pilotwave/spectral.hpp"

namespace pilotwave {

namespace {

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

}  // namespace

double stability_limit(const Grid1D& grid, double mass, double hbar) {
  return mass * grid.dx() * grid.dx() / (hbar * std::numbers::pi);
}

void check_stability(double dt, const Wavefunction& shape, const PhysicalParams& params) {
  double limit = stability_limit(shape.gx(), params.m_x, params.hbar);
  if (shape.is_2d()) limit = std::min(limit, stability_limit(shape.gy(), params.m_y, params.hbar));
  if (std::abs(dt) > limit * (1.0 + 1e-12)) {
    throw ValidationError("time step " + fmt(dt) + " exceeds the stability bound m*dx^2/(hbar*pi) = " +
                          fmt(limit));
  }
}

PropagationPlan PropagationPlan::make(double dt, std::size_t n_steps, std::size_t snapshot_every,
                                      const Wavefunction& shape, const PhysicalParams& params) {
  if (!(dt > 0.0) || !std::isfinite(dt)) throw ValidationError("plan dt must be finite and > 0");
  params.validate();
  check_stability(dt, shape, params);
  return PropagationPlan{dt, n_steps, snapshot_every};
}

// ---------------------------------------------------------------------------
// SplitStepPropagator

SplitStepPropagator::SplitStepPropagator(const Wavefunction& shape, const PotentialSpec& potential,
                                         const PhysicalParams& params, double dt)
    : two_d_(shape.is_2d()), nx_(shape.nx()), ny_(shape.ny()), dt_(dt) {
  params.validate();
  if (!std::isfinite(dt)) throw ValidationError("time step must be finite");
  check_stability(dt, shape, params);

  const auto v = potential_values(shape.gx(), potential, params);
  half_potential_.resize(nx_);
  for (std::size_t i = 0; i < nx_; ++i) {
    half_potential_[i] = std::polar(1.0, -v[i] * dt / (2.0 * params.hbar));
  }

  const auto kx = spectral::wavenumbers(shape.gx());
  const double cx = params.hbar * dt / (2.0 * params.m_x);
  if (!two_d_) {
    kinetic_.resize(nx_);
    for (std::size_t i = 0; i < nx_; ++i) kinetic_[i] = std::polar(1.0, -cx * kx[i] * kx[i]);
    return;
  }
  const auto ky = spectral::wavenumbers(shape.gy());
  const double cy = params.hbar * dt / (2.0 * params.m_y);
  kinetic_.resize(nx_ * ny_);
  for (std::size_t ix = 0; ix < nx_; ++ix) {
    for (std::size_t iy = 0; iy < ny_; ++iy) {
      kinetic_[ix * ny_ + iy] =
          std::polar(1.0, -(cx * kx[ix] * kx[ix] + cy * ky[iy] * ky[iy]));
    }
  }
}

void SplitStepPropagator::step(Wavefunction& wf) const {
  if (wf.is_2d() != two_d_ || wf.nx() != nx_ || wf.ny() != ny_) {
    throw ValidationError("propagator and wavefunction shapes differ");
  }
  auto amp = wf.amp();
  auto apply_potential = [&] {
    for (std::size_t ix = 0; ix < nx_; ++ix) {
      const complex f = half_potential_[ix];
      for (std::size_t iy = 0; iy < ny_; ++iy) amp[ix * ny_ + iy] *= f;
    }
  };

  apply_potential();
  if (two_d_) {
    spectral::forward_2d(amp, nx_, ny_);
  } else {
    spectral::forward(amp);
  }
  for (std::size_t i = 0; i < amp.size(); ++i) amp[i] *= kinetic_[i];
  if (two_d_) {
    spectral::inverse_2d(amp, nx_, ny_);
  } else {
    spectral::inverse(amp);
  }
  apply_potential();

  for (const auto& a : amp) {
    if (!std::isfinite(a.real()) || !std::isfinite(a.imag())) {
      throw PhysicsError("split-step produced a non-finite amplitude");
    }
  }
}

Wavefunction step_potential_split(const Wavefunction& wf, const PotentialSpec& potential,
                                  const PhysicalParams& params, double dt) {
  SplitStepPropagator prop(wf, potential, params, dt);
  Wavefunction out = wf;
  prop.step(out);
  return out;
}

PropagationResult propagate(const Wavefunction& wf, const PotentialSpec& potential,
                            const PhysicalParams& params, const PropagationPlan& plan) {
  PropagationResult result{wf, {}};
  if (plan.snapshot_every > 0) result.snapshots.push_back({0.0, wf});
  if (plan.n_steps == 0) return result;

  SplitStepPropagator prop(wf, potential, params, plan.dt);
  for (std::size_t s = 1; s <= plan.n_steps; ++s) {
    prop.step(result.final_state);
    if (plan.snapshot_every > 0 && s % plan.snapshot_every == 0) {
      result.snapshots.push_back({static_cast<double>(s) * plan.dt, result.final_state});
    }
  }
  return result;
}

// ---------------------------------------------------------------------------
// Coupling

double eigenvalue_at(const EigenvalueMap& map, double x) {
  if (const auto* lin = std::get_if<LinearMap>(&map)) return lin->slope * x + lin->offset;
  const auto& stair = std::get<StaircaseMap>(map);
  const auto& e = stair.edges;
  // upper_bound gives the first edge > x; the bin is the one before it.
  const auto it = std::upper_bound(e.begin(), e.end(), x);
  std::ptrdiff_t bin = (it - e.begin()) - 1;
  bin = std::clamp<std::ptrdiff_t>(bin, 0, static_cast<std::ptrdiff_t>(stair.values.size()) - 1);
  return stair.values[static_cast<std::size_t>(bin)];
}

void CouplingSpec::validate() const {
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) throw ValidationError("coupling lambda must be >= 0");
  if (!(duration > 0.0) || !std::isfinite(duration)) {
    throw ValidationError("coupling duration must be > 0");
  }
  if (const auto* stair = std::get_if<StaircaseMap>(&a_of_x)) {
    if (stair->edges.size() < 2 || stair->values.size() + 1 != stair->edges.size()) {
      throw ValidationError("staircase map needs n+1 edges for n values");
    }
    if (!std::is_sorted(stair->edges.begin(), stair->edges.end(), std::less_equal<>{}) ||
        std::adjacent_find(stair->edges.begin(), stair->edges.end()) != stair->edges.end()) {
      throw ValidationError("staircase edges must be strictly increasing");
    }
  }
}

std::vector<complex> translate_periodic(std::span<const complex> profile, const Grid1D& grid,
                                        double shift) {
  std::vector<complex> work(profile.begin(), profile.end());
  if (shift == 0.0) return work;
  spectral::forward(work);
  const auto k = spectral::wavenumbers(grid);
  for (std::size_t j = 0; j < work.size(); ++j) work[j] *= std::polar(1.0, -k[j] * shift);
  spectral::inverse(work);
  return work;
}

namespace {

void check_wrap(double max_shift, const Grid1D& gy) {
  if (max_shift > 0.5 * gy.length()) {
    throw ValidationError("coupling translation " + fmt(max_shift) +
                          " exceeds half the detector domain (wrap-around hazard)");
  }
}

}  // namespace

Wavefunction step_measurement_coupling(const Wavefunction& wf2d, const CouplingSpec& coupling,
                                       double t) {
  if (!wf2d.is_2d()) throw ValidationError("measurement coupling needs a 2D wavefunction");
  coupling.validate();
  const std::size_t nx = wf2d.nx();
  const std::size_t ny = wf2d.ny();

  std::vector<double> shift(nx);
  double max_shift = 0.0;
  for (std::size_t ix = 0; ix < nx; ++ix) {
    shift[ix] = coupling.lambda * eigenvalue_at(coupling.a_of_x, wf2d.gx().point(ix)) * t;
    max_shift = std::max(max_shift, std::abs(shift[ix]));
  }
  check_wrap(max_shift, wf2d.gy());

  Wavefunction out = wf2d;
  if (max_shift == 0.0) return out;
  auto amp = out.amp();
  spectral::forward_rows(amp, nx, ny);
  const auto ky = spectral::wavenumbers(wf2d.gy());
  for (std::size_t ix = 0; ix < nx; ++ix) {
    for (std::size_t iy = 0; iy < ny; ++iy) {
      amp[ix * ny + iy] *= std::polar(1.0, -ky[iy] * shift[ix]);
    }
  }
  spectral::inverse_rows(amp, nx, ny);
  return out;
}

Wavefunction step_spectral_coupling(const Wavefunction& wf2d,
                                    std::span<const Wavefunction> eigenstates,
                                    std::span<const double> eigenvalues, double lambda, double t) {
  if (!wf2d.is_2d()) throw ValidationError("measurement coupling needs a 2D wavefunction");
  if (eigenstates.size() != eigenvalues.size()) {
    throw ValidationError("eigenstate and eigenvalue lists differ in length");
  }
  const std::size_t nx = wf2d.nx();
  const std::size_t ny = wf2d.ny();
  const double dx = wf2d.gx().dx();
  double max_shift = 0.0;
  for (double a : eigenvalues) max_shift = std::max(max_shift, std::abs(lambda * a * t));
  check_wrap(max_shift, wf2d.gy());

  Wavefunction out = wf2d;
  auto amp = out.amp();
  for (std::size_t n = 0; n < eigenstates.size(); ++n) {
    const auto& phi = eigenstates[n];
    if (phi.is_2d() || !(phi.gx() == wf2d.gx())) {
      throw ValidationError("eigenstates must be 1D on the system grid");
    }
    std::vector<complex> g(ny, complex{});
    for (std::size_t ix = 0; ix < nx; ++ix) {
      const complex c = std::conj(phi[ix]) * dx;
      for (std::size_t iy = 0; iy < ny; ++iy) g[iy] += c * wf2d.at(ix, iy);
    }
    const auto moved = translate_periodic(g, wf2d.gy(), lambda * eigenvalues[n] * t);
    for (std::size_t ix = 0; ix < nx; ++ix) {
      const complex p = phi[ix];
      for (std::size_t iy = 0; iy < ny; ++iy) amp[ix * ny + iy] += p * (moved[iy] - g[iy]);
    }
  }
  return out;
}

}  // namespace pilotwave
