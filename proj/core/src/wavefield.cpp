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

#include "pilotwave/wavefield.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "pilotwave/error.hpp"

namespace pilotwave {

namespace {

bool is_power_of_two(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

std::string fmt_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

}  // namespace

void PhysicalParams::validate() const {
  if (!(hbar > 0.0) || !(m_x > 0.0) || !(m_y > 0.0) || !std::isfinite(hbar) ||
      !std::isfinite(m_x) || !std::isfinite(m_y)) {
    throw ValidationError("physical parameters hbar, m_x, m_y must be finite and > 0");
  }
}

// ---------------------------------------------------------------------------
// Grid1D

Grid1D Grid1D::make(double x_min, double x_max, std::size_t n) {
  if (!std::isfinite(x_min) || !std::isfinite(x_max) || !(x_max > x_min)) {
    throw ValidationError("grid interval is degenerate: x_max must exceed x_min");
  }
  if (n < 16 || !is_power_of_two(n)) {
    throw ValidationError("grid point count " + std::to_string(n) +
                          " is not a power of two >= 16");
  }
  return Grid1D(x_min, x_max, n);
}

double Grid1D::wrap(double x) const {
  const double len = length();
  double r = std::fmod(x - x_min_, len);
  if (r < 0.0) r += len;
  if (r >= len) r = 0.0;
  return x_min_ + r;
}

bool Grid1D::on_grid_line(double x) const {
  const double s = (x - x_min_) / dx_;
  return std::abs(s - std::round(s)) < 1e-9 && s > -0.5 &&
         s < static_cast<double>(n_) + 0.5;
}

std::size_t Grid1D::line_index(double x) const {
  if (!on_grid_line(x)) {
    throw ValidationError("position " + fmt_double(x) + " is not on a grid line");
  }
  return static_cast<std::size_t>(std::llround((x - x_min_) / dx_));
}

// ---------------------------------------------------------------------------
// Wavefunction

Wavefunction::Wavefunction(const Grid1D& grid) : gx_(grid), amp_(grid.size()) {}

Wavefunction::Wavefunction(const Grid2D& grid)
    : gx_(grid.x), gy_(grid.y), amp_(grid.x.size() * grid.y.size()) {}

const Grid1D& Wavefunction::gy() const {
  if (!gy_) throw ValidationError("wavefunction has no detector axis");
  return *gy_;
}

double Wavefunction::cell_volume() const {
  return gy_ ? gx_.dx() * gy_->dx() : gx_.dx();
}

bool Wavefunction::same_grid(const Wavefunction& other) const {
  return gx_ == other.gx_ && gy_ == other.gy_;
}

double Wavefunction::norm_squared() const {
  double sum = 0.0;
  for (const auto& a : amp_) sum += std::norm(a);
  return sum * cell_volume();
}

double Wavefunction::norm() const { return std::sqrt(norm_squared()); }

void Wavefunction::normalize() {
  const double n2 = norm_squared();
  if (!(n2 > 0.0) || !std::isfinite(n2)) {
    throw ValidationError("cannot normalize a zero or non-finite wavefunction");
  }
  // Already unit up to rounding: leave the bits alone so that normalize is
  // idempotent.
  if (std::abs(n2 - 1.0) < 1e-14) return;
  const double scale = 1.0 / std::sqrt(n2);
  for (auto& a : amp_) a *= scale;
}

std::vector<double> Wavefunction::density() const {
  std::vector<double> rho(amp_.size());
  std::transform(amp_.begin(), amp_.end(), rho.begin(),
                 [](const complex& a) { return std::norm(a); });
  return rho;
}

Wavefunction normalized(Wavefunction wf) {
  wf.normalize();
  return wf;
}

// ---------------------------------------------------------------------------
// States

namespace {

Wavefunction make_gaussian(const Grid1D& grid, const GaussianState& g) {
  if (!(g.sigma > 0.0)) throw ValidationError("gaussian sigma must be > 0");
  if (g.sigma < 4.0 * grid.dx()) {
    throw ValidationError("gaussian sigma " + fmt_double(g.sigma) +
                          " is under-resolved (needs >= 4*dx = " +
                          fmt_double(4.0 * grid.dx()) + ")");
  }
  Wavefunction wf(grid);
  const double pref = std::pow(2.0 * std::numbers::pi * g.sigma * g.sigma, -0.25);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double x = grid.point(i);
    const double u = x - g.center;
    wf[i] = pref * std::exp(-u * u / (4.0 * g.sigma * g.sigma)) *
            std::polar(1.0, g.k0 * x);
  }
  wf.normalize();
  return wf;
}

Wavefunction make_piecewise(const Grid1D& grid, const PiecewiseDensityState& s) {
  if (s.intervals.empty()) throw ValidationError("piecewise_density needs intervals");
  if (!s.phase.empty() && s.phase.size() != grid.size()) {
    throw ValidationError("piecewise_density phase table must have one entry per grid point");
  }
  double total = 0.0;
  for (const auto& iv : s.intervals) {
    if (!(iv.weight >= 0.0) || !std::isfinite(iv.weight)) {
      throw ValidationError("piecewise_density weights must be finite and >= 0");
    }
    if (!(iv.hi > iv.lo)) throw ValidationError("piecewise_density interval has hi <= lo");
    total += iv.weight;
  }
  if (!(total > 0.0)) throw ValidationError("piecewise_density weights must have a positive sum");

  Wavefunction wf(grid);
  std::vector<bool> used(grid.size(), false);
  for (const auto& iv : s.intervals) {
    if (!grid.on_grid_line(iv.lo) || !grid.on_grid_line(iv.hi)) {
      throw ValidationError("piecewise_density interval edge off-grid: [" +
                            fmt_double(iv.lo) + ", " + fmt_double(iv.hi) + ")");
    }
    const std::size_t i0 = grid.line_index(iv.lo);
    const std::size_t i1 = grid.line_index(iv.hi);
    const double rho = (iv.weight / total) / (iv.hi - iv.lo);
    const double amp = std::sqrt(rho);
    for (std::size_t i = i0; i < i1; ++i) {
      if (used[i]) throw ValidationError("piecewise_density intervals overlap");
      used[i] = true;
      wf[i] = s.phase.empty() ? complex(amp, 0.0) : std::polar(amp, s.phase[i]);
    }
  }
  wf.normalize();
  return wf;
}

Wavefunction make_superposition(const Grid1D& grid, const SuperpositionState& s,
                                const PhysicalParams& params) {
  if (s.terms.empty()) throw ValidationError("superposition needs at least one term");
  double weight = 0.0;
  for (std::size_t i = 0; i < s.terms.size(); ++i) {
    weight += std::norm(s.terms[i].coefficient);
    for (std::size_t j = 0; j < i; ++j) {
      if (s.terms[i].eigenstate == s.terms[j].eigenstate) {
        throw ValidationError("superposition repeats an eigenstate id");
      }
    }
  }
  if (std::abs(weight - 1.0) > 1e-10) {
    throw ValidationError("superposition coefficients must satisfy sum |c_n|^2 = 1 (got " +
                          fmt_double(weight) + ")");
  }
  Wavefunction wf(grid);
  for (const auto& term : s.terms) {
    const Wavefunction phi = harmonic_eigenstate(grid, s.basis, params, term.eigenstate);
    for (std::size_t i = 0; i < grid.size(); ++i) wf[i] += term.coefficient * phi[i];
  }
  wf.normalize();
  return wf;
}

}  // namespace

Wavefunction harmonic_eigenstate(const Grid1D& grid, const HarmonicBasis& basis,
                                 const PhysicalParams& params, int n) {
  params.validate();
  if (!(basis.omega > 0.0)) throw ValidationError("harmonic basis omega must be > 0");
  if (n < 0) throw ValidationError("eigenstate id must be >= 0");
  const double ell = std::sqrt(params.hbar / (params.m_x * basis.omega));
  if (ell < 4.0 * grid.dx()) {
    throw ValidationError("harmonic oscillator length " + fmt_double(ell) +
                          " is under-resolved (needs >= 4*dx)");
  }
  Wavefunction wf(grid);
  const double norm0 = std::pow(std::numbers::pi, -0.25) / std::sqrt(ell);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double xi = (grid.point(i) - basis.center) / ell;
    double prev = 0.0;
    double cur = norm0 * std::exp(-0.5 * xi * xi);
    for (int k = 0; k < n; ++k) {
      const double next = std::sqrt(2.0 / (k + 1.0)) * xi * cur -
                          std::sqrt(static_cast<double>(k) / (k + 1.0)) * prev;
      prev = cur;
      cur = next;
    }
    wf[i] = cur;
  }
  wf.normalize();
  return wf;
}

double harmonic_energy(const HarmonicBasis& basis, const PhysicalParams& params, int n) {
  return params.hbar * basis.omega * (n + 0.5);
}

Wavefunction init_state(const Grid1D& grid, const StateSpec& spec, const PhysicalParams& params) {
  params.validate();
  return std::visit(
      overloaded{
          [&](const GaussianState& g) { return make_gaussian(grid, g); },
          [&](const PiecewiseDensityState& s) { return make_piecewise(grid, s); },
          [&](const SuperpositionState& s) { return make_superposition(grid, s, params); },
      },
      spec);
}

Wavefunction product_state(const Wavefunction& wf_x, const Wavefunction& wf_y) {
  if (wf_x.is_2d() || wf_y.is_2d()) {
    throw ValidationError("product_state expects two 1D wavefunctions");
  }
  Wavefunction out(Grid2D{wf_x.gx(), wf_y.gx()});
  const std::size_t ny = wf_y.size();
  for (std::size_t ix = 0; ix < wf_x.size(); ++ix) {
    for (std::size_t iy = 0; iy < ny; ++iy) out.at(ix, iy) = wf_x[ix] * wf_y[iy];
  }
  return out;
}

complex inner_product(const Wavefunction& a, const Wavefunction& b) {
  if (!a.same_grid(b)) throw ValidationError("inner_product: grid mismatch");
  complex sum{0.0, 0.0};
  for (std::size_t i = 0; i < a.size(); ++i) sum += std::conj(a[i]) * b[i];
  return sum * a.cell_volume();
}

// ---------------------------------------------------------------------------
// Potentials

void validate_potential(const PotentialSpec& spec, const Grid1D& grid) {
  std::visit(overloaded{
                 [](const FreePotential&) {},
                 [](const HarmonicPotential& h) {
                   if (!(h.omega > 0.0)) throw ValidationError("harmonic omega must be > 0");
                 },
                 [](const SquareWellPotential& w) {
                   if (!(w.width > 0.0) || !std::isfinite(w.depth)) {
                     throw ValidationError("square_well needs finite depth and width > 0");
                   }
                 },
                 [&](const TabulatedPotential& t) {
                   if (t.values.size() != grid.size()) {
                     throw ValidationError("tabulated potential must have one value per grid point");
                   }
                   for (double v : t.values) {
                     if (!std::isfinite(v)) throw ValidationError("tabulated potential value not finite");
                   }
                 },
             },
             spec);
}

std::vector<double> potential_values(const Grid1D& grid, const PotentialSpec& spec,
                                     const PhysicalParams& params) {
  validate_potential(spec, grid);
  std::vector<double> v(grid.size(), 0.0);
  std::visit(overloaded{
                 [](const FreePotential&) {},
                 [&](const HarmonicPotential& h) {
                   for (std::size_t i = 0; i < grid.size(); ++i) {
                     const double u = grid.point(i) - h.center;
                     v[i] = 0.5 * params.m_x * h.omega * h.omega * u * u;
                   }
                 },
                 [&](const SquareWellPotential& w) {
                   for (std::size_t i = 0; i < grid.size(); ++i) {
                     if (std::abs(grid.point(i) - w.center) < 0.5 * w.width) v[i] = -w.depth;
                   }
                 },
                 [&](const TabulatedPotential& t) { v = t.values; },
             },
             spec);
  return v;
}

std::vector<double> marginal_x(const Wavefunction& wf2d) {
  const std::size_t nx = wf2d.nx();
  const std::size_t ny = wf2d.ny();
  const double dy = wf2d.gy().dx();
  std::vector<double> out(nx, 0.0);
  for (std::size_t ix = 0; ix < nx; ++ix) {
    double s = 0.0;
    for (std::size_t iy = 0; iy < ny; ++iy) s += std::norm(wf2d.at(ix, iy));
    out[ix] = s * dy;
  }
  return out;
}

std::vector<double> marginal_y(const Wavefunction& wf2d) {
  const std::size_t nx = wf2d.nx();
  const std::size_t ny = wf2d.ny();
  const double dx = wf2d.gx().dx();
  std::vector<double> out(ny, 0.0);
  for (std::size_t ix = 0; ix < nx; ++ix) {
    for (std::size_t iy = 0; iy < ny; ++iy) out[iy] += std::norm(wf2d.at(ix, iy));
  }
  for (auto& v : out) v *= dx;
  return out;
}

}  // namespace pilotwave
