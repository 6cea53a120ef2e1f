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

#ifndef PILOTWAVE_WAVEFIELD_HPP_
#define PILOTWAVE_WAVEFIELD_HPP_

#include <complex>
#include <cstddef>
#include <optional>
#include <span>
#include <variant>
#include <vector>

namespace pilotwave {

using complex = std::complex<double>;

/// Action and masses in simulation units. m_x belongs to the measured
/// system, m_y to the detector pointer.
struct PhysicalParams {
  double hbar = 1.0;
  double m_x = 1.0;
  double m_y = 1.0;

  void validate() const;
};

/// Uniform periodic grid x_i = x_min + i*dx, i in [0, n).
class Grid1D {
 public:
  /// Throws ValidationError unless x_max > x_min and n is a power of two
  /// no smaller than 16.
  static Grid1D make(double x_min, double x_max, std::size_t n);

  double x_min() const { return x_min_; }
  double x_max() const { return x_max_; }
  double length() const { return x_max_ - x_min_; }
  double dx() const { return dx_; }
  std::size_t size() const { return n_; }
  double point(std::size_t i) const { return x_min_ + static_cast<double>(i) * dx_; }

  /// Maps x into [x_min, x_max) by periodicity.
  double wrap(double x) const;
  /// True if x coincides with a grid line (relative tolerance 1e-9 of dx);
  /// x_max counts as a grid line.
  bool on_grid_line(double x) const;
  /// Index of the grid line at x; requires on_grid_line(x).
  std::size_t line_index(double x) const;

  bool operator==(const Grid1D& other) const = default;

 private:
  Grid1D(double x_min, double x_max, std::size_t n)
      : x_min_(x_min), x_max_(x_max), dx_((x_max - x_min) / static_cast<double>(n)), n_(n) {}

  double x_min_;
  double x_max_;
  double dx_;
  std::size_t n_;
};

inline Grid1D make_grid(double x_min, double x_max, std::size_t n) {
  return Grid1D::make(x_min, x_max, n);
}

/// System axis x and detector axis y.
struct Grid2D {
  Grid1D x;
  Grid1D y;

  bool operator==(const Grid2D& other) const = default;
};

/// Complex amplitude on a 1D or 2D grid. 2D storage is row-major with the
/// detector axis contiguous: index(ix, iy) = ix * ny + iy.
class Wavefunction {
 public:
  explicit Wavefunction(const Grid1D& grid);
  explicit Wavefunction(const Grid2D& grid);

  bool is_2d() const { return gy_.has_value(); }
  int dims() const { return is_2d() ? 2 : 1; }
  const Grid1D& gx() const { return gx_; }
  /// Detector grid; throws ValidationError on a 1D wavefunction.
  const Grid1D& gy() const;
  Grid2D grid2d() const { return {gx_, gy()}; }
  std::size_t nx() const { return gx_.size(); }
  std::size_t ny() const { return gy_ ? gy_->size() : 1; }
  std::size_t size() const { return amp_.size(); }
  /// dx, or dx*dy in 2D.
  double cell_volume() const;

  std::span<complex> amp() { return amp_; }
  std::span<const complex> amp() const { return amp_; }
  complex& operator[](std::size_t i) { return amp_[i]; }
  const complex& operator[](std::size_t i) const { return amp_[i]; }
  complex& at(std::size_t ix, std::size_t iy) { return amp_[ix * ny() + iy]; }
  const complex& at(std::size_t ix, std::size_t iy) const { return amp_[ix * ny() + iy]; }

  bool same_grid(const Wavefunction& other) const;

  /// Rectangle-rule sum of |amp|^2 times the cell volume.
  double norm_squared() const;
  double norm() const;
  /// Scales to unit norm. Throws ValidationError on a zero or non-finite state.
  void normalize();

  /// |amp|^2 per grid point.
  std::vector<double> density() const;

 private:
  Grid1D gx_;
  std::optional<Grid1D> gy_;
  std::vector<complex> amp_;
};

Wavefunction normalized(Wavefunction wf);

// ---------------------------------------------------------------------------
// State and potential descriptions.

struct GaussianState {
  double center = 0.0;
  /// Standard deviation of |psi|^2.
  double sigma = 1.0;
  double k0 = 0.0;
};

struct DensityInterval {
  double lo = 0.0;
  double hi = 1.0;
  /// Relative probability mass carried by [lo, hi).
  double weight = 1.0;
};

/// |psi|^2 constant on each listed interval and zero elsewhere. The phase
/// S/hbar is zero unless a per-grid-point table is supplied.
struct PiecewiseDensityState {
  std::vector<DensityInterval> intervals;
  std::vector<double> phase;
};

/// Eigenfunctions of a harmonic trap of frequency omega centred at `center`,
/// for the system mass m_x.
struct HarmonicBasis {
  double omega = 1.0;
  double center = 0.0;
};

struct SuperpositionTerm {
  complex coefficient;
  int eigenstate = 0;
};

struct SuperpositionState {
  HarmonicBasis basis;
  std::vector<SuperpositionTerm> terms;
};

using StateSpec = std::variant<GaussianState, PiecewiseDensityState, SuperpositionState>;

struct FreePotential {};
struct HarmonicPotential {
  double omega = 1.0;
  double center = 0.0;
};
/// -depth inside |x - center| < width/2, zero outside.
struct SquareWellPotential {
  double depth = 1.0;
  double width = 1.0;
  double center = 0.0;
};
struct TabulatedPotential {
  std::vector<double> values;
};

using PotentialSpec =
    std::variant<FreePotential, HarmonicPotential, SquareWellPotential, TabulatedPotential>;

/// Builds a normalized state. Throws ValidationError for under-resolved
/// features (sigma or oscillator length below 4*dx), interval edges off the
/// grid, invalid weights or coefficients.
Wavefunction init_state(const Grid1D& grid, const StateSpec& spec, const PhysicalParams& params);

/// Normalized harmonic-oscillator eigenfunction n on the grid.
Wavefunction harmonic_eigenstate(const Grid1D& grid, const HarmonicBasis& basis,
                                 const PhysicalParams& params, int n);

/// Exact eigenvalue hbar*omega*(n + 1/2).
double harmonic_energy(const HarmonicBasis& basis, const PhysicalParams& params, int n);

/// psi_x(x) * psi_y(y). Both inputs must be 1D and normalized.
Wavefunction product_state(const Wavefunction& wf_x, const Wavefunction& wf_y);

/// Sum conj(a)*b*dV. Throws ValidationError on grid mismatch.
complex inner_product(const Wavefunction& a, const Wavefunction& b);

/// V(x_i) on the system grid.
std::vector<double> potential_values(const Grid1D& grid, const PotentialSpec& spec,
                                     const PhysicalParams& params);
void validate_potential(const PotentialSpec& spec, const Grid1D& grid);

/// Marginal density over y of a 2D wavefunction (integrated with dy).
std::vector<double> marginal_x(const Wavefunction& wf2d);
/// Marginal density over x of a 2D wavefunction (integrated with dx).
std::vector<double> marginal_y(const Wavefunction& wf2d);

}  // namespace pilotwave

#endif  // PILOTWAVE_WAVEFIELD_HPP_
