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

#ifndef PILOTWAVE_INTERPOLATE_HPP_
#define PILOTWAVE_INTERPOLATE_HPP_

#include <array>
#include <cstddef>
#include <optional>
#include <span>

#include "pilotwave/wavefield.hpp"

namespace pilotwave {

/// Cell containing x on a periodic axis: grid lines lo and hi = lo+1 (mod n)
/// and the fractional offset of x from lo in [0, 1).
struct AxisCell {
  std::ptrdiff_t lo = 0;
  double frac = 0.0;
};

AxisCell locate(const Grid1D& grid, double x);

inline std::size_t periodic_index(std::ptrdiff_t i, std::size_t n) {
  const auto sn = static_cast<std::ptrdiff_t>(n);
  return static_cast<std::size_t>(((i % sn) + sn) % sn);
}

/// Row-major grid shape shared by density, velocity and potential fields.
struct FieldShape {
  Grid1D gx;
  std::optional<Grid1D> gy;

  int dims() const { return gy ? 2 : 1; }
  std::size_t ny() const { return gy ? gy->size() : 1; }
  std::size_t size() const { return gx.size() * ny(); }
  std::size_t index(std::size_t ix, std::size_t iy) const { return ix * ny() + iy; }
  /// Nearest grid point to pos (periodic).
  std::size_t nearest(std::span<const double> pos) const;
  std::array<double, 2> cell() const { return {gx.dx(), gy ? gy->dx() : 0.0}; }

  static FieldShape of(const Wavefunction& wf);
};

/// Multilinear interpolation of a real grid field at pos.
double interpolate(std::span<const double> field, const FieldShape& shape,
                   std::span<const double> pos);

}  // namespace pilotwave

#endif  // PILOTWAVE_INTERPOLATE_HPP_
