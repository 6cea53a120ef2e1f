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

#include "pilotwave/interpolate.hpp"

#include <cmath>

namespace pilotwave {

AxisCell locate(const Grid1D& grid, double x) {
  const double s = (grid.wrap(x) - grid.x_min()) / grid.dx();
  double lo = std::floor(s);
  double frac = s - lo;
  if (frac >= 1.0) {
    lo += 1.0;
    frac = 0.0;
  }
  return {static_cast<std::ptrdiff_t>(lo), frac};
}

std::size_t FieldShape::nearest(std::span<const double> pos) const {
  const auto cx = locate(gx, pos[0]);
  const std::size_t ix = periodic_index(cx.lo + (cx.frac >= 0.5 ? 1 : 0), gx.size());
  if (!gy) return ix;
  const auto cy = locate(*gy, pos[1]);
  const std::size_t iy = periodic_index(cy.lo + (cy.frac >= 0.5 ? 1 : 0), gy->size());
  return index(ix, iy);
}

FieldShape FieldShape::of(const Wavefunction& wf) {
  return wf.is_2d() ? FieldShape{wf.gx(), wf.gy()} : FieldShape{wf.gx(), std::nullopt};
}

double interpolate(std::span<const double> field, const FieldShape& shape,
                   std::span<const double> pos) {
  const auto cx = locate(shape.gx, pos[0]);
  const std::size_t x0 = periodic_index(cx.lo, shape.gx.size());
  const std::size_t x1 = periodic_index(cx.lo + 1, shape.gx.size());
  if (!shape.gy) return (1.0 - cx.frac) * field[x0] + cx.frac * field[x1];

  const auto cy = locate(*shape.gy, pos[1]);
  const std::size_t y0 = periodic_index(cy.lo, shape.gy->size());
  const std::size_t y1 = periodic_index(cy.lo + 1, shape.gy->size());
  const double f00 = field[shape.index(x0, y0)];
  const double f01 = field[shape.index(x0, y1)];
  const double f10 = field[shape.index(x1, y0)];
  const double f11 = field[shape.index(x1, y1)];
  return (1.0 - cx.frac) * ((1.0 - cy.frac) * f00 + cy.frac * f01) +
         cx.frac * ((1.0 - cy.frac) * f10 + cy.frac * f11);
}

}  // namespace pilotwave
