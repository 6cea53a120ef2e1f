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

#ifndef PILOTWAVE_SPECTRAL_HPP_
#define PILOTWAVE_SPECTRAL_HPP_

#include <cstddef>
#include <span>
#include <vector>

#include "pilotwave/wavefield.hpp"

// In-place discrete Fourier transforms on periodic grids (FFTW underneath).
// Inverse transforms include the 1/N factor, so inverse(forward(f)) == f.
// Plans are cached per shape and are safe to execute from many threads.
namespace pilotwave::spectral {

/// Angular wavenumbers in FFT order: 2*pi/L * {0, 1, ..., n/2-1, -n/2, ..., -1}.
std::vector<double> wavenumbers(const Grid1D& grid);

void forward(std::span<complex> data);
void inverse(std::span<complex> data);

/// Full 2D transform of an nx-by-ny row-major array.
void forward_2d(std::span<complex> data, std::size_t nx, std::size_t ny);
void inverse_2d(std::span<complex> data, std::size_t nx, std::size_t ny);

/// Transforms every contiguous row of length ny (the detector axis) of an
/// nx-by-ny array; x stays in position space (mixed representation).
void forward_rows(std::span<complex> data, std::size_t nx, std::size_t ny);
void inverse_rows(std::span<complex> data, std::size_t nx, std::size_t ny);

/// Spectral derivative of `order` (1 or 2) along `axis` (0 = x, 1 = y).
/// First derivatives drop the Nyquist mode so real fields stay real.
std::vector<complex> derivative(const Wavefunction& wf, int axis, int order);

/// Same, for a bare 1D array on `grid`.
std::vector<complex> derivative(std::span<const complex> values, const Grid1D& grid, int order);

}  // namespace pilotwave::spectral

#endif  // PILOTWAVE_SPECTRAL_HPP_
