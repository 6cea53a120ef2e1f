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

#include "pilotwave/spectral.hpp"

#include <fftw3.h>

#include <map>
#include <mutex>
#include <numbers>
#include <tuple>

#include "pilotwave/error.hpp"

namespace pilotwave::spectral {

namespace {

enum class Layout { k1d, k2d, kRows };

using PlanKey = std::tuple<Layout, int, std::size_t, std::size_t>;

class PlanCache {
 public:
  static PlanCache& instance() {
    static PlanCache cache;
    return cache;
  }

  fftw_plan get(Layout layout, int sign, std::size_t nx, std::size_t ny) {
    std::lock_guard<std::mutex> lock(mutex_);
    const PlanKey key{layout, sign, nx, ny};
    if (auto it = plans_.find(key); it != plans_.end()) return it->second;

    const std::size_t total = layout == Layout::k1d ? nx : nx * ny;
    auto* scratch = fftw_alloc_complex(total);
    const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
    fftw_plan plan = nullptr;
    switch (layout) {
      case Layout::k1d:
        plan = fftw_plan_dft_1d(static_cast<int>(nx), scratch, scratch, sign, flags);
        break;
      case Layout::k2d:
        plan = fftw_plan_dft_2d(static_cast<int>(nx), static_cast<int>(ny), scratch, scratch,
                                sign, flags);
        break;
      case Layout::kRows: {
        const int n = static_cast<int>(ny);
        plan = fftw_plan_many_dft(1, &n, static_cast<int>(nx), scratch, nullptr, 1, n, scratch,
                                  nullptr, 1, n, sign, flags);
        break;
      }
    }
    fftw_free(scratch);
    if (plan == nullptr) throw Error("FFTW failed to create a plan");
    plans_.emplace(key, plan);
    return plan;
  }

  ~PlanCache() {
    for (auto& [key, plan] : plans_) fftw_destroy_plan(plan);
  }

 private:
  std::mutex mutex_;
  std::map<PlanKey, fftw_plan> plans_;
};

void execute(Layout layout, int sign, std::span<complex> data, std::size_t nx, std::size_t ny) {
  fftw_plan plan = PlanCache::instance().get(layout, sign, nx, ny);
  auto* ptr = reinterpret_cast<fftw_complex*>(data.data());
  fftw_execute_dft(plan, ptr, ptr);
}

void scale(std::span<complex> data, double factor) {
  for (auto& v : data) v *= factor;
}

}  // namespace

std::vector<double> wavenumbers(const Grid1D& grid) {
  const std::size_t n = grid.size();
  const double dk = 2.0 * std::numbers::pi / grid.length();
  std::vector<double> k(n);
  for (std::size_t j = 0; j < n; ++j) {
    const auto sj = static_cast<double>(j);
    k[j] = dk * (j < n / 2 ? sj : sj - static_cast<double>(n));
  }
  return k;
}

void forward(std::span<complex> data) { execute(Layout::k1d, FFTW_FORWARD, data, data.size(), 1); }

void inverse(std::span<complex> data) {
  execute(Layout::k1d, FFTW_BACKWARD, data, data.size(), 1);
  scale(data, 1.0 / static_cast<double>(data.size()));
}

void forward_2d(std::span<complex> data, std::size_t nx, std::size_t ny) {
  execute(Layout::k2d, FFTW_FORWARD, data, nx, ny);
}

void inverse_2d(std::span<complex> data, std::size_t nx, std::size_t ny) {
  execute(Layout::k2d, FFTW_BACKWARD, data, nx, ny);
  scale(data, 1.0 / static_cast<double>(nx * ny));
}

void forward_rows(std::span<complex> data, std::size_t nx, std::size_t ny) {
  execute(Layout::kRows, FFTW_FORWARD, data, nx, ny);
}

void inverse_rows(std::span<complex> data, std::size_t nx, std::size_t ny) {
  execute(Layout::kRows, FFTW_BACKWARD, data, nx, ny);
  scale(data, 1.0 / static_cast<double>(ny));
}

namespace {

complex derivative_factor(double k, std::size_t j, std::size_t n, int order) {
  if (order == 1) {
    if (j == n / 2) return {0.0, 0.0};
    return {0.0, k};
  }
  return {-k * k, 0.0};
}

}  // namespace

std::vector<complex> derivative(std::span<const complex> values, const Grid1D& grid, int order) {
  if (order != 1 && order != 2) throw ValidationError("spectral derivative order must be 1 or 2");
  if (values.size() != grid.size()) throw ValidationError("derivative: size mismatch");
  std::vector<complex> work(values.begin(), values.end());
  forward(work);
  const auto k = wavenumbers(grid);
  for (std::size_t j = 0; j < work.size(); ++j) {
    work[j] *= derivative_factor(k[j], j, work.size(), order);
  }
  inverse(work);
  return work;
}

std::vector<complex> derivative(const Wavefunction& wf, int axis, int order) {
  if (order != 1 && order != 2) throw ValidationError("spectral derivative order must be 1 or 2");
  if (!wf.is_2d()) {
    if (axis != 0) throw ValidationError("1D wavefunction has only axis 0");
    return derivative(wf.amp(), wf.gx(), order);
  }
  const std::size_t nx = wf.nx();
  const std::size_t ny = wf.ny();
  std::vector<complex> work(wf.amp().begin(), wf.amp().end());
  if (axis == 1) {
    forward_rows(work, nx, ny);
    const auto ky = wavenumbers(wf.gy());
    for (std::size_t ix = 0; ix < nx; ++ix) {
      for (std::size_t iy = 0; iy < ny; ++iy) {
        work[ix * ny + iy] *= derivative_factor(ky[iy], iy, ny, order);
      }
    }
    inverse_rows(work, nx, ny);
    return work;
  }
  if (axis != 0) throw ValidationError("2D wavefunction has axes 0 and 1");
  forward_2d(work, nx, ny);
  const auto kx = wavenumbers(wf.gx());
  for (std::size_t ix = 0; ix < nx; ++ix) {
    const complex f = derivative_factor(kx[ix], ix, nx, order);
    for (std::size_t iy = 0; iy < ny; ++iy) work[ix * ny + iy] *= f;
  }
  inverse_2d(work, nx, ny);
  return work;
}

}  // namespace pilotwave::spectral
