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

#include "pilotwave/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include <boost/math/special_functions/gamma.hpp>

#include "pilotwave/error.hpp"

namespace pilotwave {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Groups adjacent categories so that each group's reference mass reaches
// min_mass. Runs of (numerically) empty categories form their own groups so
// that mass appearing where the reference has none stays visible.
std::vector<std::size_t> group_bins(std::span<const double> probabilities, double min_mass) {
  const double max_p = *std::max_element(probabilities.begin(), probabilities.end());
  const double zero = 1e-12 * max_p;
  std::vector<std::size_t> group(probabilities.size());
  std::size_t g = 0;
  double acc = 0.0;
  bool open = false;
  bool open_empty = false;
  for (std::size_t i = 0; i < probabilities.size(); ++i) {
    const bool empty = probabilities[i] <= zero;
    if (open && (empty != open_empty || (!empty && acc >= min_mass))) {
      ++g;
      acc = 0.0;
      open = false;
    }
    if (!open) {
      open = true;
      open_empty = empty;
    }
    group[i] = g;
    acc += probabilities[i];
  }
  // Fold an underfilled trailing group into its predecessor when both
  // carry mass.
  if (g > 0 && !open_empty && acc < min_mass) {
    const std::size_t prev = g - 1;
    bool prev_empty = true;
    for (std::size_t i = 0; i < group.size(); ++i) {
      if (group[i] == prev && probabilities[i] > zero) prev_empty = false;
    }
    if (!prev_empty) {
      for (auto& x : group) {
        if (x == g) x = prev;
      }
    }
  }
  return group;
}

struct Merged {
  std::vector<double> counts;
  std::vector<double> probs;
};

Merged merge(std::span<const double> counts, std::span<const double> probabilities,
             const std::vector<std::size_t>& group) {
  const std::size_t n = group.empty() ? 0 : group.back() + 1;
  Merged m{std::vector<double>(n, 0.0), std::vector<double>(n, 0.0)};
  for (std::size_t i = 0; i < group.size(); ++i) {
    m.counts[group[i]] += counts[i];
    m.probs[group[i]] += probabilities[i];
  }
  return m;
}

Chi2Result chi2_merged(const Merged& m, double total) {
  const double max_p = *std::max_element(m.probs.begin(), m.probs.end());
  Chi2Result r;
  r.bins = m.counts.size();
  std::size_t used = 0;
  for (std::size_t i = 0; i < m.counts.size(); ++i) {
    if (m.probs[i] <= 1e-12 * max_p) {
      if (m.counts[i] > 0.0) r.chi2 = kInf;
      continue;
    }
    const double e = total * m.probs[i];
    r.chi2 += (m.counts[i] - e) * (m.counts[i] - e) / e;
    ++used;
  }
  if (std::isinf(r.chi2)) {
    r.pvalue = 0.0;
  } else {
    r.pvalue = used > 1 ? chi2_survival(r.chi2, static_cast<double>(used - 1)) : 1.0;
  }
  return r;
}

double sum(std::span<const double> v) { return std::accumulate(v.begin(), v.end(), 0.0); }

}  // namespace

GridCdf::GridCdf(const Grid1D& grid, std::span<const double> density)
    : grid_(grid), density_(density.begin(), density.end()), cum_(grid.size() + 1, 0.0) {
  if (density.size() != grid.size()) throw ValidationError("GridCdf: density length mismatch");
  for (std::size_t i = 0; i < density_.size(); ++i) {
    if (!(density_[i] >= 0.0) || !std::isfinite(density_[i])) {
      throw ValidationError("GridCdf: density must be finite and non-negative");
    }
    cum_[i + 1] = cum_[i] + density_[i];
  }
  if (!(cum_.back() > 0.0)) throw ValidationError("GridCdf: density has no mass");
}

double GridCdf::cdf(double x) const {
  const double s = (grid_.wrap(x) - grid_.x_min()) / grid_.dx();
  const auto cell = std::min(static_cast<std::size_t>(std::max(0.0, std::floor(s))),
                             grid_.size() - 1);
  const double frac = std::clamp(s - static_cast<double>(cell), 0.0, 1.0);
  return std::min(1.0, (cum_[cell] + frac * density_[cell]) / cum_.back());
}

double GridCdf::inverse(double u) const {
  if (!(u >= 0.0 && u <= 1.0)) throw ValidationError("GridCdf: u outside [0, 1]");
  const double target = u * cum_.back();
  // First cell whose upper cumulative mass exceeds the target.
  auto it = std::upper_bound(cum_.begin() + 1, cum_.end(), target);
  if (it == cum_.end()) {
    // u == 1: the upper end of the last populated cell.
    std::size_t i = density_.size();
    while (i > 0 && density_[i - 1] == 0.0) --i;
    return grid_.x_min() + static_cast<double>(i) * grid_.dx();
  }
  const auto cell = static_cast<std::size_t>(it - cum_.begin()) - 1;
  const double frac = std::clamp((target - cum_[cell]) / density_[cell], 0.0, 1.0);
  return grid_.point(cell) + frac * grid_.dx();
}

double GridCdf::mass(double lo, double hi) const {
  auto raw = [&](double x) {
    if (x <= grid_.x_min()) return 0.0;
    if (x >= grid_.x_max()) return 1.0;
    return cdf(x);
  };
  return raw(hi) - raw(lo);
}

double total_variation(std::span<const double> p, std::span<const double> q) {
  if (p.size() != q.size()) throw ValidationError("total_variation: length mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) s += std::abs(p[i] - q[i]);
  return std::min(1.0, 0.5 * s);
}

double chi2_survival(double chi2, double dof) {
  if (!(dof > 0.0)) throw ValidationError("chi2_survival: dof must be positive");
  if (std::isinf(chi2)) return 0.0;
  if (!(chi2 >= 0.0)) throw ValidationError("chi2_survival: statistic must be non-negative");
  return boost::math::gamma_q(0.5 * dof, 0.5 * chi2);
}

Chi2Result chi2_test(std::span<const double> counts, std::span<const double> probabilities,
                     double min_expected) {
  if (counts.size() != probabilities.size() || counts.empty()) {
    throw ValidationError("chi2_test: counts and probabilities must be nonempty and aligned");
  }
  const double total = sum(counts);
  if (!(total > 0.0)) throw ValidationError("chi2_test: no counts");
  const auto group = group_bins(probabilities, min_expected / total);
  return chi2_merged(merge(counts, probabilities, group), total);
}

double ks_against_density(std::span<const double> samples, const Grid1D& grid,
                          std::span<const double> density) {
  if (density.size() != grid.size()) throw ValidationError("ks: density length mismatch");
  if (samples.empty()) throw ValidationError("ks: no samples");
  std::vector<double> cdf(grid.size() + 1, 0.0);
  for (std::size_t i = 0; i < grid.size(); ++i) cdf[i + 1] = cdf[i] + density[i];
  const double total = cdf.back();
  if (!(total > 0.0)) throw ValidationError("ks: reference density has no mass");

  std::vector<double> xs(samples.begin(), samples.end());
  std::sort(xs.begin(), xs.end());
  const double n = static_cast<double>(xs.size());
  double d = 0.0;
  for (std::size_t j = 0; j < xs.size(); ++j) {
    const double s = (grid.wrap(xs[j]) - grid.x_min()) / grid.dx();
    const auto cell = std::min(static_cast<std::size_t>(std::max(0.0, std::floor(s))),
                               grid.size() - 1);
    const double frac = std::clamp(s - static_cast<double>(cell), 0.0, 1.0);
    const double f = (cdf[cell] + frac * density[cell]) / total;
    d = std::max({d, f - static_cast<double>(j) / n, static_cast<double>(j + 1) / n - f});
  }
  return d;
}

double ks_uniform(std::span<const double> samples, double lo, double hi) {
  if (samples.empty()) throw ValidationError("ks: no samples");
  if (!(hi > lo)) throw ValidationError("ks: empty interval");
  std::vector<double> xs(samples.begin(), samples.end());
  std::sort(xs.begin(), xs.end());
  const double n = static_cast<double>(xs.size());
  double d = 0.0;
  for (std::size_t j = 0; j < xs.size(); ++j) {
    const double f = std::clamp((xs[j] - lo) / (hi - lo), 0.0, 1.0);
    d = std::max({d, f - static_cast<double>(j) / n, static_cast<double>(j + 1) / n - f});
  }
  return d;
}

DistributionStats categorical_stats(std::span<const double> counts,
                                    std::span<const double> probabilities) {
  if (counts.size() != probabilities.size() || counts.empty()) {
    throw ValidationError("categorical_stats: counts and probabilities must align");
  }
  const double total = sum(counts);
  if (!(total > 0.0)) throw ValidationError("categorical_stats: no counts");
  DistributionStats s;
  s.n_samples = static_cast<std::size_t>(std::llround(total));
  std::vector<double> p(counts.size());
  double cp = 0.0;
  double cq = 0.0;
  for (std::size_t i = 0; i < counts.size(); ++i) {
    p[i] = counts[i] / total;
    cp += p[i];
    cq += probabilities[i];
    s.ks_distance = std::max(s.ks_distance, std::abs(cp - cq));
  }
  s.ks_distance = std::min(1.0, s.ks_distance);
  s.total_variation = total_variation(p, probabilities);
  const auto chi = chi2_test(counts, probabilities);
  s.chi2 = chi.chi2;
  s.chi2_pvalue = chi.pvalue;
  s.n_bins = chi.bins;
  return s;
}

std::vector<double> histogram(std::span<const double> samples, const Grid1D& grid,
                              std::size_t cells_per_bin) {
  if (cells_per_bin == 0) throw ValidationError("histogram: cells_per_bin must be positive");
  const std::size_t bins = (grid.size() + cells_per_bin - 1) / cells_per_bin;
  std::vector<double> h(bins, 0.0);
  for (const double x : samples) {
    const double s = (grid.wrap(x) - grid.x_min()) / grid.dx();
    const auto cell = std::min(static_cast<std::size_t>(std::max(0.0, std::floor(s))),
                               grid.size() - 1);
    h[cell / cells_per_bin] += 1.0;
  }
  return h;
}

DistributionStats density_stats(std::span<const double> samples, const Grid1D& grid,
                                std::span<const double> density) {
  if (density.size() != grid.size()) throw ValidationError("density_stats: length mismatch");
  const double mass = sum(density);
  std::vector<double> probs(density.size());
  for (std::size_t i = 0; i < density.size(); ++i) probs[i] = density[i] / mass;
  const auto counts = histogram(samples, grid, 1);
  const double n = static_cast<double>(samples.size());

  DistributionStats s;
  s.n_samples = samples.size();
  s.ks_distance = ks_against_density(samples, grid, density);
  // Coarse bins: at least 5 expected counts and at most about 20 bins, so
  // the finite-sample bias of TV stays below 3/sqrt(n).
  const double min_mass = std::max(5.0 / n, 1.0 / 20.0);
  const auto group = group_bins(probs, min_mass);
  const auto merged = merge(counts, probs, group);
  std::vector<double> p(merged.counts.size());
  for (std::size_t i = 0; i < p.size(); ++i) p[i] = merged.counts[i] / n;
  s.total_variation = total_variation(p, merged.probs);
  const auto chi = chi2_merged(merged, n);
  s.chi2 = chi.chi2;
  s.chi2_pvalue = chi.pvalue;
  s.n_bins = chi.bins;
  return s;
}

double loglog_slope(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw ValidationError("loglog_slope: length mismatch");
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  std::size_t n = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!(x[i] > 0.0 && y[i] > 0.0)) continue;
    const double lx = std::log(x[i]);
    const double ly = std::log(y[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
    ++n;
  }
  if (n < 2) throw ValidationError("loglog_slope: need two positive points");
  const double dn = static_cast<double>(n);
  const double den = dn * sxx - sx * sx;
  if (den == 0.0) throw ValidationError("loglog_slope: degenerate abscissae");
  return (dn * sxy - sx * sy) / den;
}

}  // namespace pilotwave
