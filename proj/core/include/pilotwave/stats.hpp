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

#ifndef PILOTWAVE_STATS_HPP_
#define PILOTWAVE_STATS_HPP_

#include <cstddef>
#include <span>
#include <vector>

#include "pilotwave/wavefield.hpp"

namespace pilotwave {

struct DistributionStats {
  double total_variation = 0.0;
  double ks_distance = 0.0;
  double chi2 = 0.0;
  double chi2_pvalue = 1.0;
  std::size_t n_samples = 0;
  std::size_t n_bins = 0;
};

/// Cell-linear CDF of a non-negative grid density: cell i covers
/// [x_i, x_i + dx) with constant density.
class GridCdf {
 public:
  GridCdf(const Grid1D& grid, std::span<const double> density);

  const Grid1D& grid() const { return grid_; }
  /// F(x) for x wrapped into the domain.
  double cdf(double x) const;
  /// Smallest x with F(x) = u, never inside an empty cell.
  double inverse(double u) const;
  /// Mass of [lo, hi) relative to the total.
  double mass(double lo, double hi) const;

 private:
  Grid1D grid_;
  std::vector<double> density_;
  std::vector<double> cum_;
};

/// Half the L1 distance between two probability vectors of equal length.
double total_variation(std::span<const double> p, std::span<const double> q);

/// Upper tail of the chi-squared distribution with dof degrees of freedom.
double chi2_survival(double chi2, double dof);

/// Pearson statistic of observed counts against expected probabilities,
/// after merging adjacent bins until each expects at least min_expected
/// counts. Bins with zero expectation are kept apart; any count landing in
/// one makes the statistic infinite.
struct Chi2Result {
  double chi2 = 0.0;
  double pvalue = 1.0;
  std::size_t bins = 0;
};
Chi2Result chi2_test(std::span<const double> counts, std::span<const double> probabilities,
                     double min_expected = 5.0);

/// Kolmogorov distance of samples from the cell-linear CDF of a grid
/// density (cell i covers [x_i, x_i + dx)).
double ks_against_density(std::span<const double> samples, const Grid1D& grid,
                          std::span<const double> density);

/// Kolmogorov distance from the uniform law on [lo, hi).
double ks_uniform(std::span<const double> samples, double lo, double hi);

/// Counts and reference probabilities over categories in a fixed order.
DistributionStats categorical_stats(std::span<const double> counts,
                                    std::span<const double> probabilities);

/// Samples against a grid density: KS on the continuous CDF, TV and chi2 on
/// coarse bins merged from grid cells.
DistributionStats density_stats(std::span<const double> samples, const Grid1D& grid,
                                std::span<const double> density);

/// Least-squares slope of log(y) against log(x); non-positive points are
/// skipped.
double loglog_slope(std::span<const double> x, std::span<const double> y);

/// Histogram of samples on the grid's periodic domain with `cells_per_bin`
/// grid cells per bin.
std::vector<double> histogram(std::span<const double> samples, const Grid1D& grid,
                              std::size_t cells_per_bin);

}  // namespace pilotwave

#endif  // PILOTWAVE_STATS_HPP_
