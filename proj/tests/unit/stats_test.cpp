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

#include <cmath>
#include <vector>

#include <gtest/gtest.h>

#include "pilotwave/error.hpp"

using namespace pilotwave;

TEST(TotalVariation, half_l1) {
  const std::vector<double> p{0.5, 0.5};
  const std::vector<double> q{1.0, 0.0};
  EXPECT_DOUBLE_EQ(total_variation(p, q), 0.5);
  EXPECT_DOUBLE_EQ(total_variation(q, p), 0.5);
  EXPECT_DOUBLE_EQ(total_variation(p, p), 0.0);
}

TEST(Chi2, survival_matches_closed_forms) {
  // Two degrees of freedom: Q = exp(-x/2).
  for (double x : {0.1, 1.0, 4.0, 17.0}) EXPECT_NEAR(chi2_survival(x, 2.0), std::exp(-x / 2.0), 1e-14);
  // One degree of freedom: Q = erfc(sqrt(x/2)).
  for (double x : {0.3, 2.0, 9.0}) {
    EXPECT_NEAR(chi2_survival(x, 1.0), std::erfc(std::sqrt(x / 2.0)), 1e-14);
  }
}

TEST(Chi2, sparse_bins_are_merged) {
  const std::vector<double> counts{1, 0, 2, 50, 47};
  const std::vector<double> probs{0.01, 0.01, 0.01, 0.49, 0.48};
  const auto r = chi2_test(counts, probs);
  EXPECT_EQ(r.bins, 2u);
  EXPECT_GT(r.pvalue, 0.05);
}

TEST(Chi2, count_in_an_impossible_bin_is_infinite) {
  const std::vector<double> counts{10, 1};
  const std::vector<double> probs{1.0, 0.0};
  const auto r = chi2_test(counts, probs);
  EXPECT_TRUE(std::isinf(r.chi2));
  EXPECT_EQ(r.pvalue, 0.0);
}

TEST(KS, uniform_distance) {
  const std::vector<double> one{0.5};
  EXPECT_DOUBLE_EQ(ks_uniform(one, 0.0, 1.0), 0.5);
  std::vector<double> grid;
  for (int i = 0; i < 100; ++i) grid.push_back((i + 0.5) / 100.0);
  EXPECT_NEAR(ks_uniform(grid, 0.0, 1.0), 0.005, 1e-12);
}

TEST(KS, grid_density_agrees_with_uniform) {
  const Grid1D g = Grid1D::make(0.0, 1.0, 64);
  const std::vector<double> flat(64, 1.0);
  const std::vector<double> xs{0.1, 0.35, 0.36, 0.8, 0.99};
  EXPECT_NEAR(ks_against_density(xs, g, flat), ks_uniform(xs, 0.0, 1.0), 1e-12);
}

TEST(GridCdf, inverse_skips_empty_cells) {
  const Grid1D g = Grid1D::make(0.0, 4.0, 16);
  std::vector<double> rho(16, 0.0);
  for (int i = 0; i < 4; ++i) rho[i] = 1.0;
  for (int i = 12; i < 16; ++i) rho[i] = 1.0;
  const GridCdf cdf(g, rho);
  EXPECT_DOUBLE_EQ(cdf.cdf(1.0), 0.5);
  EXPECT_DOUBLE_EQ(cdf.cdf(2.0), 0.5);
  EXPECT_GE(cdf.inverse(0.5), 3.0);
  EXPECT_NEAR(cdf.inverse(0.25), 0.5, 1e-14);
  EXPECT_NEAR(cdf.mass(0.0, 0.5), 0.25, 1e-14);
}

TEST(Slope, power_law) {
  std::vector<double> x;
  std::vector<double> y;
  for (double m : {10.0, 20.0, 50.0, 100.0, 200.0}) {
    x.push_back(m);
    y.push_back(3.0 / std::sqrt(m));
  }
  EXPECT_NEAR(loglog_slope(x, y), -0.5, 1e-12);
}

TEST(Histogram, wraps_periodically) {
  const Grid1D g = Grid1D::make(0.0, 1.0, 16);
  const std::vector<double> xs{0.01, 1.01, -0.99, 0.5};
  const auto h = histogram(xs, g, 4);
  ASSERT_EQ(h.size(), 4u);
  EXPECT_EQ(h[0], 3.0);
  EXPECT_EQ(h[2], 1.0);
}

TEST(DensityStats, quantile_samples_are_close) {
  const Grid1D g = Grid1D::make(0.0, 1.0, 64);
  std::vector<double> rho(64);
  for (int i = 0; i < 64; ++i) rho[i] = 2.0 * (i + 0.5) / 64.0;
  const GridCdf cdf(g, rho);
  std::vector<double> xs;
  for (int i = 0; i < 2000; ++i) xs.push_back(cdf.inverse((i + 0.5) / 2000.0));
  const auto s = density_stats(xs, g, rho);
  EXPECT_LT(s.ks_distance, 1e-3);
  EXPECT_LT(s.total_variation, 1e-2);
  EXPECT_EQ(s.n_samples, 2000u);
}
