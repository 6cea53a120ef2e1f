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

#ifndef PILOTWAVE_FIXED_POINT_HPP_
#define PILOTWAVE_FIXED_POINT_HPP_

#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "pilotwave/rng.hpp"

namespace pilotwave {

/// Number of fractional bits used for quantized interval edges.
inline constexpr int kEdgeBits = 60;

/// Fraction in [0, 1) stored as width_bits binary digits, most significant
/// limb first. Arithmetic truncates; nothing ever rounds through a double.
class FixedFraction {
 public:
  FixedFraction() = default;
  /// Zero with the given width (rounded up to a multiple of 64, min 64).
  explicit FixedFraction(std::size_t width_bits);

  static FixedFraction from_double(double u, std::size_t width_bits);
  /// Exact binary expansion of a decimal literal like "0.3", truncated.
  static FixedFraction from_decimal(std::string_view text, std::size_t width_bits);
  /// Uniformly random digits.
  static FixedFraction random(RandomStream& rng, std::size_t width_bits);

  std::size_t width_bits() const { return limbs_.size() * 64; }
  const std::vector<std::uint64_t>& limbs() const { return limbs_; }
  bool is_zero() const;
  /// Leading 53 bits, rounded toward zero.
  double to_double() const;
  /// Leading kEdgeBits bits as an integer.
  std::uint64_t top_bits() const { return limbs_.empty() ? 0 : limbs_[0] >> (64 - kEdgeBits); }

  /// u -> 2u mod 1.
  void double_map();
  /// Affine stretch of the interval [lo, lo + width) onto [0, 1); lo and
  /// width are multiples of 2^-kEdgeBits given as integers. Requires
  /// lo <= u < lo + width.
  void stretch(std::uint64_t lo, std::uint64_t width);

  /// (u + other) mod 1 and (u - other) mod 1; widths must match.
  void add(const FixedFraction& other);
  void subtract(const FixedFraction& other);

  friend bool operator==(const FixedFraction&, const FixedFraction&) = default;

 private:
  std::vector<std::uint64_t> limbs_;
};

/// Rounds an edge in [0, 1] to the kEdgeBits lattice.
std::uint64_t quantize_edge(double u);

/// Doubling-map state x_n.
struct ShiftState {
  FixedFraction value;

  std::size_t width_bits() const { return value.width_bits(); }
};

/// Orbit x_1 .. x_steps of x -> 2x mod 1 (rounded to double for
/// reporting). Throws ValidationError unless width_bits >= steps + 64.
std::vector<double> bernoulli_shift(const ShiftState& s, std::size_t steps);

/// Same, leaving the state advanced.
std::vector<double> bernoulli_shift_inplace(ShiftState& s, std::size_t steps);

}  // namespace pilotwave

#endif  // PILOTWAVE_FIXED_POINT_HPP_
