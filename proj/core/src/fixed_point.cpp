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

#include "pilotwave/fixed_point.hpp"

#include <cmath>
#include <string>

#include "pilotwave/error.hpp"

namespace pilotwave {

namespace {

__extension__ typedef unsigned __int128 u128;

std::size_t limb_count(std::size_t width_bits) {
  return width_bits <= 64 ? 1 : (width_bits + 63) / 64;
}

}  // namespace

FixedFraction::FixedFraction(std::size_t width_bits) : limbs_(limb_count(width_bits), 0) {}

FixedFraction FixedFraction::from_double(double u, std::size_t width_bits) {
  if (!(u >= 0.0 && u < 1.0)) throw ValidationError("fixed point value must lie in [0, 1)");
  FixedFraction f(width_bits);
  // Peel off 64 bits at a time; the binary expansion of a double is finite.
  double rest = u;
  for (auto& limb : f.limbs_) {
    if (rest == 0.0) break;
    const double scaled = std::ldexp(rest, 64);
    const double whole = std::floor(scaled);
    limb = static_cast<std::uint64_t>(whole);
    rest = scaled - whole;
  }
  return f;
}

FixedFraction FixedFraction::from_decimal(std::string_view text, std::size_t width_bits) {
  std::size_t pos = 0;
  if (text.size() >= 2 && text[0] == '0' && text[1] == '.') {
    pos = 2;
  } else if (!text.empty() && text[0] == '.') {
    pos = 1;
  } else {
    throw ValidationError("decimal fraction must look like 0.ddd: " + std::string(text));
  }
  std::vector<int> digits;
  for (; pos < text.size(); ++pos) {
    const char c = text[pos];
    if (c < '0' || c > '9') throw ValidationError("bad digit in decimal fraction");
    digits.push_back(c - '0');
  }
  FixedFraction f(width_bits);
  // Each doubling of the decimal fraction pushes out the next binary digit.
  for (std::size_t bit = 0; bit < f.width_bits(); ++bit) {
    int carry = 0;
    for (std::size_t i = digits.size(); i-- > 0;) {
      const int d = digits[i] * 2 + carry;
      digits[i] = d % 10;
      carry = d / 10;
    }
    if (carry) f.limbs_[bit / 64] |= std::uint64_t{1} << (63 - bit % 64);
  }
  return f;
}

FixedFraction FixedFraction::random(RandomStream& rng, std::size_t width_bits) {
  FixedFraction f(width_bits);
  for (auto& limb : f.limbs_) limb = rng.next_u64();
  return f;
}

bool FixedFraction::is_zero() const {
  for (const auto limb : limbs_) {
    if (limb != 0) return false;
  }
  return true;
}

double FixedFraction::to_double() const {
  if (limbs_.empty()) return 0.0;
  // Truncate to 53 bits so the result is exact and strictly below 1.
  const std::uint64_t hi = limbs_[0] >> 11;
  double v = std::ldexp(static_cast<double>(hi), -53);
  if (hi == 0 && limbs_.size() > 1) {
    // Tiny values: fall back to a sum over limbs.
    v = 0.0;
    for (std::size_t i = 0; i < limbs_.size() && i < 20; ++i) {
      v += std::ldexp(static_cast<double>(limbs_[i]), -64 * static_cast<int>(i + 1));
    }
  }
  return v;
}

void FixedFraction::double_map() {
  const std::size_t n = limbs_.size();
  for (std::size_t i = 0; i < n; ++i) {
    const std::uint64_t next = i + 1 < n ? limbs_[i + 1] >> 63 : 0;
    limbs_[i] = (limbs_[i] << 1) | next;
  }
}

void FixedFraction::stretch(std::uint64_t lo, std::uint64_t width) {
  constexpr std::uint64_t kOne = std::uint64_t{1} << kEdgeBits;
  constexpr int kPad = 64 - kEdgeBits;
  if (width == 0 || width > kOne || lo >= kOne || lo + width > kOne) {
    throw ValidationError("stretch: interval outside [0, 1)");
  }
  const std::uint64_t top = top_bits();
  if (top < lo || top - lo >= width) throw ValidationError("stretch: value outside the interval");
  const std::size_t n = limbs_.size();

  limbs_[0] -= lo << kPad;
  // (u - lo) * 2^kEdgeBits spans n + 1 limbs.
  std::vector<std::uint64_t> wide(n + 1);
  wide[0] = limbs_[0] >> kPad;
  for (std::size_t i = 1; i < n; ++i) {
    wide[i] = (limbs_[i - 1] << kEdgeBits) | (limbs_[i] >> kPad);
  }
  wide[n] = limbs_[n - 1] << kEdgeBits;

  u128 rem = 0;
  for (std::size_t i = 0; i <= n; ++i) {
    const u128 cur = (rem << 64) | wide[i];
    const auto q = static_cast<std::uint64_t>(cur / width);
    rem = cur % width;
    if (i == 0) {
      if (q != 0) throw ValidationError("stretch: result not below 1");
    } else {
      limbs_[i - 1] = q;
    }
  }
}

void FixedFraction::add(const FixedFraction& other) {
  if (other.limbs_.size() != limbs_.size()) throw ValidationError("fixed point width mismatch");
  unsigned carry = 0;
  for (std::size_t i = limbs_.size(); i-- > 0;) {
    const u128 s =
        static_cast<u128>(limbs_[i]) + other.limbs_[i] + carry;
    limbs_[i] = static_cast<std::uint64_t>(s);
    carry = static_cast<unsigned>(s >> 64);
  }
}

void FixedFraction::subtract(const FixedFraction& other) {
  if (other.limbs_.size() != limbs_.size()) throw ValidationError("fixed point width mismatch");
  unsigned borrow = 0;
  for (std::size_t i = limbs_.size(); i-- > 0;) {
    const std::uint64_t b = other.limbs_[i];
    const std::uint64_t d = limbs_[i] - b - borrow;
    borrow = (limbs_[i] < b || (limbs_[i] == b && borrow)) ? 1 : 0;
    limbs_[i] = d;
  }
}

std::uint64_t quantize_edge(double u) {
  if (!(u >= 0.0 && u <= 1.0)) throw ValidationError("interval edge outside [0, 1]");
  return static_cast<std::uint64_t>(std::llround(std::ldexp(u, kEdgeBits)));
}

std::vector<double> bernoulli_shift_inplace(ShiftState& s, std::size_t steps) {
  if (s.width_bits() < 64) throw ValidationError("bernoulli_shift: width below 64 bits");
  if (s.width_bits() < steps + 64) {
    throw ValidationError("bernoulli_shift: " + std::to_string(steps) + " steps need at least " +
                          std::to_string(steps + 64) + " bits, state has " +
                          std::to_string(s.width_bits()));
  }
  std::vector<double> orbit;
  orbit.reserve(steps);
  for (std::size_t i = 0; i < steps; ++i) {
    s.value.double_map();
    orbit.push_back(s.value.to_double());
  }
  return orbit;
}

std::vector<double> bernoulli_shift(const ShiftState& s, std::size_t steps) {
  ShiftState copy = s;
  return bernoulli_shift_inplace(copy, steps);
}

}  // namespace pilotwave
