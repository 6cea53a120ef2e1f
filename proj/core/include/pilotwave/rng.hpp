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

#ifndef PILOTWAVE_RNG_HPP_
#define PILOTWAVE_RNG_HPP_

#include <cstdint>

namespace pilotwave {

/// SplitMix64 finalizer.
std::uint64_t mix64(std::uint64_t z);

/// Counter-based random stream. Output i of stream s under seed k is a pure
/// function of (k, s, i), so parallel consumers that own distinct stream
/// indices draw reproducible values regardless of scheduling. Uniform
/// variates are built from raw bits, not from <random> distributions, whose
/// algorithms differ between standard libraries.
class RandomStream {
 public:
  RandomStream(std::uint64_t seed, std::uint64_t stream);

  std::uint64_t next_u64();

  /// Uniform on [0, 1) with 53 random bits.
  double uniform();

  std::uint64_t counter() const { return counter_; }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

/// Well-known stream indices. Ensemble member i uses kEnsembleBase + i.
namespace streams {
inline constexpr std::uint64_t kInitialPosition = 1;
inline constexpr std::uint64_t kDetector = 2;
inline constexpr std::uint64_t kShiftSeed = 3;
inline constexpr std::uint64_t kEnsembleBase = 1u << 20;
}  // namespace streams

}  // namespace pilotwave

#endif  // PILOTWAVE_RNG_HPP_
