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

#ifndef PILOTWAVE_TESTS_TEST_SUPPORT_HPP_
#define PILOTWAVE_TESTS_TEST_SUPPORT_HPP_

#include <cstdint>
#include <random>
#include <string>

// Seeded case generator for property tests. Deliberately independent of the
// library's own counter-based stream.
class CaseGen {
 public:
  explicit CaseGen(std::uint64_t seed) : eng_(seed) {}

  double uniform(double lo, double hi) {
    return lo + (hi - lo) * std::uniform_real_distribution<double>(0.0, 1.0)(eng_);
  }
  int integer(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(eng_); }
  std::uint64_t bits() { return eng_(); }
  bool coin() { return integer(0, 1) == 1; }

 private:
  std::mt19937_64 eng_;
};

inline std::string case_label(std::uint64_t seed, int i) {
  return "seed " + std::to_string(seed) + ", case " + std::to_string(i);
}

#endif  // PILOTWAVE_TESTS_TEST_SUPPORT_HPP_
