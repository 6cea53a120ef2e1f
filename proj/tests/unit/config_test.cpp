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

#include "pilotwave/config.hpp"

#include <string>

#include <gtest/gtest.h>

#include "pilotwave/error.hpp"

using namespace pilotwave;

namespace {

const char* kPropagate = R"(
kind: propagate
seed: 5
grid:
  x: {min: -20, max: 20, n: 512}
state:
  gaussian: {center: 0, sigma: 1}
plan: {dt: 0.001, steps: 100}
)";

std::string measure_config(const std::string& extra, double duration = 5.0,
                           const std::string& kind = "measure") {
  return "kind: " + kind + R"(
seed: 7
grid:
  x: {min: -1, max: 3, n: 256}
  y: {min: -10, max: 20, n: 256}
state:
  piecewise:
    intervals: [{lo: 0, hi: 1}, {lo: 1, hi: 2}]
measurement:
  observable: {binned: {edges: [0, 1, 2]}}
  detector: {sigma: 0.5, center: 0}
  lambda: 1
  duration: )" + std::to_string(duration) + "\n" + extra;
}

std::string error_of(const std::string& text) {
  try {
    parse_config(text);
  } catch (const ValidationError& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST(Config, minimal_propagate_is_valid) {
  const auto cfg = parse_config(kPropagate);
  EXPECT_EQ(cfg.kind, ExperimentKind::kPropagate);
  EXPECT_EQ(cfg.seed, 5u);
  EXPECT_EQ(cfg.plan.steps, 100u);
  EXPECT_TRUE(std::holds_alternative<FreePotential>(cfg.potential));
  EXPECT_EQ(cfg.output, "out");
  EXPECT_TRUE(cfg.warnings.empty());
}

TEST(Config, unknown_key_is_named) {
  const std::string msg = error_of(measure_config("  lamda: 2\n"));
  EXPECT_NE(msg.find("measurement.lamda"), std::string::npos) << msg;
  EXPECT_NE(error_of(std::string(kPropagate) + "sed: 4\n").find("'sed'"), std::string::npos);
}

TEST(Config, separation_criterion_is_enforced) {
  // lambda * da * T = 0.4 < sigma = 0.5.
  const std::string msg = error_of(measure_config("", 0.4));
  EXPECT_NE(msg.find("separation criterion"), std::string::npos) << msg;
}

TEST(Config, marginal_separation_warns_for_single_measurements) {
  const auto cfg = parse_config(measure_config("", 3.0));
  ASSERT_EQ(cfg.warnings.size(), 1u);
  EXPECT_NE(cfg.warnings[0].find("overlap"), std::string::npos);
}

TEST(Config, sequences_need_disjoint_packets) {
  const std::string seq = "sequence: {cycles: 100}\n";
  EXPECT_NE(error_of(measure_config(seq, 3.0, "sequence")).find("separation"), std::string::npos);
  EXPECT_NO_THROW(parse_config(measure_config(seq, 5.0, "sequence")));
  EXPECT_NE(error_of(measure_config("sequence: {cycles: 99}\n", 5.0, "sequence")).find("cycles"),
            std::string::npos);
}

TEST(Config, parse_errors_carry_the_line) {
  const std::string msg = error_of("kind: propagate\ngrid:\n  x: [1, 2\n");
  EXPECT_NE(msg.find("line"), std::string::npos) << msg;
}

TEST(Config, type_errors_name_the_key) {
  std::string text = kPropagate;
  text.replace(text.find("n: 512"), 6, "n: many");
  EXPECT_NE(error_of(text).find("grid.x.n"), std::string::npos);
}

TEST(Config, stability_and_padding) {
  std::string unstable = kPropagate;
  unstable.replace(unstable.find("dt: 0.001"), 9, "dt: 0.01");
  EXPECT_NE(error_of(unstable).find("stab"), std::string::npos) << error_of(unstable);
  std::string edge = kPropagate;
  edge.replace(edge.find("center: 0"), 9, "center: 15");
  EXPECT_NE(error_of(edge).find("padding"), std::string::npos);
}

TEST(Config, exclusive_variants) {
  std::string both = kPropagate;
  both.replace(both.find("  gaussian"), 0, "  piecewise: {intervals: [{lo: 0, hi: 1}]}\n");
  EXPECT_NE(error_of(both).find("both"), std::string::npos);
}

TEST(Config, equilibrium_needs_enough_members) {
  const std::string text = std::string(kPropagate).replace(0, 16, "\nkind: equilibrium") +
                           "equilibrium: {members: 500, time: 1}\n";
  EXPECT_NE(error_of(text).find("members"), std::string::npos) << error_of(text);
}

TEST(Config, hash_ignores_layout_but_not_content) {
  const auto a = parse_config(kPropagate);
  const auto b = parse_config(R"(
plan: {steps: 100, dt: 1.0e-3}
state: {gaussian: {sigma: 1.0, center: 0.0}}
grid: {x: {n: 512, max: 20.0, min: -20}}
seed: 5
kind: propagate
)");
  EXPECT_EQ(a.hash, b.hash);
  EXPECT_EQ(a.canonical, b.canonical);
  const auto c = parse_config(kPropagate, 6);
  EXPECT_NE(a.hash, c.hash);
  EXPECT_EQ(c.seed, 6u);
  EXPECT_EQ(hash_hex(a.hash).size(), 16u);
}

TEST(Config, fnv1a_reference_values) {
  EXPECT_EQ(fnv1a64(""), 0xcbf29ce484222325ULL);
  EXPECT_EQ(fnv1a64("a"), 0xaf63dc4c8601ec8cULL);
  EXPECT_EQ(fnv1a64("foobar"), 0x85944171f73967e8ULL);
}

TEST(Config, missing_file_is_an_io_error) {
  EXPECT_THROW(load_config("/nonexistent/pilotwave.yaml"), IoError);
}

TEST(Config, kind_names_round_trip) {
  for (const char* k : {"propagate", "trajectory", "measure", "sequence", "equilibrium", "lyapunov"}) {
    EXPECT_EQ(kind_name(*parse_kind(k)), k);
  }
  EXPECT_FALSE(parse_kind("validate").has_value());
}
