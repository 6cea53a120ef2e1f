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

// pilotwave: run one configured experiment and write its data files.

#include <cstdint>
#include <exception>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "pilotwave/config.hpp"
#include "pilotwave/error.hpp"
#include "pilotwave/harness.hpp"

namespace {

enum ExitCode { kOk = 0, kValidation = 1, kPhysics = 2, kIo = 3 };

struct Args {
  std::string config;
  std::string out;
  unsigned workers = 1;
  std::optional<std::uint64_t> seed;
};

void add_common(CLI::App* cmd, Args& args, bool run_flags) {
  cmd->add_option("--config", args.config, "YAML experiment description")->required();
  cmd->add_option("--seed", args.seed, "64-bit seed (overrides the config)");
  if (run_flags) {
    cmd->add_option("--out", args.out, "output directory (default: config 'output')");
    cmd->add_option("--workers", args.workers, "worker threads")->check(CLI::PositiveNumber);
  }
}

int run(const std::string& sub, const Args& args) {
  auto cfg = pilotwave::load_config(args.config, args.seed);
  for (const auto& w : cfg.warnings) std::cerr << "warning: " << w << "\n";
  if (sub == "validate") {
    std::cout << "valid " << pilotwave::kind_name(cfg.kind) << " config, hash "
              << pilotwave::hash_hex(cfg.hash) << "\n";
    return kOk;
  }
  if (pilotwave::kind_name(cfg.kind) != sub) {
    throw pilotwave::ValidationError("config kind '" + std::string(pilotwave::kind_name(cfg.kind)) +
                                     "' does not match subcommand '" + sub + "'");
  }
  auto result = pilotwave::run_experiment(cfg, {args.workers});
  const std::string dir = args.out.empty() ? cfg.output : args.out;
  pilotwave::write_outputs(result.report, result.artifacts, dir);
  for (const auto& c : result.report.checks) {
    std::cout << (c.pass ? "PASS " : "FAIL ") << c.name << " = " << pilotwave::format_number(c.value)
              << " (" << c.bound << ")\n";
  }
  for (const auto& f : result.report.files) std::cout << "wrote " << dir << "/" << f << "\n";
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Deterministic pilot-wave simulator"};
  app.require_subcommand(1);
  Args args;
  for (const char* name :
       {"propagate", "trajectory", "measure", "sequence", "equilibrium", "lyapunov"}) {
    add_common(app.add_subcommand(name, std::string("run the ") + name + " experiment"), args, true);
  }
  add_common(app.add_subcommand("validate", "check a config without running it"), args, false);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kValidation;
  }

  const std::string sub = app.get_subcommands().front()->get_name();
  try {
    return run(sub, args);
  } catch (const pilotwave::ValidationError& e) {
    std::cerr << "validation error: " << e.what() << "\n";
    return kValidation;
  } catch (const pilotwave::PhysicsError& e) {
    std::cerr << "physics error: " << e.what() << "\n";
    return kPhysics;
  } catch (const pilotwave::IoError& e) {
    std::cerr << "I/O error: " << e.what() << "\n";
    return kIo;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kPhysics;
  }
}
