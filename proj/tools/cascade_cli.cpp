// Copyright 2026 The Cascade Transfer Authors
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


// Command-line front end: train, sweep, certify, oracle, describe.

#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "cascade/checkpoint.hpp"
#include "cascade/commands.hpp"
#include "cascade/config.hpp"
#include "cascade/errors.hpp"
#include "cascade/parallel.hpp"

namespace {

using namespace cascade;

struct Common {
  std::string config;
  std::string checkpoint;
  std::string out;
  std::optional<std::uint64_t> seed;
  int jobs = default_jobs();
};

void add_common(CLI::App* cmd, Common& c, bool needs_checkpoint) {
  cmd->add_option("--config", c.config, "Run configuration file")->required();
  if (needs_checkpoint)
    cmd->add_option("--checkpoint", c.checkpoint, "Policy checkpoint (default from config)");
  cmd->add_option("--out", c.out, "Output directory (overrides [io] out_dir)");
  cmd->add_option("--seed", c.seed, "Master seed (overrides config)");
  cmd->add_option("--jobs", c.jobs, "Worker threads")->check(CLI::PositiveNumber);
}

RunConfig resolve(const Common& c) {
  RunConfig cfg = load_config(c.config);
  if (c.seed) cfg.seed = *c.seed;
  if (!c.out.empty()) cfg.io.out_dir = c.out;
  if (!c.checkpoint.empty()) cfg.io.checkpoint = c.checkpoint;
  cfg.finalize();
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Safe transfer of reduced-order quadrotor policies"};
  app.require_subcommand(1);

  Common common;
  auto* train = app.add_subcommand("train", "Train a policy on the reduced-order model");
  add_common(train, common, false);

  auto* sweep = app.add_subcommand("sweep", "Deploy on the full plant over an inner-loop gain grid");
  add_common(sweep, common, true);
  std::optional<bool> deterministic;
  sweep->add_flag("--deterministic-policy,!--stochastic-policy", deterministic,
                  "Act with the policy mean (default on)");

  auto* certify = app.add_subcommand("certify", "Fit tracking constants and evaluate the safety bound");
  add_common(certify, common, true);

  OracleOptions oracle_opts;
  auto* oracle = app.add_subcommand("oracle", "Exhaustive finite-MDP check of the divergence bounds");
  oracle->add_option("--seed-begin", oracle_opts.seed_begin, "First instance seed");
  oracle->add_option("--seed-end", oracle_opts.seed_end, "Last instance seed (inclusive)");
  oracle->add_option("--states", oracle_opts.num_states)->check(CLI::PositiveNumber);
  oracle->add_option("--actions", oracle_opts.num_actions)->check(CLI::PositiveNumber);
  oracle->add_option("--horizon", oracle_opts.horizon)->check(CLI::PositiveNumber);
  oracle->add_flag("--mutant", oracle_opts.mutant,
                   "Reverse the divergence inequality (harness self-test; must fail)");

  std::string describe_ckpt, describe_cfg;
  auto* describe = app.add_subcommand("describe", "Print a checkpoint header or a resolved config");
  describe->add_option("--checkpoint", describe_ckpt, "Checkpoint to inspect");
  describe->add_option("--config", describe_cfg, "Config to resolve and echo");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (train->parsed()) return run_train(resolve(common), common.jobs, std::cerr);
    if (sweep->parsed()) {
      RunConfig cfg = resolve(common);
      if (deterministic) cfg.sweep.deterministic_policy = *deterministic;
      return run_sweep(cfg, common.jobs, std::cerr);
    }
    if (certify->parsed()) return run_certify(resolve(common), common.jobs, std::cerr);
    if (oracle->parsed()) return run_oracle(oracle_opts, std::cout);
    if (describe->parsed()) {
      if (describe_ckpt.empty() == describe_cfg.empty()) {
        std::cerr << "describe: give exactly one of --checkpoint or --config\n";
        return kExitUsage;
      }
      if (!describe_ckpt.empty()) {
        print_checkpoint_header(std::cout, describe_checkpoint(describe_ckpt));
      } else {
        write_config(std::cout, load_config(describe_cfg));
      }
      return kExitOk;
    }
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const DegenerateKernelError& e) {
    std::cerr << "refused: " << e.what() << "\n";
    return kExitUsage;
  } catch (const FormatError& e) {
    std::cerr << "bad checkpoint: " << e.what() << "\n";
    return kExitUsage;
  } catch (const DomainError& e) {
    std::cerr << "invalid input: " << e.what() << "\n";
    return kExitUsage;
  } catch (const IoError& e) {
    std::cerr << "i/o error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitFailure;
  }
  return kExitUsage;
}
