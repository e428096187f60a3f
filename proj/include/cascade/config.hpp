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


#ifndef CASCADE_CONFIG_HPP_
#define CASCADE_CONFIG_HPP_

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "cascade/cmdp.hpp"
#include "cascade/inner_loop.hpp"

namespace cascade {

struct SweepConfig {
  double omega_n_min = 2.0;
  double omega_n_max = 12.0;
  double omega_n_step = 1.0;
  double zeta_min = 0.2;
  double zeta_max = 1.0;
  double zeta_step = 0.1;
  int episodes = 100;
  bool deterministic_policy = true;
  InnerLoopConfig inner;

  std::vector<double> omega_grid() const;
  std::vector<double> zeta_grid() const;
};

struct CertifyConfig {
  double omega_n = 12.0;
  double zeta = 1.0;
  double noise_sigma = 0.05;  // plant noise used only for certification
  double delta = 0.025;
  int fit_episodes = 200;
  int eval_episodes = 500;
  double alpha_grid_step = 1e-3;
  double rate_weight = 0.0;  // > 0 adds |theta_dot| to the tracking norm
};

struct IoConfig {
  std::string out_dir = "out";
  std::string checkpoint;  // empty: <out_dir>/policy.ckpt
};

// Whole-run configuration. Text form is INI-like:
//   seed = 0            (before any section)
//   [plant] [train] [sweep] [certify] [io]
//   key = value         one per line; '#' or ';' starts a comment line
// Unknown sections or keys, duplicates and malformed values are rejected.
struct RunConfig {
  std::uint64_t seed = 0;
  TrainConfig train;  // train.plant is the [plant] section
  SweepConfig sweep;
  CertifyConfig certify;
  IoConfig io;

  // Applies the master seed to every component and validates.
  void finalize();
  std::uint64_t sweep_seed() const;
  std::uint64_t certify_seed() const;
  std::filesystem::path checkpoint_path() const;
};

// Throws ConfigError (with line number) on any problem.
RunConfig parse_config(std::istream& in);
RunConfig parse_config_string(const std::string& text);
// Throws ConfigError naming the path if it cannot be opened.
RunConfig load_config(const std::filesystem::path& path);

// Canonical text form; parse_config(write_config(c)) reproduces c exactly.
void write_config(std::ostream& os, const RunConfig& cfg);
std::string config_to_string(const RunConfig& cfg);

}  // namespace cascade

#endif  // CASCADE_CONFIG_HPP_
