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


#ifndef CASCADE_COMMANDS_HPP_
#define CASCADE_COMMANDS_HPP_

#include <cstdint>
#include <ostream>

#include "cascade/config.hpp"

namespace cascade {

enum ExitCode : int { kExitOk = 0, kExitFailure = 1, kExitUsage = 2 };

// Each command writes its artifacts plus "<command>.resolved.ini" into
// cfg.io.out_dir and returns an exit code. Configuration, I/O and checkpoint
// format problems propagate as exceptions.
int run_train(const RunConfig& cfg, int jobs, std::ostream& log);
int run_sweep(const RunConfig& cfg, int jobs, std::ostream& log);
int run_certify(const RunConfig& cfg, int jobs, std::ostream& log);

struct OracleOptions {
  std::uint64_t seed_begin = 0;
  std::uint64_t seed_end = 19;  // inclusive
  int num_states = 3;
  int num_actions = 2;
  int horizon = 4;
  double tolerance = 1e-12;
  bool mutant = false;
};

// Random pairs for every seed in range, plus identical-kernel and two-state
// cases. Returns kExitFailure if any inequality fails.
int run_oracle(const OracleOptions& opts, std::ostream& out);

}  // namespace cascade

#endif  // CASCADE_COMMANDS_HPP_
