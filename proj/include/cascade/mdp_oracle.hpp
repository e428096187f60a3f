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


#ifndef CASCADE_MDP_ORACLE_HPP_
#define CASCADE_MDP_ORACLE_HPP_

#include <cstdint>
#include <ostream>
#include <string>
#include <vector>

namespace cascade {

// Row-stochastic kernel P[s][a][s'].
using Kernel = std::vector<std::vector<std::vector<double>>>;

struct FiniteMdpPair {
  int num_states = 0;
  int num_actions = 0;
  int horizon = 0;
  std::vector<double> initial;               // shared by both kernels
  std::vector<std::vector<double>> policy;   // pi[s][a]
  Kernel full;                               // P_K
  Kernel reduced;                            // P_R
  std::vector<bool> unsafe;                  // per state

  // Throws DomainError for malformed distributions or sizes, and when
  // exhaustive enumeration is out of reach (|S||A| > 64, T > 6, or more
  // than kMaxTrajectories paths).
  void validate() const;
  static constexpr double kMaxTrajectories = 1 << 26;
};

// Random kernels, policy and initial law; P_R is P_K mixed toward a second
// random kernel with a random weight in [0, 0.5]. The last state is unsafe.
FiniteMdpPair random_mdp_pair(std::uint64_t seed, int num_states = 3, int num_actions = 2,
                              int horizon = 4);
// Same as random_mdp_pair with P_R = P_K.
FiniteMdpPair identical_mdp_pair(std::uint64_t seed, int num_states = 3, int num_actions = 2,
                                 int horizon = 4);
// Two states, one action; P_R differs from P_K in one row by exactly `tv`.
FiniteMdpPair two_state_pair(double tv = 0.1, int horizon = 3);

double tv_distance(const std::vector<double>& p, const std::vector<double>& q);

struct OracleCheck {
  std::string name;
  double lhs = 0.0;
  double rhs = 0.0;
  bool ok = false;
};

struct OracleResult {
  std::uint64_t seed = 0;
  double joint_tv = 0.0;            // Delta P(T) over (s0, a0, ..., s_T)
  double max_step_tv = 0.0;         // Delta_t (time invariant here)
  double sum_step_tv = 0.0;         // sum_{t<T} Delta_t
  double sum_expected_step_tv = 0.0;
  double safe_full = 0.0;           // P_K(all states safe)
  double safe_reduced = 0.0;
  double unsafe_full = 0.0;         // P_K(any state unsafe)
  double expected_cost_full = 0.0;  // E_K[sum_t c(s_t)]
  double unsafe_reduced = 0.0;
  double expected_cost_reduced = 0.0;
  double terminal_marginal_tv = 0.0;
  std::vector<OracleCheck> checks;

  bool ok() const;
};

// Enumerates every trajectory and evaluates the inequalities at tolerance
// `tol`. With `mutant` set, the trajectory-divergence inequality is checked
// with its direction reversed; used to show the harness can fail.
OracleResult run_oracle(const FiniteMdpPair& pair, double tol = 1e-12, bool mutant = false);

void write_oracle_line(std::ostream& os, const OracleResult& r);

}  // namespace cascade

#endif  // CASCADE_MDP_ORACLE_HPP_
