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

#ifndef CASCADE_TRANSFER_HPP_
#define CASCADE_TRANSFER_HPP_

#include <cstdint>
#include <filesystem>
#include <ostream>
#include <string>
#include <vector>

#include "cascade/cmdp.hpp"
#include "cascade/core.hpp"
#include "cascade/inner_loop.hpp"
#include "cascade/policy.hpp"
#include "cascade/quadrotor.hpp"
#include "cascade/sampler.hpp"

namespace cascade {

struct DeployConfig {
  int horizon = 300;
  bool deterministic = true;  // act with the policy mean
  RewardSpec reward;
  SafeSetSpec safe_set;
  QuadParams plant;
  InnerLoopConfig inner;
};

DeployConfig deploy_config_from(const TrainConfig& cfg);

struct DeployedEpisode {
  Trajectory traj;
  int saturated_steps = 0;
  bool valid = true;  // false when the plant raised a numerical error
};

// Rolls the full-order closed loop for cfg.horizon steps from `initial`.
// `rng` supplies exploration draws (stochastic mode) and plant noise.
DeployedEpisode deploy_episode(const PolicyParameters& policy, const GainSpec& gains,
                               const FullState& initial, const DeployConfig& cfg, Rng& rng);

// Fraction of trajectories with at least one unit cost. Throws on an empty set.
double failure_probability(const std::vector<Trajectory>& trajs);

// Per-episode time average of |theta_t - theta_ref_t|.
double episode_tracking_error(const Trajectory& traj);
double episode_max_tracking_error(const Trajectory& traj);
// sum_{t>=1} |theta_ref_t - theta_ref_{t-1}|.
double episode_reference_variation(const Trajectory& traj);

// Mean over episodes of episode_tracking_error. Throws InvalidTrajectoryError
// for reduced-order trajectories (no inner state) or an empty set.
double mean_tracking_error(const std::vector<Trajectory>& trajs);

struct EpisodeSummary {
  bool valid = true;
  bool unsafe = false;
  double mean_err = 0.0;
  double max_err = 0.0;
  double ref_var = 0.0;
  int saturated_steps = 0;
};

struct GainCell {
  double omega_n = 0.0;
  double zeta = 0.0;
  double p_fail = 0.0;
  double mean_err = 0.0;
  double mean_ref_var = 0.0;
  double sat_freq = 0.0;
  int n_episodes = 0;  // valid episodes
  int n_invalid = 0;
  std::vector<EpisodeSummary> episodes;
};

struct SweepSettings {
  std::vector<double> omega_n;
  std::vector<double> zeta;
  int episodes = 100;
  std::uint64_t seed = 0;
  InitialStateSampler sampler;
};

struct TransferReport {
  std::vector<GainCell> cells;  // omega_n major, zeta minor
  std::uint64_t seed = 0;
  std::string checkpoint_id;
  std::vector<std::string> anomalies;

  const GainCell& at(double omega_n, double zeta) const;
};

// Every gain pair sees the same N initial states and the same per-episode
// RNG streams (common random numbers). Results are reduced in grid order.
TransferReport sweep(const PolicyParameters& policy, const SweepSettings& settings,
                     const DeployConfig& cfg, int jobs = 1);

// Recounts each cell's p_fail from its episode flags; throws on mismatch.
void verify_report(const TransferReport& report);

// Soft check: gains A dominate B in per-episode max tracking error on every
// shared episode, yet p_fail(A) > p_fail(B).
std::vector<std::string> find_dominance_anomalies(const TransferReport& report);

// omega_n,zeta,p_fail,mean_err,mean_ref_var,sat_freq,n_episodes
void write_sweep_csv(std::ostream& os, const TransferReport& report);
// omega_n,zeta,episode,valid,unsafe,mean_err,max_err,ref_var,saturated_steps
void write_episode_csv(std::ostream& os, const TransferReport& report);
// omega_n,zeta,value for one metric: p_fail, mean_err, mean_ref_var, sat_freq.
void write_heatmap_csv(std::ostream& os, const TransferReport& report,
                       const std::string& metric);

}  // namespace cascade

#endif  // CASCADE_TRANSFER_HPP_
