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

#ifndef CASCADE_CMDP_HPP_
#define CASCADE_CMDP_HPP_

#include <cstdint>
#include <functional>
#include <ostream>
#include <vector>

#include <Eigen/Dense>

#include "cascade/core.hpp"
#include "cascade/policy.hpp"
#include "cascade/quadrotor.hpp"
#include "cascade/sampler.hpp"

namespace cascade {

// Goal-distance reward with a bonus inside an open ball around the goal.
struct RewardSpec {
  double goal_x = 9.0;
  double goal_z = 9.0;
  double distance_scale = 100.0;
  double bonus = 10.0;
  double bonus_radius = 0.1;
};

double reward(const OuterState& s, const RewardSpec& spec = {});
double penalized_reward(double r, int cost, double lambda);

struct TrainConfig {
  double delta = 0.025;
  double gamma = 0.994;
  double lambda0 = 1.0;
  double eta_lambda = 0.02;
  double learning_rate = 4e-4;
  double clip_range = 0.05;
  double gae_lambda = 0.95;
  int horizon = 300;
  int iterations = 150;
  int episodes_per_iteration = 32;
  int epochs_per_iteration = 10;
  int minibatch_size = 1024;
  std::uint64_t seed = 0;

  std::vector<int> hidden{64, 64};
  double log_std_init = -0.5;
  double value_scale = 100.0;
  double max_grad_norm = 0.5;
  // Observation = (s - (goal_x, 0, goal_z, 0)) .* scale.
  double obs_position_scale = 0.1;
  double obs_velocity_scale = 0.1;

  RewardSpec reward;
  SafeSetSpec safe_set;
  ActionBounds bounds;
  QuadParams plant;
  InitialStateSampler sampler;

  // Throws DomainError on invalid settings.
  void validate() const;
};

// (1/T) sum_{t<T} gamma^t c_t. Throws if the trajectory length differs from T.
double episode_discounted_cost(const Trajectory& traj, double gamma, int horizon);

struct DualState {
  double lambda = 0.0;
};

// lambda <- max(0, lambda + eta (mean_cost - delta)).
DualState dual_update(const DualState& d, double mean_cost, const TrainConfig& cfg);

// Generalized advantage estimates for one truncated episode. `values` has
// one more entry than `rewards` (bootstrap value of the final state).
Eigen::VectorXd gae_advantages(const Eigen::VectorXd& rewards, const Eigen::VectorXd& values,
                               double gamma, double lambda);

// On-policy batch. Column k of obs/raw_actions is transition k; episodes are
// laid out back to back in episode order.
struct RolloutBatch {
  std::vector<Trajectory> episodes;
  Eigen::MatrixXd obs;
  Eigen::MatrixXd raw_actions;
  Eigen::VectorXd log_prob;
  Eigen::VectorXd values;
  Eigen::VectorXd advantages;  // normalized to zero mean, unit variance
  Eigen::VectorXd returns;     // unnormalized value targets
  std::vector<double> discounted_costs;
  std::vector<double> episode_returns;  // undiscounted task reward

  Eigen::Index size() const { return obs.cols(); }
  double mean_discounted_cost() const;
  double mean_return() const;
  double mean_undiscounted_cost() const;
};

// Rolls episodes on the reduced model from the shared initial-state sampler.
// Episode e of iteration k draws from stream ("rollout", k, e) of cfg.seed,
// so the batch is identical for any job count.
RolloutBatch collect_rollouts(const PolicyParameters& policy, const TrainConfig& cfg,
                              double lambda, std::uint64_t iteration, int jobs = 1,
                              bool deterministic = false);

struct SurrogateResult {
  double objective = 0.0;   // mean clipped surrogate (to be maximized)
  Eigen::VectorXd grad;     // d objective / d actor_flat
  double clip_fraction = 0.0;
};

SurrogateResult clipped_surrogate(const PolicyParameters& policy, const Eigen::MatrixXd& obs,
                                  const Eigen::MatrixXd& raw_actions,
                                  const Eigen::VectorXd& old_log_prob,
                                  const Eigen::VectorXd& advantages, double clip_range,
                                  bool with_grad = true);

struct CriticResult {
  double loss = 0.0;        // 0.5 mean (critic(s) - R / value_scale)^2
  Eigen::VectorXd grad;     // d loss / d critic_flat
};

CriticResult critic_loss(const PolicyParameters& policy, const Eigen::MatrixXd& obs,
                         const Eigen::VectorXd& returns, bool with_grad = true);

class Adam {
 public:
  Adam(Eigen::Index n, double lr, double beta1 = 0.9, double beta2 = 0.999, double eps = 1e-8);
  // Descent step on `params` along `grad`.
  void step(Eigen::VectorXd& params, const Eigen::VectorXd& grad);

 private:
  double lr_, beta1_, beta2_, eps_;
  Eigen::VectorXd m_, v_;
  long t_ = 0;
};

struct PpoStats {
  std::vector<double> surrogate_per_epoch;  // full-batch objective before epoch 0 and after each epoch
  double value_loss = 0.0;
  double clip_fraction = 0.0;
};

// Keeps Adam moments across iterations.
class PpoOptimizer {
 public:
  PpoOptimizer(const PolicyParameters& policy, const TrainConfig& cfg);
  PpoStats update(PolicyParameters& policy, const RolloutBatch& batch, std::uint64_t iteration);

 private:
  TrainConfig cfg_;
  Adam actor_;
  Adam critic_;
};

// Single update with fresh optimizer state.
PolicyParameters ppo_update(const PolicyParameters& policy, const RolloutBatch& batch,
                            const TrainConfig& cfg, PpoStats* stats = nullptr);

struct TrainLogEntry {
  int iter = 0;
  double mean_return = 0.0;
  double mean_cost = 0.0;               // normalized discounted
  double mean_undiscounted_cost = 0.0;  // mean sum_t c_t per episode
  double lambda = 0.0;                  // after the dual step
  double policy_std = 0.0;
};

struct TrainResult {
  PolicyParameters policy;
  std::vector<TrainLogEntry> log;
};

PolicyParameters initial_policy(const TrainConfig& cfg);

// Alternates collect_rollouts / ppo_update / dual_update. `on_iteration`
// sees each log entry and the policy after that iteration's update.
TrainResult train(const TrainConfig& cfg, int jobs = 1,
                  const std::function<void(const TrainLogEntry&, const PolicyParameters&)>& on_iteration = {});

// CSV: iter,mean_return,mean_cost,lambda,policy_std
void write_train_log_csv(std::ostream& os, const std::vector<TrainLogEntry>& log);

struct ReducedEvaluation {
  int episodes = 0;
  double goal_reach_fraction = 0.0;  // final distance to goal < radius
  double failure_fraction = 0.0;
  double mean_discounted_cost = 0.0;
};

ReducedEvaluation evaluate_reduced(const PolicyParameters& policy, const TrainConfig& cfg,
                                   int episodes, std::uint64_t seed, bool deterministic,
                                   double reach_radius = 0.5, int jobs = 1);

}  // namespace cascade

#endif  // CASCADE_CMDP_HPP_
