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

#ifndef CASCADE_POLICY_HPP_
#define CASCADE_POLICY_HPP_

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "cascade/core.hpp"
#include "cascade/rng.hpp"

namespace cascade {

// Fully connected network with tanh hidden layers and a linear output layer.
// Inputs and outputs are column-batched: X is (in x B).
struct Mlp {
  std::vector<Eigen::MatrixXd> weights;
  std::vector<Eigen::VectorXd> biases;

  struct Cache {
    std::vector<Eigen::MatrixXd> activations;  // input, then each hidden layer
  };

  static Mlp zeros(const std::vector<int>& dims);
  int input_dim() const { return static_cast<int>(weights.front().cols()); }
  int output_dim() const { return static_cast<int>(weights.back().rows()); }
  std::vector<int> dims() const;
  Eigen::Index size() const;

  Eigen::MatrixXd forward(const Eigen::MatrixXd& x, Cache* cache = nullptr) const;
  // Back-propagates dL/dY through the cached forward pass into `grad`
  // (same shapes as *this, overwritten).
  void backward(const Cache& cache, const Eigen::MatrixXd& dy, Mlp* grad) const;

  Eigen::VectorXd flatten() const;
  void unflatten(const Eigen::VectorXd& flat);
};

inline constexpr int kObsDim = 4;
inline constexpr int kActDim = 2;

struct SampledAction {
  Eigen::Vector2d raw;     // pre-clip Gaussian sample (normalized units)
  PolicyAction action;     // scaled and clipped to the action box
  double log_prob = 0.0;   // log density of `raw`
};

// Diagonal Gaussian actor over normalized pre-clip actions with a
// state-independent learned log-std, plus a value critic on the same input
// transform. Actions are raw * action_scale, clipped to +-action_scale.
struct PolicyParameters {
  Mlp actor;
  Eigen::VectorXd log_std;
  Mlp critic;
  Eigen::VectorXd obs_offset;    // observation = (s - offset) .* scale
  Eigen::VectorXd obs_scale;
  Eigen::VectorXd action_scale;  // (delta_thrust_max, theta_ref_max)
  double value_scale = 1.0;      // critic output is V / value_scale

  static constexpr double kLogStdMin = -5.0;
  static constexpr double kLogStdMax = 1.0;

  // Orthogonal init (gain sqrt(2)) for hidden layers, 0.01 on the actor
  // output layer, 1.0 on the critic output layer, zero biases.
  static PolicyParameters initialize(const std::vector<int>& hidden,
                                     const ActionBounds& bounds,
                                     const Eigen::Vector4d& obs_offset,
                                     const Eigen::Vector4d& obs_scale,
                                     double value_scale, double log_std_init,
                                     std::uint64_t seed);

  Eigen::Vector4d observe(const OuterState& s) const;
  Eigen::MatrixXd observe_batch(const std::vector<OuterState>& states) const;

  Eigen::Vector2d mean(const OuterState& s) const;
  double value(const OuterState& s) const;
  // Deterministic mode returns the mean; log_prob is still evaluated.
  SampledAction act(const OuterState& s, bool deterministic, Rng* rng) const;
  PolicyAction scale_action(const Eigen::Vector2d& raw) const;
  double log_prob(const Eigen::Vector2d& mean, const Eigen::Vector2d& raw) const;

  // Trainable groups as flat vectors: actor weights then log-std; critic.
  Eigen::VectorXd actor_flat() const;
  void set_actor_flat(const Eigen::VectorXd& flat);
  Eigen::VectorXd critic_flat() const { return critic.flatten(); }
  void set_critic_flat(const Eigen::VectorXd& flat) { critic.unflatten(flat); }

  void clamp_log_std();
  bool finite() const;
  double mean_std() const;
};

}  // namespace cascade

#endif  // CASCADE_POLICY_HPP_
