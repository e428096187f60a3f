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

#ifndef CASCADE_CORE_HPP_
#define CASCADE_CORE_HPP_

#include <cstddef>
#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "cascade/rng.hpp"

namespace cascade {

// Translational (outer) state of the planar quadrotor.
struct OuterState {
  double p_x = 0.0;
  double v_x = 0.0;
  double p_z = 0.0;
  double v_z = 0.0;

  bool finite() const;
  friend bool operator==(const OuterState&, const OuterState&) = default;
};

// Attitude (inner) state.
struct InnerState {
  double theta = 0.0;
  double theta_dot = 0.0;

  bool finite() const;
  friend bool operator==(const InnerState&, const InnerState&) = default;
};

struct FullState {
  OuterState outer;
  InnerState inner;

  bool finite() const { return outer.finite() && inner.finite(); }
  friend bool operator==(const FullState&, const FullState&) = default;
};

// Outer input plus inner-state reference chosen by the policy.
struct PolicyAction {
  double delta_thrust = 0.0;  // N, about hover
  double theta_ref = 0.0;     // rad
};

struct ActionBounds {
  double delta_thrust_max = 5.0;
  double theta_ref_max = 0.5;

  // Projection of an action onto the admissible box.
  PolicyAction clip(const PolicyAction& a) const;
  bool contains(const PolicyAction& a) const;
};

struct InnerInput {
  double moment = 0.0;  // N m
};

// Half-space {p_x <= boundary}; the boundary itself is safe.
struct SafeSetSpec {
  double boundary = 9.0;

  bool contains(const OuterState& s) const { return s.p_x <= boundary; }
};

// Throws InvalidStateError on non-finite input.
bool is_safe(const OuterState& s, const SafeSetSpec& spec);
int safety_cost(const OuterState& s, const SafeSetSpec& spec);

struct TrajectoryStep {
  OuterState outer;
  std::optional<InnerState> inner;  // absent for reduced-order rollouts
  PolicyAction action;
  double reward = 0.0;
  int cost = 0;
};

// T transitions: steps[t] holds s_t, a_t, r_t, c_t for t < T, and
// final_outer / final_inner hold s_T.
struct Trajectory {
  std::vector<TrajectoryStep> steps;
  OuterState final_outer;
  std::optional<InnerState> final_inner;
  std::uint64_t seed = 0;

  std::size_t horizon() const { return steps.size(); }
  bool has_inner() const;
  // Throws InvalidTrajectoryError when the record is inconsistent.
  void validate() const;
};

// True iff any stored step cost is 1. Throws on an empty trajectory.
bool episode_is_unsafe(const Trajectory& traj);

// CSV export with header t,p_x,v_x,p_z,v_z,theta,theta_dot,dF,theta_ref,reward,cost.
// Row T carries the final state with empty action/reward/cost fields.
void write_trajectory_csv(std::ostream& os, const Trajectory& traj);

// Full-order plant: inner input drives the inner state, which drives the
// outer state through the force direction.
class FullOrderModel {
 public:
  virtual ~FullOrderModel() = default;
  virtual FullState step(const FullState& s, double thrust, const InnerInput& u,
                         Rng* rng) const = 0;
};

// Reduced-order model: the inner state is replaced by the commanded reference.
class ReducedOrderModel {
 public:
  virtual ~ReducedOrderModel() = default;
  virtual OuterState step(const OuterState& s, const PolicyAction& a,
                          Rng* rng) const = 0;
};

// Full-order plant in feedback with an inner tracking controller. Holds the
// controller's internal state for one episode; not shared across episodes.
class ClosedLoopModel {
 public:
  struct StepResult {
    FullState state;
    bool saturated = false;
  };
  virtual ~ClosedLoopModel() = default;
  virtual void reset() = 0;
  virtual StepResult step(const FullState& s, const PolicyAction& a, Rng* rng) = 0;
};

struct PropertyViolation {
  std::size_t sample = 0;
  double deviation = 0.0;
};

struct PropertyReport {
  std::size_t samples = 0;
  double max_deviation = 0.0;
  std::vector<PropertyViolation> violations;

  bool ok() const { return violations.empty(); }
};

// Checks that the inner-state transition is independent of the outer
// state and outer input: for each sampled (x, u), the plant is stepped from
// two unrelated outer states with identical RNG streams and the inner next
// states are compared. Any deviation above `tolerance` is a violation.
PropertyReport check_cascade_property(const FullOrderModel& plant,
                                      std::size_t samples, std::uint64_t seed,
                                      double tolerance = 0.0);

}  // namespace cascade

#endif  // CASCADE_CORE_HPP_
