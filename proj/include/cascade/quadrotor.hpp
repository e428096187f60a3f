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

#ifndef CASCADE_QUADROTOR_HPP_
#define CASCADE_QUADROTOR_HPP_

#include <cstddef>
#include <cstdint>

#include "cascade/core.hpp"
#include "cascade/rng.hpp"

namespace cascade {

struct QuadParams {
  double mass = 1.0;          // kg
  double gravity = 9.81;      // m/s^2
  double inertia = 0.02;      // kg m^2, pitch axis
  double dt = 0.05;           // s
  double noise_sigma = 0.0;   // m/s^2, additive on each translational channel

  double hover_thrust() const { return mass * gravity; }
  // Throws DomainError if any invariant is violated.
  void validate() const;
};

// One semi-implicit Euler step of the planar quadrotor. Accelerations use
// the pre-step attitude; velocities are updated first and positions use the
// updated velocities. With noise_sigma > 0 two standard normals are drawn
// from `rng` (x channel first, then z).
FullState full_step(const FullState& s, double thrust, double moment,
                    const QuadParams& params, Rng* rng);

// Reduced-order step: the attitude is replaced by the commanded reference,
// and thrust is F_hover + delta_thrust. Same draw order as full_step.
OuterState reduced_step(const OuterState& s, const PolicyAction& a,
                        const QuadParams& params, Rng* rng);

class QuadrotorPlant final : public FullOrderModel {
 public:
  explicit QuadrotorPlant(QuadParams params) : params_(params) { params_.validate(); }
  FullState step(const FullState& s, double thrust, const InnerInput& u,
                 Rng* rng) const override {
    return full_step(s, thrust, u.moment, params_, rng);
  }
  const QuadParams& params() const { return params_; }

 private:
  QuadParams params_;
};

class QuadrotorReducedModel final : public ReducedOrderModel {
 public:
  explicit QuadrotorReducedModel(QuadParams params) : params_(params) {
    params_.validate();
  }
  OuterState step(const OuterState& s, const PolicyAction& a, Rng* rng) const override {
    return reduced_step(s, a, params_, rng);
  }
  const QuadParams& params() const { return params_; }

 private:
  QuadParams params_;
};

// Outer-state matching between the two models: for random (s, x, a), the
// full plant with theta = x and thrust F_hover + dF must reproduce the
// reduced-model outer transition when theta_ref = x. With noise the two
// models share the same draws.
PropertyReport check_outer_matching(const QuadParams& params, std::size_t samples,
                                    std::uint64_t seed, double tolerance = 1e-12);

}  // namespace cascade

#endif  // CASCADE_QUADROTOR_HPP_
