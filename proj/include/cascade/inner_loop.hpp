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

#ifndef CASCADE_INNER_LOOP_HPP_
#define CASCADE_INNER_LOOP_HPP_

#include <optional>
#include <utility>
#include <vector>

#include "cascade/core.hpp"
#include "cascade/quadrotor.hpp"
#include "cascade/rng.hpp"

namespace cascade {

// PD gains parameterized by natural frequency and damping ratio:
// Kp = J wn^2, Kd = 2 J zeta wn.
class GainSpec {
 public:
  GainSpec(double omega_n, double zeta, double inertia);

  double omega_n() const { return omega_n_; }
  double zeta() const { return zeta_; }
  double inertia() const { return inertia_; }
  double kp() const { return inertia_ * omega_n_ * omega_n_; }
  double kd() const { return 2.0 * inertia_ * zeta_ * omega_n_; }

 private:
  double omega_n_;
  double zeta_;
  double inertia_;
};

// Throws DomainError for nonpositive arguments.
GainSpec gains_from(double omega_n, double zeta, double inertia);

struct InnerLoopConfig {
  double filter_time_constant = 0.1;  // s
  double moment_max = 10.0;           // N m
};

// Backward-difference reference-rate estimate followed by a first-order
// low-pass filter with pole alpha_f = exp(-dt / T_f).
struct FilterState {
  std::optional<double> prev_ref;  // unset until the first reference arrives
  double rate_est = 0.0;
  double alpha_f = 0.0;

  // Fresh filter: zero rate estimate; the first reference seeds prev_ref so
  // the first raw difference is zero.
  static FilterState initial(double dt, double time_constant);
};

// Returns the updated filter and the new rate estimate.
std::pair<FilterState, double> filter_update(const FilterState& fs, double theta_ref,
                                             double dt);

// M = -Kp (theta - theta_ref) - Kd (theta_dot - rate_est), saturated to
// [-moment_max, moment_max].
InnerInput pd_control(const InnerState& x, double theta_ref, double rate_est,
                      const GainSpec& gains, double moment_max);

struct ClosedLoopStep {
  FullState state;
  FilterState filter;
  double moment = 0.0;
  bool saturated = false;
};

// filter_update -> pd_control -> full_step with F = F_hover + delta_thrust.
// The action must already lie in the admissible box.
ClosedLoopStep closed_loop_step(const FullState& s, const PolicyAction& a,
                                const FilterState& fs, const GainSpec& gains,
                                const QuadParams& params, const InnerLoopConfig& cfg,
                                Rng* rng);

// Stateful wrapper holding one episode's filter.
class QuadrotorClosedLoop final : public ClosedLoopModel {
 public:
  QuadrotorClosedLoop(const GainSpec& gains, const QuadParams& params,
                      const InnerLoopConfig& cfg = {});

  void reset() override;
  StepResult step(const FullState& s, const PolicyAction& a, Rng* rng) override;
  const FilterState& filter() const { return filter_; }

 private:
  GainSpec gains_;
  QuadParams params_;
  InnerLoopConfig cfg_;
  FilterState filter_;
};

// Evenly spaced inclusive grid lo, lo+step, ..., hi (rounded to the step).
std::vector<double> linear_grid(double lo, double hi, double step);

}  // namespace cascade

#endif  // CASCADE_INNER_LOOP_HPP_
