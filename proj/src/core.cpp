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

#include "cascade/core.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>

#include "cascade/errors.hpp"

namespace cascade {

bool OuterState::finite() const {
  return std::isfinite(p_x) && std::isfinite(v_x) && std::isfinite(p_z) &&
         std::isfinite(v_z);
}

bool InnerState::finite() const {
  return std::isfinite(theta) && std::isfinite(theta_dot);
}

PolicyAction ActionBounds::clip(const PolicyAction& a) const {
  return {std::clamp(a.delta_thrust, -delta_thrust_max, delta_thrust_max),
          std::clamp(a.theta_ref, -theta_ref_max, theta_ref_max)};
}

bool ActionBounds::contains(const PolicyAction& a) const {
  return std::abs(a.delta_thrust) <= delta_thrust_max &&
         std::abs(a.theta_ref) <= theta_ref_max;
}

bool is_safe(const OuterState& s, const SafeSetSpec& spec) {
  if (!s.finite()) throw InvalidStateError("is_safe: non-finite outer state");
  return spec.contains(s);
}

int safety_cost(const OuterState& s, const SafeSetSpec& spec) {
  return is_safe(s, spec) ? 0 : 1;
}

bool Trajectory::has_inner() const {
  return !steps.empty() &&
         std::all_of(steps.begin(), steps.end(),
                     [](const TrajectoryStep& st) { return st.inner.has_value(); }) &&
         final_inner.has_value();
}

void Trajectory::validate() const {
  if (steps.empty()) throw InvalidTrajectoryError("trajectory has no transitions");
  const bool inner = steps.front().inner.has_value();
  for (const auto& st : steps) {
    if (st.cost != 0 && st.cost != 1)
      throw InvalidTrajectoryError("step cost outside {0,1}");
    if (st.inner.has_value() != inner)
      throw InvalidTrajectoryError("inner state present on some steps only");
  }
  if (final_inner.has_value() != inner)
    throw InvalidTrajectoryError("final inner state inconsistent with steps");
}

bool episode_is_unsafe(const Trajectory& traj) {
  if (traj.steps.empty())
    throw InvalidTrajectoryError("episode_is_unsafe: empty trajectory");
  return std::any_of(traj.steps.begin(), traj.steps.end(),
                     [](const TrajectoryStep& st) { return st.cost == 1; });
}

namespace {

void put_inner(std::ostream& os, const std::optional<InnerState>& x) {
  if (x) {
    os << x->theta << ',' << x->theta_dot;
  } else {
    os << ',';
  }
}

}  // namespace

void write_trajectory_csv(std::ostream& os, const Trajectory& traj) {
  const auto flags = os.flags();
  const auto prec = os.precision();
  os << std::setprecision(17);
  os << "t,p_x,v_x,p_z,v_z,theta,theta_dot,dF,theta_ref,reward,cost\n";
  for (std::size_t t = 0; t < traj.steps.size(); ++t) {
    const auto& st = traj.steps[t];
    os << t << ',' << st.outer.p_x << ',' << st.outer.v_x << ',' << st.outer.p_z
       << ',' << st.outer.v_z << ',';
    put_inner(os, st.inner);
    os << ',' << st.action.delta_thrust << ',' << st.action.theta_ref << ','
       << st.reward << ',' << st.cost << '\n';
  }
  const auto& s = traj.final_outer;
  os << traj.steps.size() << ',' << s.p_x << ',' << s.v_x << ',' << s.p_z << ','
     << s.v_z << ',';
  put_inner(os, traj.final_inner);
  os << ",,,,\n";
  os.flags(flags);
  os.precision(prec);
}

PropertyReport check_cascade_property(const FullOrderModel& plant,
                                      std::size_t samples, std::uint64_t seed,
                                      double tolerance) {
  PropertyReport report;
  report.samples = samples;
  Rng sampler(seed, "cascade_property");
  auto random_outer = [&] {
    return OuterState{sampler.uniform(-20, 20), sampler.uniform(-5, 5),
                      sampler.uniform(-20, 20), sampler.uniform(-5, 5)};
  };
  for (std::size_t i = 0; i < samples; ++i) {
    const InnerState x{sampler.uniform(-1, 1), sampler.uniform(-3, 3)};
    const InnerInput u{sampler.uniform(-10, 10)};
    const FullState a{random_outer(), x};
    const FullState b{random_outer(), x};
    const double thrust_a = sampler.uniform(0, 15);
    const double thrust_b = sampler.uniform(0, 15);
    const std::uint64_t step_seed = derive_seed(seed, "cascade_property_step", i);
    Rng rng_a(step_seed);
    Rng rng_b(step_seed);
    const FullState na = plant.step(a, thrust_a, u, &rng_a);
    const FullState nb = plant.step(b, thrust_b, u, &rng_b);
    const double dev = std::max(std::abs(na.inner.theta - nb.inner.theta),
                                std::abs(na.inner.theta_dot - nb.inner.theta_dot));
    report.max_deviation = std::max(report.max_deviation, dev);
    if (!(dev <= tolerance)) report.violations.push_back({i, dev});
  }
  return report;
}

}  // namespace cascade
