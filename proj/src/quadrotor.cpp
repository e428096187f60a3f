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

#include "cascade/quadrotor.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "cascade/errors.hpp"

namespace cascade {

void QuadParams::validate() const {
  if (!(mass > 0.0)) throw DomainError("plant: mass must be positive");
  if (!(inertia > 0.0)) throw DomainError("plant: inertia must be positive");
  if (!(dt > 0.0)) throw DomainError("plant: dt must be positive");
  if (!(noise_sigma >= 0.0)) throw DomainError("plant: noise_sigma must be >= 0");
  if (!std::isfinite(gravity)) throw DomainError("plant: gravity must be finite");
}

namespace {

struct Accel {
  double x;
  double z;
};

Accel translational_accel(double thrust, double theta, const QuadParams& p,
                          Rng* rng) {
  Accel a{thrust / p.mass * std::sin(theta), thrust / p.mass * std::cos(theta) - p.gravity};
  if (p.noise_sigma > 0.0) {
    if (rng == nullptr) throw std::invalid_argument("noisy plant requires an RNG");
    a.x += p.noise_sigma * rng->normal();
    a.z += p.noise_sigma * rng->normal();
  }
  return a;
}

OuterState integrate_outer(const OuterState& s, const Accel& a, double dt) {
  OuterState n;
  n.v_x = s.v_x + a.x * dt;
  n.p_x = s.p_x + n.v_x * dt;
  n.v_z = s.v_z + a.z * dt;
  n.p_z = s.p_z + n.v_z * dt;
  return n;
}

}  // namespace

FullState full_step(const FullState& s, double thrust, double moment,
                    const QuadParams& params, Rng* rng) {
  if (!std::isfinite(thrust) || !std::isfinite(moment))
    throw InputError("full_step: non-finite input");
  if (thrust < 0.0) throw InputError("full_step: negative thrust");
  const Accel a = translational_accel(thrust, s.inner.theta, params, rng);
  FullState n;
  n.outer = integrate_outer(s.outer, a, params.dt);
  const double theta_ddot = moment / params.inertia;
  n.inner.theta_dot = s.inner.theta_dot + theta_ddot * params.dt;
  n.inner.theta = s.inner.theta + n.inner.theta_dot * params.dt;
  if (!n.finite()) throw NumericalError("full_step: non-finite state");
  return n;
}

OuterState reduced_step(const OuterState& s, const PolicyAction& a,
                        const QuadParams& params, Rng* rng) {
  const double thrust = params.hover_thrust() + a.delta_thrust;
  if (!std::isfinite(thrust) || !std::isfinite(a.theta_ref))
    throw InputError("reduced_step: non-finite action");
  if (thrust < 0.0) throw InputError("reduced_step: negative thrust");
  const OuterState n =
      integrate_outer(s, translational_accel(thrust, a.theta_ref, params, rng), params.dt);
  if (!n.finite()) throw NumericalError("reduced_step: non-finite state");
  return n;
}

PropertyReport check_outer_matching(const QuadParams& params, std::size_t samples,
                                    std::uint64_t seed, double tolerance) {
  params.validate();
  PropertyReport report;
  report.samples = samples;
  Rng sampler(seed, "outer_matching");
  for (std::size_t i = 0; i < samples; ++i) {
    const OuterState s{sampler.uniform(-20, 20), sampler.uniform(-5, 5),
                       sampler.uniform(-20, 20), sampler.uniform(-5, 5)};
    const double x = sampler.uniform(-1, 1);
    const PolicyAction a{sampler.uniform(-5, 5), x};
    const FullState fs{s, InnerState{x, sampler.uniform(-3, 3)}};
    const double moment = sampler.uniform(-10, 10);

    const std::uint64_t step_seed = derive_seed(seed, "outer_matching_step", i);
    Rng rng_full(step_seed);
    Rng rng_reduced(step_seed);
    const FullState nf =
        full_step(fs, params.hover_thrust() + a.delta_thrust, moment, params, &rng_full);
    const OuterState nr = reduced_step(s, a, params, &rng_reduced);
    const double dev = std::max({std::abs(nf.outer.p_x - nr.p_x),
                                 std::abs(nf.outer.v_x - nr.v_x),
                                 std::abs(nf.outer.p_z - nr.p_z),
                                 std::abs(nf.outer.v_z - nr.v_z)});
    report.max_deviation = std::max(report.max_deviation, dev);
    if (!(dev <= tolerance)) report.violations.push_back({i, dev});
  }
  return report;
}

}  // namespace cascade
