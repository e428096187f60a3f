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

#include "cascade/inner_loop.hpp"

#include <algorithm>
#include <cmath>

#include "cascade/errors.hpp"

namespace cascade {

GainSpec::GainSpec(double omega_n, double zeta, double inertia)
    : omega_n_(omega_n), zeta_(zeta), inertia_(inertia) {
  if (!(omega_n > 0.0) || !(zeta > 0.0) || !(inertia > 0.0))
    throw DomainError("gains: omega_n, zeta and inertia must be positive");
}

GainSpec gains_from(double omega_n, double zeta, double inertia) {
  return GainSpec(omega_n, zeta, inertia);
}

FilterState FilterState::initial(double dt, double time_constant) {
  if (!(dt > 0.0) || !(time_constant > 0.0))
    throw DomainError("filter: dt and time constant must be positive");
  FilterState fs;
  fs.alpha_f = std::exp(-dt / time_constant);
  return fs;
}

std::pair<FilterState, double> filter_update(const FilterState& fs, double theta_ref,
                                             double dt) {
  if (!(dt > 0.0)) throw DomainError("filter_update: dt must be positive");
  const double prev = fs.prev_ref.value_or(theta_ref);
  const double raw = (theta_ref - prev) / dt;
  FilterState next = fs;
  next.rate_est = fs.alpha_f * fs.rate_est + (1.0 - fs.alpha_f) * raw;
  next.prev_ref = theta_ref;
  return {next, next.rate_est};
}

InnerInput pd_control(const InnerState& x, double theta_ref, double rate_est,
                      const GainSpec& gains, double moment_max) {
  const double m =
      -gains.kp() * (x.theta - theta_ref) - gains.kd() * (x.theta_dot - rate_est);
  return {std::clamp(m, -moment_max, moment_max)};
}

ClosedLoopStep closed_loop_step(const FullState& s, const PolicyAction& a,
                                const FilterState& fs, const GainSpec& gains,
                                const QuadParams& params, const InnerLoopConfig& cfg,
                                Rng* rng) {
  auto [filter, rate] = filter_update(fs, a.theta_ref, params.dt);
  const InnerInput u = pd_control(s.inner, a.theta_ref, rate, gains, cfg.moment_max);
  ClosedLoopStep out;
  out.state = full_step(s, params.hover_thrust() + a.delta_thrust, u.moment, params, rng);
  out.filter = filter;
  out.moment = u.moment;
  out.saturated = std::abs(u.moment) >= cfg.moment_max;
  return out;
}

QuadrotorClosedLoop::QuadrotorClosedLoop(const GainSpec& gains, const QuadParams& params,
                                         const InnerLoopConfig& cfg)
    : gains_(gains),
      params_(params),
      cfg_(cfg),
      filter_(FilterState::initial(params.dt, cfg.filter_time_constant)) {
  params_.validate();
}

void QuadrotorClosedLoop::reset() {
  filter_ = FilterState::initial(params_.dt, cfg_.filter_time_constant);
}

ClosedLoopModel::StepResult QuadrotorClosedLoop::step(const FullState& s,
                                                      const PolicyAction& a, Rng* rng) {
  const ClosedLoopStep r = closed_loop_step(s, a, filter_, gains_, params_, cfg_, rng);
  filter_ = r.filter;
  return {r.state, r.saturated};
}

std::vector<double> linear_grid(double lo, double hi, double step) {
  if (!(step > 0.0) || hi < lo) throw DomainError("linear_grid: bad range");
  const auto n = static_cast<long>(std::floor((hi - lo) / step + 1e-9));
  std::vector<double> grid;
  grid.reserve(static_cast<std::size_t>(n + 1));
  for (long i = 0; i <= n; ++i) {
    // Round to 1e-9 so 0.1-spaced grids print cleanly.
    grid.push_back(std::round((lo + static_cast<double>(i) * step) * 1e9) / 1e9);
  }
  return grid;
}

}  // namespace cascade
