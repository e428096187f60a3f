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


#include <cmath>
#include <vector>

#include "cascade/errors.hpp"
#include "cascade/inner_loop.hpp"
#include "cascade/rng.hpp"
#include "doctest.h"

using namespace cascade;

namespace {

// Steps the closed loop from rest with a constant reference and returns the
// pitch after each step.
std::vector<double> step_response(double wn, double zeta, double ref, int steps) {
  const QuadParams p;
  QuadrotorClosedLoop loop(GainSpec(wn, zeta, p.inertia), p);
  FullState s;
  s.outer = {5, 0, 5, 0};
  std::vector<double> th;
  for (int k = 0; k < steps; ++k) {
    s = loop.step(s, {0.0, ref}, nullptr).state;
    th.push_back(s.inner.theta);
  }
  return th;
}

}  // namespace

TEST_CASE("gain parameterization") {
  const GainSpec a = gains_from(10, 0.7, 0.02);
  CHECK(std::abs(a.kp() - 2.0) < 1e-12);
  CHECK(std::abs(a.kd() - 0.28) < 1e-12);
  const GainSpec b = gains_from(2, 0.2, 0.02);
  CHECK(std::abs(b.kp() - 0.08) < 1e-12);
  CHECK(std::abs(b.kd() - 0.016) < 1e-12);
  const GainSpec c = gains_from(1, 0.5, 1);
  CHECK(c.kp() == 1.0);
  CHECK(c.kd() == 1.0);
  CHECK_THROWS_AS(gains_from(0, 0.5, 0.02), DomainError);
  CHECK_THROWS_AS(gains_from(2, -0.1, 0.02), DomainError);
  CHECK_THROWS_AS(gains_from(2, 0.5, 0.0), DomainError);
}

TEST_CASE("reference-rate filter") {
  const FilterState f0 = FilterState::initial(0.05, 0.1);
  CHECK(std::abs(f0.alpha_f - 0.6065306597126334) < 1e-15);
  CHECK_FALSE(f0.prev_ref.has_value());
  CHECK(f0.rate_est == 0.0);

  // First reference seeds the previous value: no spurious derivative kick.
  auto [f1, r1] = filter_update(f0, 0.3, 0.05);
  CHECK(r1 == 0.0);
  CHECK(*f1.prev_ref == 0.3);
  auto [f2, r2] = filter_update(f1, 0.3, 0.05);
  CHECK(r2 == 0.0);

  FilterState g = f0;
  g.prev_ref = 0.0;
  auto [g1, rate] = filter_update(g, 0.1, 0.05);
  CHECK(std::abs(rate - (1.0 - std::exp(-0.5)) * 2.0) < 1e-15);
  CHECK(std::abs(rate - 0.786939) < 1e-6);
  CHECK(*g1.prev_ref == 0.1);
  CHECK_THROWS_AS(FilterState::initial(0.0, 0.1), DomainError);
}

TEST_CASE("filter decays geometrically under a constant reference") {
  FilterState f = FilterState::initial(0.05, 0.1);
  f.prev_ref = 0.2;
  f.rate_est = 1.5;
  for (int k = 0; k < 30; ++k) {
    const double before = f.rate_est;
    auto [next, rate] = filter_update(f, 0.2, 0.05);
    REQUIRE(std::abs(rate - f.alpha_f * before) < 1e-15);
    f = next;
  }
}

TEST_CASE("PD law") {
  const GainSpec g = gains_from(10, 0.7, 0.02);
  CHECK(pd_control({0.2, 0.4}, 0.2, 0.4, g, 10).moment == 0.0);
  CHECK(std::abs(pd_control({0.1, 0.0}, 0.0, 0.0, g, 10).moment + 0.2) < 1e-12);
  CHECK(pd_control({5.0, 0.0}, 0.0, 0.0, g, 10).moment == -10.0);
  CHECK(pd_control({-5.0, 0.0}, 0.0, 0.0, g, 10).moment == 10.0);

  Rng rng(2);
  for (int i = 0; i < 500; ++i) {
    const GainSpec gi = gains_from(rng.uniform(2, 12), rng.uniform(0.2, 1.0), 0.02);
    const double e = rng.uniform(-0.2, 0.2);
    const double de = rng.uniform(-0.5, 0.5);
    const double m1 = pd_control({e, de}, 0.0, 0.0, gi, 1e9).moment;
    const double m2 = pd_control({2 * e, 2 * de}, 0.0, 0.0, gi, 1e9).moment;
    REQUIRE(std::abs(m2 - 2 * m1) < 1e-12);
  }
}

TEST_CASE("closed loop at hover is an equilibrium") {
  const QuadParams p;
  QuadrotorClosedLoop loop(gains_from(6, 0.7, p.inertia), p);
  FullState s;
  s.outer = {4, 0, 6, 0};
  for (int k = 0; k < 100; ++k) {
    const auto r = loop.step(s, {0.0, 0.0}, nullptr);
    REQUIRE(r.state == s);
    REQUIRE_FALSE(r.saturated);
  }
}

TEST_CASE("pitch step responses") {
  const std::vector<double> strong = step_response(12, 1.0, 0.1, 20);
  CHECK(std::abs(strong.back() - 0.1) < 0.01);

  const std::vector<double> weak = step_response(2, 0.2, 0.1, 60);
  double peak = 0.0;
  for (double v : weak) peak = std::max(peak, v);
  CHECK(peak > 0.15);
}

TEST_CASE("constant reference: tracking error eventually decreases to zero") {
  for (double wn = 2; wn <= 12; wn += 1)
    for (double z = 0.2; z <= 1.0 + 1e-9; z += 0.1) {
      CAPTURE(wn);
      CAPTURE(z);
      const std::vector<double> th = step_response(wn, z, 0.2, 2000);
      REQUIRE(std::abs(th.back() - 0.2) < 1e-6);
      // Peak of |e| over successive windows of 40 steps must shrink.
      double prev_peak = 1e9;
      for (std::size_t w = 40; w + 40 <= th.size(); w += 40) {
        double peak = 0.0;
        for (std::size_t k = w; k < w + 40; ++k) peak = std::max(peak, std::abs(th[k] - 0.2));
        if (peak < 1e-12) break;
        REQUIRE(peak <= prev_peak);
        prev_peak = peak;
      }
    }
}

TEST_CASE("closed_loop_step composes filter, PD and plant") {
  const QuadParams p;
  const InnerLoopConfig cfg;
  const GainSpec g = gains_from(8, 0.5, p.inertia);
  FullState s;
  s.outer = {3, 0.2, 4, -0.1};
  s.inner = {0.05, -0.3};
  FilterState fs = FilterState::initial(p.dt, cfg.filter_time_constant);
  fs.prev_ref = 0.1;
  fs.rate_est = 0.4;
  const ClosedLoopStep out = closed_loop_step(s, {1.0, 0.2}, fs, g, p, cfg, nullptr);

  auto [f_expect, rate] = filter_update(fs, 0.2, p.dt);
  const double m = pd_control(s.inner, 0.2, rate, g, cfg.moment_max).moment;
  CHECK(out.moment == m);
  CHECK(out.filter.rate_est == f_expect.rate_est);
  CHECK(out.state == full_step(s, 9.81 + 1.0, m, p, nullptr));
  CHECK_FALSE(out.saturated);

  s.inner.theta = 10.0;  // Kp = 1.28 -> |M| = 12.8 > 10
  CHECK(closed_loop_step(s, {0.0, 0.0}, fs, g, p, cfg, nullptr).saturated);
}

TEST_CASE("closed loop reset clears the filter") {
  const QuadParams p;
  QuadrotorClosedLoop loop(gains_from(8, 0.5, p.inertia), p);
  FullState s;
  loop.step(s, {0.0, 0.3}, nullptr);
  loop.step(s, {0.0, -0.3}, nullptr);
  CHECK(loop.filter().rate_est != 0.0);
  loop.reset();
  CHECK(loop.filter().rate_est == 0.0);
  CHECK_FALSE(loop.filter().prev_ref.has_value());
}

TEST_CASE("linear grids") {
  const auto w = linear_grid(2, 12, 1);
  CHECK(w.size() == 11);
  CHECK(w.front() == 2.0);
  CHECK(w.back() == 12.0);
  const auto z = linear_grid(0.2, 1.0, 0.1);
  REQUIRE(z.size() == 9);
  CHECK(z[1] == 0.3);
  CHECK(z[4] == 0.6);
  CHECK(z.back() == 1.0);
  CHECK_THROWS_AS(linear_grid(1, 0, 0.1), DomainError);
  CHECK_THROWS_AS(linear_grid(0, 1, 0), DomainError);
}
