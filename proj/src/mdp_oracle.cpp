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


#include "cascade/mdp_oracle.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "cascade/errors.hpp"
#include "cascade/rng.hpp"

namespace cascade {

namespace {

void check_distribution(const std::vector<double>& p, std::size_t n, const char* what) {
  if (p.size() != n) throw DomainError(std::string(what) + ": wrong size");
  double sum = 0.0;
  for (double v : p) {
    if (!(v >= 0.0)) throw DomainError(std::string(what) + ": negative probability");
    sum += v;
  }
  if (std::abs(sum - 1.0) > 1e-12) throw DomainError(std::string(what) + ": does not sum to 1");
}

void check_kernel(const Kernel& k, int S, int A) {
  if (k.size() != static_cast<std::size_t>(S)) throw DomainError("kernel: wrong state count");
  for (const auto& row : k) {
    if (row.size() != static_cast<std::size_t>(A)) throw DomainError("kernel: wrong action count");
    for (const auto& p : row) check_distribution(p, S, "kernel row");
  }
}

std::vector<double> random_simplex(Rng& rng, int n) {
  // Uniform on the simplex via normalized exponentials.
  std::vector<double> p(n);
  double sum = 0.0;
  for (double& v : p) {
    v = -std::log(1.0 - rng.uniform(0.0, 1.0));
    sum += v;
  }
  for (double& v : p) v /= sum;
  return p;
}

Kernel random_kernel(Rng& rng, int S, int A) {
  Kernel k(S, std::vector<std::vector<double>>(A));
  for (auto& row : k)
    for (auto& p : row) p = random_simplex(rng, S);
  return k;
}

}  // namespace

void FiniteMdpPair::validate() const {
  if (num_states < 1 || num_actions < 1) throw DomainError("finite MDP: empty space");
  if (horizon < 1) throw DomainError("finite MDP: horizon must be >= 1");
  if (num_states * num_actions > 64 || horizon > 6)
    throw DomainError("finite MDP too large for exhaustive enumeration (need |S||A| <= 64, T <= 6)");
  const double paths = std::pow(num_states, horizon + 1) * std::pow(num_actions, horizon);
  if (paths > kMaxTrajectories)
    throw DomainError("finite MDP too large for exhaustive enumeration (" +
                      std::to_string(static_cast<long long>(paths)) + " trajectories)");
  check_distribution(initial, num_states, "initial distribution");
  if (policy.size() != static_cast<std::size_t>(num_states)) throw DomainError("policy: wrong size");
  for (const auto& p : policy) check_distribution(p, num_actions, "policy row");
  check_kernel(full, num_states, num_actions);
  check_kernel(reduced, num_states, num_actions);
  if (unsafe.size() != static_cast<std::size_t>(num_states)) throw DomainError("unsafe mask: wrong size");
}

FiniteMdpPair random_mdp_pair(std::uint64_t seed, int S, int A, int T) {
  Rng rng(seed, "oracle");
  FiniteMdpPair m;
  m.num_states = S;
  m.num_actions = A;
  m.horizon = T;
  m.initial = random_simplex(rng, S);
  m.policy.resize(S);
  for (auto& p : m.policy) p = random_simplex(rng, A);
  m.full = random_kernel(rng, S, A);
  const Kernel other = random_kernel(rng, S, A);
  const double w = rng.uniform(0.0, 0.5);
  m.reduced = m.full;
  for (int s = 0; s < S; ++s)
    for (int a = 0; a < A; ++a)
      for (int n = 0; n < S; ++n)
        m.reduced[s][a][n] = (1.0 - w) * m.full[s][a][n] + w * other[s][a][n];
  m.unsafe.assign(S, false);
  m.unsafe.back() = true;
  return m;
}

FiniteMdpPair identical_mdp_pair(std::uint64_t seed, int S, int A, int T) {
  FiniteMdpPair m = random_mdp_pair(seed, S, A, T);
  m.reduced = m.full;
  return m;
}

FiniteMdpPair two_state_pair(double tv, int T) {
  if (!(tv >= 0.0 && tv <= 0.5)) throw DomainError("two_state_pair: tv must lie in [0, 0.5]");
  FiniteMdpPair m;
  m.num_states = 2;
  m.num_actions = 1;
  m.horizon = T;
  m.initial = {1.0, 0.0};
  m.policy = {{1.0}, {1.0}};
  m.full = {{{0.7, 0.3}}, {{0.4, 0.6}}};
  m.reduced = m.full;
  m.reduced[0][0] = {0.7 + tv, 0.3 - tv};
  m.unsafe = {false, true};
  return m;
}

double tv_distance(const std::vector<double>& p, const std::vector<double>& q) {
  if (p.size() != q.size()) throw DomainError("tv_distance: size mismatch");
  double sum = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) sum += std::abs(p[i] - q[i]);
  return 0.5 * sum;
}

bool OracleResult::ok() const {
  return std::all_of(checks.begin(), checks.end(), [](const OracleCheck& c) { return c.ok; });
}

namespace {

struct Enumerator {
  const FiniteMdpPair& m;
  std::vector<std::vector<double>> step_tv;  // [s][a]
  std::vector<double> marg_full, marg_reduced;
  OracleResult& r;

  // Walks (s_t, a_t, s_{t+1}, ...) depth first carrying both path weights.
  void visit(int t, int s, double pk, double pr, bool hit, int cost) {
    const bool hit_now = hit || m.unsafe[s];
    const int cost_now = cost + (m.unsafe[s] ? 1 : 0);
    if (t == m.horizon) {
      r.joint_tv += 0.5 * std::abs(pk - pr);
      marg_full[s] += pk;
      marg_reduced[s] += pr;
      if (hit_now) {
        r.unsafe_full += pk;
        r.unsafe_reduced += pr;
      }
      r.expected_cost_full += pk * cost_now;
      r.expected_cost_reduced += pr * cost_now;
      return;
    }
    for (int a = 0; a < m.num_actions; ++a) {
      const double pa = m.policy[s][a];
      if (pa == 0.0) continue;
      r.sum_expected_step_tv += pr * pa * step_tv[s][a];
      for (int n = 0; n < m.num_states; ++n)
        visit(t + 1, n, pk * pa * m.full[s][a][n], pr * pa * m.reduced[s][a][n], hit_now,
              cost_now);
    }
  }
};

}  // namespace

OracleResult run_oracle(const FiniteMdpPair& m, double tol, bool mutant) {
  m.validate();
  OracleResult r;
  Enumerator en{m, {}, std::vector<double>(m.num_states, 0.0),
                std::vector<double>(m.num_states, 0.0), r};
  en.step_tv.assign(m.num_states, std::vector<double>(m.num_actions, 0.0));
  for (int s = 0; s < m.num_states; ++s)
    for (int a = 0; a < m.num_actions; ++a) {
      en.step_tv[s][a] = tv_distance(m.full[s][a], m.reduced[s][a]);
      r.max_step_tv = std::max(r.max_step_tv, en.step_tv[s][a]);
    }
  r.sum_step_tv = m.horizon * r.max_step_tv;

  // The expected-mismatch sum is accumulated on every path prefix, so each
  // depth contributes E_R[TV(s_t, a_t)] exactly once.
  for (int s = 0; s < m.num_states; ++s)
    if (m.initial[s] > 0.0) en.visit(0, s, m.initial[s], m.initial[s], false, 0);

  r.safe_full = 1.0 - r.unsafe_full;
  r.safe_reduced = 1.0 - r.unsafe_reduced;
  r.terminal_marginal_tv = tv_distance(en.marg_full, en.marg_reduced);

  auto add = [&](std::string name, double lhs, double rhs) {
    r.checks.push_back({std::move(name), lhs, rhs, lhs <= rhs + tol});
  };
  if (mutant) {
    add("trajectory_divergence(mutant)", r.sum_step_tv, r.joint_tv);
  } else {
    add("trajectory_divergence", r.joint_tv, r.sum_step_tv);
  }
  add("expected_step_mismatch", r.joint_tv, r.sum_expected_step_tv);
  add("safe_event_gap", std::abs(r.safe_full - r.safe_reduced), r.joint_tv);
  add("union_bound_full", r.unsafe_full, r.expected_cost_full);
  add("union_bound_reduced", r.unsafe_reduced, r.expected_cost_reduced);
  add("terminal_marginal", r.terminal_marginal_tv, r.joint_tv);
  return r;
}

void write_oracle_line(std::ostream& os, const OracleResult& r) {
  char buf[160];
  os << "seed=" << r.seed << (r.ok() ? " PASS" : " FAIL");
  for (const auto& c : r.checks) {
    std::snprintf(buf, sizeof buf, " %s:%.6g<=%.6g%s", c.name.c_str(), c.lhs, c.rhs,
                  c.ok ? "" : "!");
    os << buf;
  }
  os << "\n";
}

}  // namespace cascade
