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


#ifndef CASCADE_BOUNDS_HPP_
#define CASCADE_BOUNDS_HPP_

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "cascade/core.hpp"
#include "cascade/inner_loop.hpp"
#include "cascade/policy.hpp"
#include "cascade/quadrotor.hpp"
#include "cascade/sampler.hpp"
#include "cascade/transfer.hpp"

namespace cascade {

// Per-step inner-loop tracking statistics over a set of equal-length
// trajectories. Index convention: e[t] for t = 0..T-1, d[k] is the mean
// reference change between steps k and k+1 (so d has T-1 entries).
struct TrackingStats {
  std::vector<double> e;
  std::vector<double> d;
  double e0 = 0.0;
  std::size_t episodes = 0;
};

// Weighted pitch norm: |theta - theta_ref| * p_weight, optionally adding
// |theta_dot| * rate_weight when rate_weight > 0.
struct TrackingNorm {
  double p_weight = 1.0;
  double rate_weight = 0.0;
};

TrackingStats tracking_stats(const std::vector<Trajectory>& trajs,
                             const TrackingNorm& norm = {});

struct IssFit {
  double alpha = 0.0;
  double beta = 0.0;
  double coefficient = 0.0;  // (e0 + beta * D) / (1 - alpha)
};

// beta(alpha) = max over steps with d > 0 of (e[k+1] - alpha e[k]) / d[k],
// floored at zero. Throws InfeasibleError if a step with d = 0 grows
// faster than alpha allows.
double beta_at(const std::vector<double>& e, const std::vector<double>& d, double alpha);

// True when e[k+1] <= alpha e[k] + beta d[k] for every k.
bool iss_feasible(const std::vector<double>& e, const std::vector<double>& d,
                  double alpha, double beta);

// Scans alpha over (0, 1) on a uniform grid and returns the feasible pair
// minimizing the coefficient; ties go to the smaller alpha.
IssFit fit_iss(const std::vector<double>& e, const std::vector<double>& d,
               double grid_step = 1e-3);

// Total variation between N(mu1, s^2) and N(mu2, s^2).
double gaussian_tv_exact(double mean_gap, double sigma);
// Pinsker bound |mu1 - mu2| / (2 s) for the same pair.
double gaussian_tv_pinsker(double mean_gap, double sigma);

// Lipschitz constant of the outer transition (in TV) with respect to the
// pitch. The outer acceleration mean moves by at most F_max / m per radian,
// and the acceleration noise has std sigma on each channel.
double lipschitz_L(const QuadParams& params, const ActionBounds& bounds);

struct IssEstimate {
  double alpha = 0.5;
  double beta = 0.0;
  double e0 = 0.0;
  std::vector<double> d_seq;  // d_1, d_2, ...
  double D = 0.0;
  double p_weight = 1.0;
  double L = 0.0;

  static IssEstimate make(double alpha, double beta, double e0, std::vector<double> d_seq,
                          double L, double p_weight = 1.0);
  void validate() const;
};

// L (alpha^t e0 + beta sum_{l=1}^{t} alpha^{t-l} d_l).
double transient_bound(const IssEstimate& iss, int t);

struct SafetyCertificate {
  double delta = 0.0;
  double bound = 0.0;
  double transfer_term = 0.0;  // L / (1 - alpha) * (e0 + beta D)
  bool vacuous = true;
  IssEstimate iss;
  int horizon = 0;
};

SafetyCertificate safety_bound(const IssEstimate& iss, double delta, int horizon = 0);

struct CertifySettings {
  int fit_episodes = 200;
  int eval_episodes = 500;
  std::uint64_t seed = 0;
  double delta = 0.025;
  double grid_step = 1e-3;
  TrackingNorm norm;
  InitialStateSampler sampler;
};

struct CertifyReport {
  std::optional<SafetyCertificate> certificate;  // absent when the fit failed
  std::string fit_error;
  std::optional<std::size_t> fit_error_step;
  double omega_n = 0.0;
  double zeta = 0.0;
  double noise_sigma = 0.0;
  int fit_episodes = 0;
  int fit_invalid = 0;
  int eval_episodes = 0;
  int eval_invalid = 0;
  double empirical_safe = 0.0;
  bool below_certificate = false;  // empirical estimate < bound
  std::uint64_t seed = 0;
  std::uint64_t fit_seed = 0;
  std::uint64_t eval_seed = 0;
  std::string checkpoint_id;
};

// Instrumented closed-loop rollouts -> tracking_stats -> fit_iss ->
// lipschitz_L -> safety_bound, then an independent evaluation batch.
// Invalid evaluation episodes count as unsafe. Throws DegenerateKernelError
// when the plant noise is zero.
CertifyReport certify(const PolicyParameters& policy, const GainSpec& gains,
                      const DeployConfig& cfg, const CertifySettings& settings,
                      const ActionBounds& bounds, int jobs = 1);

void write_certificate_report(std::ostream& os, const CertifyReport& report);

}  // namespace cascade

#endif  // CASCADE_BOUNDS_HPP_
