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


#include "cascade/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <numeric>

#include "cascade/errors.hpp"
#include "cascade/parallel.hpp"
#include "cascade/rng.hpp"

namespace cascade {

TrackingStats tracking_stats(const std::vector<Trajectory>& trajs, const TrackingNorm& norm) {
  if (trajs.empty()) throw InvalidTrajectoryError("tracking_stats: empty set");
  if (!(norm.p_weight > 0.0) || norm.rate_weight < 0.0)
    throw DomainError("tracking_stats: weight must be positive");
  const std::size_t T = trajs.front().steps.size();
  if (T == 0) throw InvalidTrajectoryError("tracking_stats: empty trajectory");
  TrackingStats out;
  out.e.assign(T, 0.0);
  out.d.assign(T - 1, 0.0);
  for (const Trajectory& tr : trajs) {
    if (tr.steps.size() != T) throw InvalidTrajectoryError("tracking_stats: horizons differ");
    for (std::size_t t = 0; t < T; ++t) {
      const TrajectoryStep& st = tr.steps[t];
      if (!st.inner) throw InvalidTrajectoryError("tracking_stats: missing inner state");
      out.e[t] += norm.p_weight * std::abs(st.inner->theta - st.action.theta_ref) +
                  norm.rate_weight * std::abs(st.inner->theta_dot);
      if (t > 0)
        out.d[t - 1] +=
            norm.p_weight * std::abs(st.action.theta_ref - tr.steps[t - 1].action.theta_ref);
    }
  }
  const double n = static_cast<double>(trajs.size());
  for (double& v : out.e) v /= n;
  for (double& v : out.d) v /= n;
  out.e0 = out.e[0];
  out.episodes = trajs.size();
  return out;
}

namespace {

void check_sequences(const std::vector<double>& e, const std::vector<double>& d) {
  if (e.size() < 2) throw DomainError("ISS fit needs at least two error samples");
  if (d.size() + 1 != e.size())
    throw DomainError("ISS fit: need one reference variation per transition");
  for (double v : e)
    if (!(v >= 0.0) || !std::isfinite(v)) throw DomainError("ISS fit: errors must be >= 0");
  for (double v : d)
    if (!(v >= 0.0) || !std::isfinite(v)) throw DomainError("ISS fit: variations must be >= 0");
}

double beta_unchecked(const std::vector<double>& e, const std::vector<double>& d,
                      double alpha) {
  double beta = 0.0;
  for (std::size_t k = 0; k < d.size(); ++k) {
    const double excess = e[k + 1] - alpha * e[k];
    if (d[k] > 0.0) {
      beta = std::max(beta, excess / d[k]);
    } else if (excess > 0.0) {
      throw InfeasibleError("ISS fit infeasible at step " + std::to_string(k + 1) +
                                ": error grows with zero reference variation",
                            k + 1);
    }
  }
  // Division rounding can leave a constraint short by an ulp.
  for (std::size_t k = 0; k < d.size(); ++k)
    while (alpha * e[k] + beta * d[k] < e[k + 1])
      beta = std::nextafter(beta, std::numeric_limits<double>::infinity());
  return beta;
}

}  // namespace

double beta_at(const std::vector<double>& e, const std::vector<double>& d, double alpha) {
  check_sequences(e, d);
  if (!(alpha > 0.0 && alpha < 1.0)) throw DomainError("alpha must lie in (0, 1)");
  return beta_unchecked(e, d, alpha);
}

bool iss_feasible(const std::vector<double>& e, const std::vector<double>& d, double alpha,
                  double beta) {
  check_sequences(e, d);
  for (std::size_t k = 0; k < d.size(); ++k)
    if (e[k + 1] > alpha * e[k] + beta * d[k]) return false;
  return true;
}

IssFit fit_iss(const std::vector<double>& e, const std::vector<double>& d, double grid_step) {
  check_sequences(e, d);
  if (!(grid_step > 0.0 && grid_step < 0.5)) throw DomainError("alpha grid step out of range");
  const double D = std::accumulate(d.begin(), d.end(), 0.0);
  const auto n = static_cast<long>(std::floor(1.0 / grid_step + 1e-9));
  std::optional<IssFit> best;
  std::size_t worst_step = 0;
  for (long i = 1; i < n; ++i) {
    const double alpha = static_cast<double>(i) * grid_step;
    if (alpha >= 1.0) break;
    double beta = 0.0;
    try {
      beta = beta_unchecked(e, d, alpha);
    } catch (const InfeasibleError& err) {
      worst_step = err.step();
      continue;
    }
    const double coef = (e[0] + beta * D) / (1.0 - alpha);
    if (!best || coef < best->coefficient) best = IssFit{alpha, beta, coef};
  }
  if (!best)
    throw InfeasibleError("ISS fit infeasible: no alpha in (0,1) satisfies step " +
                              std::to_string(worst_step),
                          worst_step);
  return *best;
}

double gaussian_tv_exact(double mean_gap, double sigma) {
  if (!(sigma > 0.0)) throw DegenerateKernelError("total variation needs sigma > 0");
  return std::erf(std::abs(mean_gap) / (2.0 * std::sqrt(2.0) * sigma));
}

double gaussian_tv_pinsker(double mean_gap, double sigma) {
  if (!(sigma > 0.0)) throw DegenerateKernelError("total variation needs sigma > 0");
  return std::abs(mean_gap) / (2.0 * sigma);
}

double lipschitz_L(const QuadParams& params, const ActionBounds& bounds) {
  params.validate();
  if (!(params.noise_sigma > 0.0))
    throw DegenerateKernelError(
        "lipschitz_L: noise_sigma = 0 makes the transition kernel deterministic; "
        "total variation between distinct next states is always 1");
  // d/dtheta (F sin, F cos) / m has norm F / m; the velocity mean moves by
  // dt times that, against velocity noise of std sigma * dt.
  const double g_max = (params.hover_thrust() + bounds.delta_thrust_max) / params.mass;
  return g_max / (2.0 * params.noise_sigma);
}

IssEstimate IssEstimate::make(double alpha, double beta, double e0, std::vector<double> d_seq,
                              double L, double p_weight) {
  IssEstimate iss;
  iss.alpha = alpha;
  iss.beta = beta;
  iss.e0 = e0;
  iss.D = std::accumulate(d_seq.begin(), d_seq.end(), 0.0);
  iss.d_seq = std::move(d_seq);
  iss.L = L;
  iss.p_weight = p_weight;
  iss.validate();
  return iss;
}

void IssEstimate::validate() const {
  if (!(alpha > 0.0 && alpha < 1.0)) throw DomainError("IssEstimate: alpha must lie in (0, 1)");
  if (!(beta >= 0.0) || !(e0 >= 0.0) || !(D >= 0.0) || !(L >= 0.0))
    throw DomainError("IssEstimate: beta, e0, D, L must be nonnegative");
  if (!(p_weight > 0.0)) throw DomainError("IssEstimate: P weight must be positive");
  for (double v : d_seq)
    if (!(v >= 0.0)) throw DomainError("IssEstimate: d_t must be nonnegative");
}

double transient_bound(const IssEstimate& iss, int t) {
  if (t < 0) throw DomainError("transient_bound: t must be >= 0");
  if (static_cast<std::size_t>(t) > iss.d_seq.size())
    throw DomainError("transient_bound: t exceeds the reference-variation sequence");
  double sum = 0.0;
  for (int l = 1; l <= t; ++l) sum += std::pow(iss.alpha, t - l) * iss.d_seq[l - 1];
  return iss.L * (std::pow(iss.alpha, t) * iss.e0 + iss.beta * sum);
}

SafetyCertificate safety_bound(const IssEstimate& iss, double delta, int horizon) {
  if (iss.alpha >= 1.0) throw DomainError("safety_bound: alpha must be < 1");
  iss.validate();
  if (!(delta >= 0.0 && delta <= 1.0)) throw DomainError("safety_bound: delta outside [0, 1]");
  SafetyCertificate c;
  c.delta = delta;
  c.transfer_term = iss.L / (1.0 - iss.alpha) * (iss.e0 + iss.beta * iss.D);
  c.bound = 1.0 - delta - c.transfer_term;
  c.vacuous = !(c.bound > 0.0);
  c.iss = iss;
  c.horizon = horizon;
  return c;
}

namespace {

std::vector<DeployedEpisode> rollouts(const PolicyParameters& policy, const GainSpec& gains,
                                      const DeployConfig& cfg, const InitialStateSampler& sampler,
                                      std::uint64_t seed, int n, int jobs) {
  const auto count = static_cast<std::size_t>(n);
  const std::vector<FullState> init = sampler.draw_batch(seed, count);
  std::vector<DeployedEpisode> out(count);
  parallel_for(count, jobs, [&](std::size_t i) {
    Rng rng(seed, "deploy", i);
    out[i] = deploy_episode(policy, gains, init[i], cfg, rng);
  });
  return out;
}

}  // namespace

CertifyReport certify(const PolicyParameters& policy, const GainSpec& gains,
                      const DeployConfig& cfg, const CertifySettings& settings,
                      const ActionBounds& bounds, int jobs) {
  if (settings.fit_episodes <= 0 || settings.eval_episodes <= 0)
    throw DomainError("certify: episode counts must be positive");
  const double L = lipschitz_L(cfg.plant, bounds);  // refuses sigma = 0 up front

  CertifyReport rep;
  rep.omega_n = gains.omega_n();
  rep.zeta = gains.zeta();
  rep.noise_sigma = cfg.plant.noise_sigma;
  rep.seed = settings.seed;
  rep.fit_seed = derive_seed(settings.seed, "certify_fit");
  rep.eval_seed = derive_seed(settings.seed, "certify_eval");

  const auto fit = rollouts(policy, gains, cfg, settings.sampler, rep.fit_seed,
                            settings.fit_episodes, jobs);
  std::vector<Trajectory> trajs;
  for (const auto& ep : fit) {
    if (ep.valid) {
      trajs.push_back(ep.traj);
    } else {
      ++rep.fit_invalid;
    }
  }
  rep.fit_episodes = static_cast<int>(trajs.size());

  const auto eval = rollouts(policy, gains, cfg, settings.sampler, rep.eval_seed,
                             settings.eval_episodes, jobs);
  int safe = 0;
  for (const auto& ep : eval) {
    if (!ep.valid) {
      ++rep.eval_invalid;
    } else if (!episode_is_unsafe(ep.traj)) {
      ++safe;
    }
  }
  rep.eval_episodes = settings.eval_episodes;
  rep.empirical_safe = static_cast<double>(safe) / settings.eval_episodes;

  if (trajs.empty()) {
    rep.fit_error = "no valid fitting episodes";
    return rep;
  }
  const TrackingStats stats = tracking_stats(trajs, settings.norm);
  try {
    const IssFit f = fit_iss(stats.e, stats.d, settings.grid_step);
    const IssEstimate iss =
        IssEstimate::make(f.alpha, f.beta, stats.e0, stats.d, L, settings.norm.p_weight);
    rep.certificate = safety_bound(iss, settings.delta, cfg.horizon);
    rep.below_certificate = rep.empirical_safe < rep.certificate->bound;
  } catch (const InfeasibleError& err) {
    rep.fit_error = err.what();
    rep.fit_error_step = err.step();
  }
  return rep;
}

void write_certificate_report(std::ostream& os, const CertifyReport& r) {
  const auto flags = os.flags();
  const auto prec = os.precision();
  os << std::setprecision(12);
  os << "[certificate]\n";
  os << "omega_n = " << r.omega_n << "\n";
  os << "zeta = " << r.zeta << "\n";
  os << "noise_sigma = " << r.noise_sigma << "\n";
  os << "seed = " << r.seed << "\n";
  os << "fit_seed = " << r.fit_seed << "\n";
  os << "eval_seed = " << r.eval_seed << "\n";
  if (!r.checkpoint_id.empty()) os << "checkpoint = " << r.checkpoint_id << "\n";
  os << "fit_episodes = " << r.fit_episodes << "\n";
  os << "fit_invalid = " << r.fit_invalid << "\n";
  os << "constants_source = fitted from instrumented rollouts (data-conditional)\n";
  if (r.certificate) {
    const SafetyCertificate& c = *r.certificate;
    os << "horizon = " << c.horizon << "\n";
    os << "delta = " << c.delta << "\n";
    os << "alpha = " << c.iss.alpha << "\n";
    os << "beta = " << c.iss.beta << "\n";
    os << "e0 = " << c.iss.e0 << "\n";
    os << "D = " << c.iss.D << "\n";
    os << "L = " << c.iss.L << "\n";
    os << "p_weight = " << c.iss.p_weight << "\n";
    os << "transfer_term = " << c.transfer_term << "\n";
    os << "bound = " << c.bound << "\n";
    os << "vacuous = " << (c.vacuous ? "true" : "false") << "\n";
  } else {
    os << "bound = withheld\n";
    os << "fit_error = " << r.fit_error << "\n";
    if (r.fit_error_step) os << "fit_error_step = " << *r.fit_error_step << "\n";
  }
  os << "[empirical]\n";
  os << "eval_episodes = " << r.eval_episodes << "\n";
  os << "eval_invalid = " << r.eval_invalid << "\n";
  os << "safe_probability = " << r.empirical_safe << "\n";
  os << "below_certificate = " << (r.below_certificate ? "true" : "false") << "\n";
  os.flags(flags);
  os.precision(prec);
}

}  // namespace cascade
