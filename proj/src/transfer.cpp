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

#include "cascade/transfer.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <sstream>

#include "cascade/errors.hpp"
#include "cascade/parallel.hpp"

namespace cascade {

DeployConfig deploy_config_from(const TrainConfig& cfg) {
  DeployConfig d;
  d.horizon = cfg.horizon;
  d.reward = cfg.reward;
  d.safe_set = cfg.safe_set;
  d.plant = cfg.plant;
  return d;
}

DeployedEpisode deploy_episode(const PolicyParameters& policy, const GainSpec& gains,
                               const FullState& initial, const DeployConfig& cfg, Rng& rng) {
  DeployedEpisode ep;
  ep.traj.seed = rng.seed();
  ep.traj.steps.reserve(static_cast<std::size_t>(cfg.horizon));
  QuadrotorClosedLoop loop(gains, cfg.plant, cfg.inner);
  FullState s = initial;
  try {
    for (int t = 0; t < cfg.horizon; ++t) {
      const SampledAction a = policy.act(s.outer, cfg.deterministic, &rng);
      TrajectoryStep st;
      st.outer = s.outer;
      st.inner = s.inner;
      st.action = a.action;
      st.reward = reward(s.outer, cfg.reward);
      st.cost = safety_cost(s.outer, cfg.safe_set);
      ep.traj.steps.push_back(st);
      const auto r = loop.step(s, a.action, &rng);
      if (r.saturated) ++ep.saturated_steps;
      s = r.state;
    }
  } catch (const NumericalError&) {
    ep.valid = false;
  } catch (const InvalidStateError&) {
    ep.valid = false;
  }
  ep.traj.final_outer = s.outer;
  ep.traj.final_inner = s.inner;
  return ep;
}

double failure_probability(const std::vector<Trajectory>& trajs) {
  if (trajs.empty()) throw InvalidTrajectoryError("failure_probability: empty set");
  const auto unsafe = std::count_if(trajs.begin(), trajs.end(),
                                    [](const Trajectory& t) { return episode_is_unsafe(t); });
  return static_cast<double>(unsafe) / static_cast<double>(trajs.size());
}

namespace {

void require_inner(const Trajectory& traj) {
  if (traj.steps.empty()) throw InvalidTrajectoryError("empty trajectory");
  for (const auto& st : traj.steps)
    if (!st.inner) throw InvalidTrajectoryError("trajectory has no inner states");
}

}  // namespace

double episode_tracking_error(const Trajectory& traj) {
  require_inner(traj);
  double sum = 0.0;
  for (const auto& st : traj.steps) sum += std::abs(st.inner->theta - st.action.theta_ref);
  return sum / static_cast<double>(traj.steps.size());
}

double episode_max_tracking_error(const Trajectory& traj) {
  require_inner(traj);
  double m = 0.0;
  for (const auto& st : traj.steps) m = std::max(m, std::abs(st.inner->theta - st.action.theta_ref));
  return m;
}

double episode_reference_variation(const Trajectory& traj) {
  double sum = 0.0;
  for (std::size_t t = 1; t < traj.steps.size(); ++t)
    sum += std::abs(traj.steps[t].action.theta_ref - traj.steps[t - 1].action.theta_ref);
  return sum;
}

double mean_tracking_error(const std::vector<Trajectory>& trajs) {
  if (trajs.empty()) throw InvalidTrajectoryError("mean_tracking_error: empty set");
  double sum = 0.0;
  for (const auto& t : trajs) sum += episode_tracking_error(t);
  return sum / static_cast<double>(trajs.size());
}

const GainCell& TransferReport::at(double omega_n, double zeta) const {
  for (const auto& c : cells)
    if (std::abs(c.omega_n - omega_n) < 1e-9 && std::abs(c.zeta - zeta) < 1e-9) return c;
  throw std::out_of_range("TransferReport: no such gain pair");
}

TransferReport sweep(const PolicyParameters& policy, const SweepSettings& settings,
                     const DeployConfig& cfg, int jobs) {
  if (settings.omega_n.empty() || settings.zeta.empty())
    throw DomainError("sweep: empty gain grid");
  if (settings.episodes <= 0) throw DomainError("sweep: episodes must be positive");
  const auto n_ep = static_cast<std::size_t>(settings.episodes);
  const std::vector<FullState> initial = settings.sampler.draw_batch(settings.seed, n_ep);

  TransferReport report;
  report.seed = settings.seed;
  for (double w : settings.omega_n)
    for (double z : settings.zeta) {
      GainCell c;
      c.omega_n = w;
      c.zeta = z;
      c.episodes.resize(n_ep);
      report.cells.push_back(std::move(c));
    }

  const std::size_t total = report.cells.size() * n_ep;
  parallel_for(total, jobs, [&](std::size_t job) {
    GainCell& cell = report.cells[job / n_ep];
    const std::size_t e = job % n_ep;
    const GainSpec gains(cell.omega_n, cell.zeta, cfg.plant.inertia);
    Rng rng(settings.seed, "deploy", e);
    const DeployedEpisode ep = deploy_episode(policy, gains, initial[e], cfg, rng);
    EpisodeSummary& s = cell.episodes[e];
    s.valid = ep.valid;
    s.saturated_steps = ep.saturated_steps;
    if (ep.valid) {
      s.unsafe = episode_is_unsafe(ep.traj);
      s.mean_err = episode_tracking_error(ep.traj);
      s.max_err = episode_max_tracking_error(ep.traj);
      s.ref_var = episode_reference_variation(ep.traj);
    }
  });

  for (GainCell& c : report.cells) {
    int unsafe = 0;
    long sat = 0;
    for (const auto& s : c.episodes) {
      if (!s.valid) {
        ++c.n_invalid;
        continue;
      }
      ++c.n_episodes;
      unsafe += s.unsafe ? 1 : 0;
      c.mean_err += s.mean_err;
      c.mean_ref_var += s.ref_var;
      sat += s.saturated_steps;
    }
    if (c.n_episodes > 0) {
      c.p_fail = static_cast<double>(unsafe) / c.n_episodes;
      c.mean_err /= c.n_episodes;
      c.mean_ref_var /= c.n_episodes;
      c.sat_freq = static_cast<double>(sat) / (static_cast<double>(c.n_episodes) * cfg.horizon);
    }
  }
  verify_report(report);
  report.anomalies = find_dominance_anomalies(report);
  return report;
}

void verify_report(const TransferReport& report) {
  for (const auto& c : report.cells) {
    int unsafe = 0;
    int valid = 0;
    for (const auto& s : c.episodes) {
      if (!s.valid) continue;
      ++valid;
      unsafe += s.unsafe ? 1 : 0;
    }
    const double recount = valid > 0 ? static_cast<double>(unsafe) / valid : 0.0;
    if (valid != c.n_episodes || recount != c.p_fail)
      throw std::logic_error("sweep report: p_fail does not match episode flags");
  }
}

std::vector<std::string> find_dominance_anomalies(const TransferReport& report) {
  std::vector<std::string> out;
  for (const auto& a : report.cells)
    for (const auto& b : report.cells) {
      if (&a == &b || !(a.p_fail > b.p_fail)) continue;
      bool dominates = true;
      for (std::size_t e = 0; e < a.episodes.size() && dominates; ++e) {
        if (!a.episodes[e].valid || !b.episodes[e].valid) continue;
        dominates = a.episodes[e].max_err <= b.episodes[e].max_err;
      }
      if (dominates) {
        std::ostringstream os;
        os << "gains (" << a.omega_n << "," << a.zeta << ") track no worse than ("
           << b.omega_n << "," << b.zeta << ") on every episode but p_fail " << a.p_fail
           << " > " << b.p_fail;
        out.push_back(os.str());
      }
    }
  return out;
}

void write_sweep_csv(std::ostream& os, const TransferReport& report) {
  os << std::setprecision(12);
  os << "omega_n,zeta,p_fail,mean_err,mean_ref_var,sat_freq,n_episodes\n";
  for (const auto& c : report.cells)
    os << c.omega_n << ',' << c.zeta << ',' << c.p_fail << ',' << c.mean_err << ','
       << c.mean_ref_var << ',' << c.sat_freq << ',' << c.n_episodes << '\n';
}

void write_episode_csv(std::ostream& os, const TransferReport& report) {
  os << std::setprecision(12);
  os << "omega_n,zeta,episode,valid,unsafe,mean_err,max_err,ref_var,saturated_steps\n";
  for (const auto& c : report.cells)
    for (std::size_t e = 0; e < c.episodes.size(); ++e) {
      const auto& s = c.episodes[e];
      os << c.omega_n << ',' << c.zeta << ',' << e << ',' << (s.valid ? 1 : 0) << ','
         << (s.unsafe ? 1 : 0) << ',' << s.mean_err << ',' << s.max_err << ',' << s.ref_var
         << ',' << s.saturated_steps << '\n';
    }
}

void write_heatmap_csv(std::ostream& os, const TransferReport& report,
                       const std::string& metric) {
  auto value = [&](const GainCell& c) {
    if (metric == "p_fail") return c.p_fail;
    if (metric == "mean_err") return c.mean_err;
    if (metric == "mean_ref_var") return c.mean_ref_var;
    if (metric == "sat_freq") return c.sat_freq;
    throw std::invalid_argument("unknown heatmap metric: " + metric);
  };
  if (metric != "p_fail" && metric != "mean_err" && metric != "mean_ref_var" &&
      metric != "sat_freq")
    throw std::invalid_argument("unknown heatmap metric: " + metric);
  os << std::setprecision(12);
  os << "omega_n,zeta,value\n";
  for (const auto& c : report.cells) os << c.omega_n << ',' << c.zeta << ',' << value(c) << '\n';
}

}  // namespace cascade
