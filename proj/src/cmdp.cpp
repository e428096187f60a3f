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

#include "cascade/cmdp.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <numeric>
#include <string>

#include "cascade/errors.hpp"
#include "cascade/parallel.hpp"

namespace cascade {

double reward(const OuterState& s, const RewardSpec& spec) {
  if (!s.finite()) throw InvalidStateError("reward: non-finite state");
  const double dx = s.p_x - spec.goal_x;
  const double dz = s.p_z - spec.goal_z;
  const double d2 = dx * dx + dz * dz;
  double r = -d2 / spec.distance_scale;
  if (std::sqrt(d2) < spec.bonus_radius) r += spec.bonus;
  return r;
}

double penalized_reward(double r, int cost, double lambda) {
  if (lambda < 0.0) throw DomainError("penalized_reward: lambda must be >= 0");
  return r - lambda * static_cast<double>(cost);
}

void TrainConfig::validate() const {
  if (!(gamma > 0.0 && gamma <= 1.0)) throw DomainError("train: gamma must be in (0,1]");
  if (!(clip_range > 0.0)) throw DomainError("train: clip_range must be positive");
  if (!(delta > 0.0 && delta < 1.0)) throw DomainError("train: delta must be in (0,1)");
  if (!(gae_lambda >= 0.0 && gae_lambda <= 1.0))
    throw DomainError("train: gae_lambda must be in [0,1]");
  if (!(lambda0 >= 0.0)) throw DomainError("train: lambda0 must be >= 0");
  if (!(eta_lambda >= 0.0)) throw DomainError("train: eta_lambda must be >= 0");
  if (!(learning_rate > 0.0)) throw DomainError("train: learning_rate must be positive");
  if (horizon <= 0) throw DomainError("train: horizon must be positive");
  if (iterations < 0) throw DomainError("train: iterations must be >= 0");
  if (episodes_per_iteration <= 0 || epochs_per_iteration <= 0 || minibatch_size <= 0)
    throw DomainError("train: batch sizes must be positive");
  if (hidden.empty()) throw DomainError("train: at least one hidden layer");
  if (!(value_scale > 0.0)) throw DomainError("train: value_scale must be positive");
  if (!(bounds.delta_thrust_max > 0.0 && bounds.theta_ref_max > 0.0))
    throw DomainError("train: action bounds must be positive");
  if (bounds.delta_thrust_max > plant.hover_thrust())
    throw DomainError("train: delta_thrust_max would allow negative thrust");
  plant.validate();
  sampler.validate();
}

double episode_discounted_cost(const Trajectory& traj, double gamma, int horizon) {
  if (horizon <= 0 || traj.horizon() != static_cast<std::size_t>(horizon))
    throw InvalidTrajectoryError("episode_discounted_cost: horizon mismatch");
  double sum = 0.0;
  double g = 1.0;
  for (const auto& st : traj.steps) {
    sum += g * st.cost;
    g *= gamma;
  }
  return sum / horizon;
}

DualState dual_update(const DualState& d, double mean_cost, const TrainConfig& cfg) {
  return {std::max(0.0, d.lambda + cfg.eta_lambda * (mean_cost - cfg.delta))};
}

Eigen::VectorXd gae_advantages(const Eigen::VectorXd& rewards, const Eigen::VectorXd& values,
                               double gamma, double lambda) {
  const Eigen::Index n = rewards.size();
  if (values.size() != n + 1) throw DomainError("gae: values must have T+1 entries");
  Eigen::VectorXd adv(n);
  double acc = 0.0;
  for (Eigen::Index t = n; t-- > 0;) {
    const double delta = rewards(t) + gamma * values(t + 1) - values(t);
    acc = delta + gamma * lambda * acc;
    adv(t) = acc;
  }
  return adv;
}

double RolloutBatch::mean_discounted_cost() const {
  if (discounted_costs.empty()) return 0.0;
  return std::accumulate(discounted_costs.begin(), discounted_costs.end(), 0.0) /
         static_cast<double>(discounted_costs.size());
}

double RolloutBatch::mean_return() const {
  if (episode_returns.empty()) return 0.0;
  return std::accumulate(episode_returns.begin(), episode_returns.end(), 0.0) /
         static_cast<double>(episode_returns.size());
}

double RolloutBatch::mean_undiscounted_cost() const {
  if (episodes.empty()) return 0.0;
  double total = 0.0;
  for (const auto& e : episodes)
    for (const auto& st : e.steps) total += st.cost;
  return total / static_cast<double>(episodes.size());
}

namespace {

struct EpisodeRecord {
  Trajectory traj;
  std::vector<Eigen::Vector2d> raw;
  std::vector<double> log_prob;
};

EpisodeRecord reduced_episode(const PolicyParameters& policy, const TrainConfig& cfg,
                              Rng& rng, bool deterministic) {
  EpisodeRecord rec;
  rec.traj.seed = rng.seed();
  rec.traj.steps.reserve(static_cast<std::size_t>(cfg.horizon));
  OuterState s = cfg.sampler.draw(rng).outer;
  for (int t = 0; t < cfg.horizon; ++t) {
    const SampledAction a = policy.act(s, deterministic, &rng);
    TrajectoryStep st;
    st.outer = s;
    st.action = a.action;
    st.reward = reward(s, cfg.reward);
    st.cost = safety_cost(s, cfg.safe_set);
    rec.traj.steps.push_back(st);
    rec.raw.push_back(a.raw);
    rec.log_prob.push_back(a.log_prob);
    s = reduced_step(s, a.action, cfg.plant, &rng);
  }
  rec.traj.final_outer = s;
  return rec;
}

}  // namespace

RolloutBatch collect_rollouts(const PolicyParameters& policy, const TrainConfig& cfg,
                              double lambda, std::uint64_t iteration, int jobs,
                              bool deterministic) {
  if (!policy.finite()) throw NumericalError("collect_rollouts: non-finite policy");
  const auto n_ep = static_cast<std::size_t>(cfg.episodes_per_iteration);
  const auto horizon = static_cast<Eigen::Index>(cfg.horizon);
  std::vector<EpisodeRecord> records(n_ep);
  parallel_for(n_ep, jobs, [&](std::size_t e) {
    Rng rng(cfg.seed, "rollout", iteration, e);
    records[e] = reduced_episode(policy, cfg, rng, deterministic);
  });

  RolloutBatch b;
  const Eigen::Index n = static_cast<Eigen::Index>(n_ep) * horizon;
  b.obs.resize(kObsDim, n);
  b.raw_actions.resize(kActDim, n);
  b.log_prob.resize(n);
  b.values.resize(n);
  b.advantages.resize(n);
  b.returns.resize(n);

  for (std::size_t e = 0; e < n_ep; ++e) {
    EpisodeRecord& rec = records[e];
    const Eigen::Index off = static_cast<Eigen::Index>(e) * horizon;
    std::vector<OuterState> states;
    states.reserve(static_cast<std::size_t>(horizon) + 1);
    for (const auto& st : rec.traj.steps) states.push_back(st.outer);
    states.push_back(rec.traj.final_outer);
    const Eigen::MatrixXd obs = policy.observe_batch(states);
    const Eigen::VectorXd values =
        policy.value_scale * policy.critic.forward(obs).row(0).transpose();

    Eigen::VectorXd rewards(horizon);
    double task_return = 0.0;
    for (Eigen::Index t = 0; t < horizon; ++t) {
      const auto& st = rec.traj.steps[static_cast<std::size_t>(t)];
      rewards(t) = penalized_reward(st.reward, st.cost, lambda);
      task_return += st.reward;
      b.raw_actions.col(off + t) = rec.raw[static_cast<std::size_t>(t)];
      b.log_prob(off + t) = rec.log_prob[static_cast<std::size_t>(t)];
    }
    const Eigen::VectorXd adv = gae_advantages(rewards, values, cfg.gamma, cfg.gae_lambda);
    b.obs.middleCols(off, horizon) = obs.leftCols(horizon);
    b.values.segment(off, horizon) = values.head(horizon);
    b.advantages.segment(off, horizon) = adv;
    b.returns.segment(off, horizon) = adv + values.head(horizon);
    b.discounted_costs.push_back(episode_discounted_cost(rec.traj, cfg.gamma, cfg.horizon));
    b.episode_returns.push_back(task_return);
    b.episodes.push_back(std::move(rec.traj));
  }

  if (!b.advantages.allFinite() || !b.returns.allFinite() || !b.obs.allFinite())
    throw NumericalError("collect_rollouts: non-finite value in batch (training aborted)");
  const double mu = b.advantages.mean();
  const double var = (b.advantages.array() - mu).square().mean();
  b.advantages = ((b.advantages.array() - mu) / (std::sqrt(var) + 1e-8)).matrix();
  return b;
}

SurrogateResult clipped_surrogate(const PolicyParameters& policy, const Eigen::MatrixXd& obs,
                                  const Eigen::MatrixXd& raw_actions,
                                  const Eigen::VectorXd& old_log_prob,
                                  const Eigen::VectorXd& advantages, double clip_range,
                                  bool with_grad) {
  const Eigen::Index n = obs.cols();
  if (n == 0) throw DomainError("clipped_surrogate: empty batch");
  Mlp::Cache cache;
  const Eigen::MatrixXd mean = policy.actor.forward(obs, with_grad ? &cache : nullptr);
  const Eigen::ArrayXd inv_std = (-policy.log_std.array()).exp();
  const Eigen::ArrayXXd z = (raw_actions - mean).array().colwise() * inv_std;
  const double log_norm = policy.log_std.sum() + 0.5 * kActDim * std::log(2.0 * M_PI);
  const Eigen::ArrayXd log_prob = -0.5 * z.square().colwise().sum().transpose() - log_norm;
  const Eigen::ArrayXd ratio = (log_prob - old_log_prob.array()).exp();

  SurrogateResult res;
  Eigen::ArrayXd weight = Eigen::ArrayXd::Zero(n);  // d obj_i / d log_prob_i
  double obj = 0.0;
  Eigen::Index clipped = 0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const double a = advantages(i);
    const double r = ratio(i);
    const double unclipped = r * a;
    const double clipped_obj = std::clamp(r, 1.0 - clip_range, 1.0 + clip_range) * a;
    if (unclipped <= clipped_obj) {
      obj += unclipped;
      weight(i) = unclipped;
    } else {
      obj += clipped_obj;
    }
    if (r < 1.0 - clip_range || r > 1.0 + clip_range) ++clipped;
  }
  res.objective = obj / static_cast<double>(n);
  res.clip_fraction = static_cast<double>(clipped) / static_cast<double>(n);
  if (!with_grad) return res;

  weight /= static_cast<double>(n);
  // d log_prob / d mean_j = z_j / std_j ; d log_prob / d log_std_j = z_j^2 - 1.
  const Eigen::MatrixXd dmean =
      ((z.colwise() * inv_std).rowwise() * weight.transpose()).matrix();
  const Eigen::VectorXd dlog_std =
      ((z.square() - 1.0).rowwise() * weight.transpose()).rowwise().sum().matrix();
  Mlp grad;
  policy.actor.backward(cache, dmean, &grad);
  const Eigen::VectorXd ga = grad.flatten();
  res.grad.resize(ga.size() + dlog_std.size());
  res.grad << ga, dlog_std;
  return res;
}

CriticResult critic_loss(const PolicyParameters& policy, const Eigen::MatrixXd& obs,
                         const Eigen::VectorXd& returns, bool with_grad) {
  const Eigen::Index n = obs.cols();
  if (n == 0) throw DomainError("critic_loss: empty batch");
  Mlp::Cache cache;
  const Eigen::MatrixXd v = policy.critic.forward(obs, with_grad ? &cache : nullptr);
  const Eigen::RowVectorXd err = v.row(0) - returns.transpose() / policy.value_scale;
  CriticResult res;
  res.loss = 0.5 * err.squaredNorm() / static_cast<double>(n);
  if (!with_grad) return res;
  Mlp grad;
  policy.critic.backward(cache, err / static_cast<double>(n), &grad);
  res.grad = grad.flatten();
  return res;
}

Adam::Adam(Eigen::Index n, double lr, double beta1, double beta2, double eps)
    : lr_(lr),
      beta1_(beta1),
      beta2_(beta2),
      eps_(eps),
      m_(Eigen::VectorXd::Zero(n)),
      v_(Eigen::VectorXd::Zero(n)) {}

void Adam::step(Eigen::VectorXd& params, const Eigen::VectorXd& grad) {
  ++t_;
  m_ = beta1_ * m_ + (1.0 - beta1_) * grad;
  v_ = beta2_ * v_ + (1.0 - beta2_) * grad.cwiseProduct(grad);
  const double c1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
  params.array() -= lr_ * (m_.array() / c1) / ((v_.array() / c2).sqrt() + eps_);
}

namespace {

void clip_norm(Eigen::VectorXd& g, double max_norm) {
  if (max_norm <= 0.0) return;
  const double norm = g.norm();
  if (norm > max_norm) g *= max_norm / norm;
}

}  // namespace

PpoOptimizer::PpoOptimizer(const PolicyParameters& policy, const TrainConfig& cfg)
    : cfg_(cfg),
      actor_(policy.actor_flat().size(), cfg.learning_rate),
      critic_(policy.critic_flat().size(), cfg.learning_rate) {}

PpoStats PpoOptimizer::update(PolicyParameters& policy, const RolloutBatch& batch,
                              std::uint64_t iteration) {
  const Eigen::Index n = batch.size();
  if (n == 0) throw DomainError("ppo_update: empty batch");
  PpoStats stats;
  auto full_objective = [&] {
    return clipped_surrogate(policy, batch.obs, batch.raw_actions, batch.log_prob,
                             batch.advantages, cfg_.clip_range, false)
        .objective;
  };
  stats.surrogate_per_epoch.push_back(full_objective());

  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  Rng rng(cfg_.seed, "minibatch", iteration);
  const Eigen::Index mb = std::min<Eigen::Index>(cfg_.minibatch_size, n);
  double clip_sum = 0.0;
  int clip_count = 0;

  for (int epoch = 0; epoch < cfg_.epochs_per_iteration; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng.engine());
    for (Eigen::Index start = 0; start < n; start += mb) {
      const Eigen::Index len = std::min(mb, n - start);
      std::vector<Eigen::Index> idx(order.begin() + start, order.begin() + start + len);
      const Eigen::MatrixXd obs = batch.obs(Eigen::all, idx);
      const Eigen::MatrixXd raw = batch.raw_actions(Eigen::all, idx);
      const Eigen::VectorXd lp = batch.log_prob(idx);
      const Eigen::VectorXd adv = batch.advantages(idx);
      const Eigen::VectorXd ret = batch.returns(idx);

      SurrogateResult s = clipped_surrogate(policy, obs, raw, lp, adv, cfg_.clip_range);
      CriticResult c = critic_loss(policy, obs, ret);
      if (!s.grad.allFinite() || !c.grad.allFinite())
        throw NumericalError("ppo_update: NaN gradient (training aborted)");
      clip_sum += s.clip_fraction;
      ++clip_count;

      Eigen::VectorXd ascent = -s.grad;
      clip_norm(ascent, cfg_.max_grad_norm);
      clip_norm(c.grad, cfg_.max_grad_norm);
      Eigen::VectorXd a = policy.actor_flat();
      actor_.step(a, ascent);
      policy.set_actor_flat(a);
      policy.clamp_log_std();
      Eigen::VectorXd w = policy.critic_flat();
      critic_.step(w, c.grad);
      policy.set_critic_flat(w);
    }
    stats.surrogate_per_epoch.push_back(full_objective());
  }
  if (!policy.finite()) throw NumericalError("ppo_update: non-finite weights");
  stats.value_loss = critic_loss(policy, batch.obs, batch.returns, false).loss;
  stats.clip_fraction = clip_count > 0 ? clip_sum / clip_count : 0.0;
  return stats;
}

PolicyParameters ppo_update(const PolicyParameters& policy, const RolloutBatch& batch,
                            const TrainConfig& cfg, PpoStats* stats) {
  PolicyParameters out = policy;
  PpoOptimizer opt(out, cfg);
  PpoStats s = opt.update(out, batch, 0);
  if (stats) *stats = std::move(s);
  return out;
}

PolicyParameters initial_policy(const TrainConfig& cfg) {
  // Observations are centered on the goal and scaled to O(1).
  const Eigen::Vector4d offset(cfg.reward.goal_x, 0.0, cfg.reward.goal_z, 0.0);
  const Eigen::Vector4d scale(cfg.obs_position_scale, cfg.obs_velocity_scale,
                              cfg.obs_position_scale, cfg.obs_velocity_scale);
  return PolicyParameters::initialize(cfg.hidden, cfg.bounds, offset, scale, cfg.value_scale,
                                      cfg.log_std_init, derive_seed(cfg.seed, "init"));
}

TrainResult train(const TrainConfig& cfg, int jobs,
                  const std::function<void(const TrainLogEntry&, const PolicyParameters&)>& on_iteration) {
  cfg.validate();
  TrainResult result{initial_policy(cfg), {}};
  PpoOptimizer opt(result.policy, cfg);
  DualState dual{cfg.lambda0};
  for (int k = 0; k < cfg.iterations; ++k) {
    const auto iter = static_cast<std::uint64_t>(k);
    const RolloutBatch batch = collect_rollouts(result.policy, cfg, dual.lambda, iter, jobs);
    opt.update(result.policy, batch, iter);
    dual = dual_update(dual, batch.mean_discounted_cost(), cfg);
    if (dual.lambda < 0.0) throw NumericalError("train: negative multiplier");
    TrainLogEntry e;
    e.iter = k;
    e.mean_return = batch.mean_return();
    e.mean_cost = batch.mean_discounted_cost();
    e.mean_undiscounted_cost = batch.mean_undiscounted_cost();
    e.lambda = dual.lambda;
    e.policy_std = result.policy.mean_std();
    result.log.push_back(e);
    if (on_iteration) on_iteration(e, result.policy);
  }
  return result;
}

void write_train_log_csv(std::ostream& os, const std::vector<TrainLogEntry>& log) {
  const auto flags = os.flags();
  const auto prec = os.precision();
  os << std::setprecision(17);
  os << "iter,mean_return,mean_cost,lambda,policy_std\n";
  for (const auto& e : log)
    os << e.iter << ',' << e.mean_return << ',' << e.mean_cost << ',' << e.lambda << ','
       << e.policy_std << '\n';
  os.flags(flags);
  os.precision(prec);
}

ReducedEvaluation evaluate_reduced(const PolicyParameters& policy, const TrainConfig& cfg,
                                   int episodes, std::uint64_t seed, bool deterministic,
                                   double reach_radius, int jobs) {
  std::vector<EpisodeRecord> recs(static_cast<std::size_t>(episodes));
  parallel_for(recs.size(), jobs, [&](std::size_t e) {
    Rng rng(seed, "evaluate_reduced", e);
    recs[e] = reduced_episode(policy, cfg, rng, deterministic);
  });
  ReducedEvaluation ev;
  ev.episodes = episodes;
  for (const auto& r : recs) {
    const double dx = r.traj.final_outer.p_x - cfg.reward.goal_x;
    const double dz = r.traj.final_outer.p_z - cfg.reward.goal_z;
    if (std::hypot(dx, dz) < reach_radius) ev.goal_reach_fraction += 1.0;
    if (episode_is_unsafe(r.traj)) ev.failure_fraction += 1.0;
    ev.mean_discounted_cost += episode_discounted_cost(r.traj, cfg.gamma, cfg.horizon);
  }
  if (episodes > 0) {
    ev.goal_reach_fraction /= episodes;
    ev.failure_fraction /= episodes;
    ev.mean_discounted_cost /= episodes;
  }
  return ev;
}

}  // namespace cascade
