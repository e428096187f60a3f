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

#include "cascade/policy.hpp"

#include <cmath>
#include <numbers>

#include "cascade/errors.hpp"

namespace cascade {

Mlp Mlp::zeros(const std::vector<int>& dims) {
  if (dims.size() < 2) throw DomainError("Mlp needs at least input and output dims");
  Mlp m;
  for (std::size_t i = 0; i + 1 < dims.size(); ++i) {
    m.weights.push_back(Eigen::MatrixXd::Zero(dims[i + 1], dims[i]));
    m.biases.push_back(Eigen::VectorXd::Zero(dims[i + 1]));
  }
  return m;
}

std::vector<int> Mlp::dims() const {
  std::vector<int> d{input_dim()};
  for (const auto& w : weights) d.push_back(static_cast<int>(w.rows()));
  return d;
}

Eigen::Index Mlp::size() const {
  Eigen::Index n = 0;
  for (std::size_t i = 0; i < weights.size(); ++i) n += weights[i].size() + biases[i].size();
  return n;
}

Eigen::MatrixXd Mlp::forward(const Eigen::MatrixXd& x, Cache* cache) const {
  if (cache) {
    cache->activations.clear();
    cache->activations.push_back(x);
  }
  Eigen::MatrixXd h = x;
  const std::size_t n = weights.size();
  for (std::size_t i = 0; i < n; ++i) {
    Eigen::MatrixXd z = weights[i] * h;
    z.colwise() += biases[i];
    if (i + 1 < n) {
      h = z.array().tanh().matrix();
      if (cache) cache->activations.push_back(h);
    } else {
      h = std::move(z);
    }
  }
  return h;
}

void Mlp::backward(const Cache& cache, const Eigen::MatrixXd& dy, Mlp* grad) const {
  const std::size_t n = weights.size();
  grad->weights.resize(n);
  grad->biases.resize(n);
  Eigen::MatrixXd delta = dy;  // dL/dz for the current layer
  for (std::size_t k = n; k-- > 0;) {
    const Eigen::MatrixXd& input = cache.activations[k];
    grad->weights[k] = delta * input.transpose();
    grad->biases[k] = delta.rowwise().sum();
    if (k > 0) {
      Eigen::MatrixXd dh = weights[k].transpose() * delta;
      delta = (dh.array() * (1.0 - input.array().square())).matrix();
    }
  }
}

Eigen::VectorXd Mlp::flatten() const {
  Eigen::VectorXd flat(size());
  Eigen::Index o = 0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    flat.segment(o, weights[i].size()) =
        Eigen::Map<const Eigen::VectorXd>(weights[i].data(), weights[i].size());
    o += weights[i].size();
    flat.segment(o, biases[i].size()) = biases[i];
    o += biases[i].size();
  }
  return flat;
}

void Mlp::unflatten(const Eigen::VectorXd& flat) {
  if (flat.size() != size()) throw DomainError("Mlp::unflatten: size mismatch");
  Eigen::Index o = 0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    Eigen::Map<Eigen::VectorXd>(weights[i].data(), weights[i].size()) =
        flat.segment(o, weights[i].size());
    o += weights[i].size();
    biases[i] = flat.segment(o, biases[i].size());
    o += biases[i].size();
  }
}

namespace {

Eigen::MatrixXd orthogonal(int rows, int cols, double gain, Rng& rng) {
  const int n = std::max(rows, cols);
  Eigen::MatrixXd g(n, n);
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) g(i, j) = rng.normal();
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(g);
  Eigen::MatrixXd q = qr.householderQ();
  // Sign-fix so the draw is uniform over the orthogonal group.
  const Eigen::MatrixXd r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (int j = 0; j < n; ++j)
    if (r(j, j) < 0) q.col(j) *= -1.0;
  return gain * q.topLeftCorner(rows, cols);
}

Mlp init_mlp(const std::vector<int>& dims, double out_gain, Rng& rng) {
  Mlp m = Mlp::zeros(dims);
  for (std::size_t i = 0; i < m.weights.size(); ++i) {
    const bool last = i + 1 == m.weights.size();
    m.weights[i] = orthogonal(static_cast<int>(m.weights[i].rows()),
                              static_cast<int>(m.weights[i].cols()),
                              last ? out_gain : std::numbers::sqrt2, rng);
  }
  return m;
}

}  // namespace

PolicyParameters PolicyParameters::initialize(const std::vector<int>& hidden,
                                              const ActionBounds& bounds,
                                              const Eigen::Vector4d& obs_offset,
                                              const Eigen::Vector4d& obs_scale,
                                              double value_scale, double log_std_init,
                                              std::uint64_t seed) {
  Rng rng(seed, "policy_init");
  std::vector<int> actor_dims{kObsDim};
  actor_dims.insert(actor_dims.end(), hidden.begin(), hidden.end());
  std::vector<int> critic_dims = actor_dims;
  actor_dims.push_back(kActDim);
  critic_dims.push_back(1);

  PolicyParameters p;
  p.actor = init_mlp(actor_dims, 0.01, rng);
  p.critic = init_mlp(critic_dims, 1.0, rng);
  p.log_std = Eigen::VectorXd::Constant(kActDim, log_std_init);
  p.obs_offset = obs_offset;
  p.obs_scale = obs_scale;
  p.action_scale = Eigen::Vector2d(bounds.delta_thrust_max, bounds.theta_ref_max);
  p.value_scale = value_scale;
  p.clamp_log_std();
  return p;
}

Eigen::Vector4d PolicyParameters::observe(const OuterState& s) const {
  const Eigen::Vector4d raw(s.p_x, s.v_x, s.p_z, s.v_z);
  return ((raw - obs_offset).array() * obs_scale.array()).matrix();
}

Eigen::MatrixXd PolicyParameters::observe_batch(const std::vector<OuterState>& states) const {
  Eigen::MatrixXd x(kObsDim, static_cast<Eigen::Index>(states.size()));
  for (std::size_t i = 0; i < states.size(); ++i)
    x.col(static_cast<Eigen::Index>(i)) = observe(states[i]);
  return x;
}

Eigen::Vector2d PolicyParameters::mean(const OuterState& s) const {
  return actor.forward(observe(s)).col(0);
}

double PolicyParameters::value(const OuterState& s) const {
  return value_scale * critic.forward(observe(s))(0, 0);
}

PolicyAction PolicyParameters::scale_action(const Eigen::Vector2d& raw) const {
  const Eigen::Vector2d c = raw.cwiseMax(-1.0).cwiseMin(1.0);
  return {c(0) * action_scale(0), c(1) * action_scale(1)};
}

double PolicyParameters::log_prob(const Eigen::Vector2d& mu, const Eigen::Vector2d& raw) const {
  double lp = 0.0;
  for (int j = 0; j < kActDim; ++j) {
    const double z = (raw(j) - mu(j)) * std::exp(-log_std(j));
    lp += -0.5 * z * z - log_std(j) - 0.5 * std::log(2.0 * std::numbers::pi);
  }
  return lp;
}

SampledAction PolicyParameters::act(const OuterState& s, bool deterministic, Rng* rng) const {
  const Eigen::Vector2d mu = mean(s);
  SampledAction out;
  out.raw = mu;
  if (!deterministic) {
    if (rng == nullptr) throw std::invalid_argument("stochastic act requires an RNG");
    for (int j = 0; j < kActDim; ++j) out.raw(j) += std::exp(log_std(j)) * rng->normal();
  }
  out.action = scale_action(out.raw);
  out.log_prob = log_prob(mu, out.raw);
  return out;
}

Eigen::VectorXd PolicyParameters::actor_flat() const {
  Eigen::VectorXd a = actor.flatten();
  Eigen::VectorXd flat(a.size() + log_std.size());
  flat << a, log_std;
  return flat;
}

void PolicyParameters::set_actor_flat(const Eigen::VectorXd& flat) {
  const Eigen::Index n = actor.size();
  if (flat.size() != n + log_std.size())
    throw DomainError("set_actor_flat: size mismatch");
  actor.unflatten(flat.head(n));
  log_std = flat.tail(log_std.size());
}

void PolicyParameters::clamp_log_std() {
  log_std = log_std.cwiseMax(kLogStdMin).cwiseMin(kLogStdMax);
}

bool PolicyParameters::finite() const {
  return actor_flat().allFinite() && critic_flat().allFinite();
}

double PolicyParameters::mean_std() const { return log_std.array().exp().mean(); }

}  // namespace cascade
