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


#include "cascade/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>
#include <type_traits>

#include "cascade/errors.hpp"
#include "cascade/rng.hpp"

namespace cascade {

std::vector<double> SweepConfig::omega_grid() const {
  return linear_grid(omega_n_min, omega_n_max, omega_n_step);
}
std::vector<double> SweepConfig::zeta_grid() const {
  return linear_grid(zeta_min, zeta_max, zeta_step);
}

void RunConfig::finalize() {
  train.seed = seed;
  try {
    train.validate();
  } catch (const DomainError& e) {
    throw ConfigError(e.what());
  }
  if (!(sweep.omega_n_step > 0.0 && sweep.zeta_step > 0.0))
    throw ConfigError("sweep: grid steps must be positive");
  if (!(sweep.omega_n_min > 0.0 && sweep.zeta_min > 0.0))
    throw ConfigError("sweep: gains must be positive");
  if (sweep.omega_n_max < sweep.omega_n_min || sweep.zeta_max < sweep.zeta_min)
    throw ConfigError("sweep: grid max below min");
  if (sweep.episodes <= 0) throw ConfigError("sweep: episodes must be positive");
  if (!(sweep.inner.filter_time_constant > 0.0 && sweep.inner.moment_max > 0.0))
    throw ConfigError("sweep: filter_time_constant and moment_max must be positive");
  if (!(certify.omega_n > 0.0 && certify.zeta > 0.0))
    throw ConfigError("certify: gains must be positive");
  if (!(certify.noise_sigma >= 0.0)) throw ConfigError("certify: noise_sigma must be >= 0");
  if (!(certify.delta >= 0.0 && certify.delta <= 1.0))
    throw ConfigError("certify: delta must lie in [0, 1]");
  if (certify.fit_episodes <= 0 || certify.eval_episodes <= 0)
    throw ConfigError("certify: episode counts must be positive");
  if (!(certify.alpha_grid_step > 0.0 && certify.alpha_grid_step < 0.5))
    throw ConfigError("certify: alpha_grid_step must lie in (0, 0.5)");
  if (!(certify.rate_weight >= 0.0)) throw ConfigError("certify: rate_weight must be >= 0");
  if (io.out_dir.empty()) throw ConfigError("io: out_dir must not be empty");
}

std::uint64_t RunConfig::sweep_seed() const { return derive_seed(seed, "sweep"); }
std::uint64_t RunConfig::certify_seed() const { return derive_seed(seed, "certify"); }

std::filesystem::path RunConfig::checkpoint_path() const {
  if (!io.checkpoint.empty()) return io.checkpoint;
  return std::filesystem::path(io.out_dir) / "policy.ckpt";
}

namespace {

struct Field {
  std::string section;  // empty for top level
  std::string key;
  std::function<void(RunConfig&, const std::string&)> set;
  std::function<std::string(const RunConfig&)> get;
};

[[noreturn]] void bad_value(const std::string& key, const std::string& v, const char* kind) {
  throw ConfigError("invalid " + std::string(kind) + " for '" + key + "': '" + v + "'");
}

template <typename T>
T parse_number(const std::string& key, const std::string& v) {
  T out{};
  const char* b = v.data();
  const char* e = b + v.size();
  auto [p, ec] = std::from_chars(b, e, out);
  if (ec != std::errc() || p != e || v.empty()) bad_value(key, v, "number");
  if constexpr (std::is_floating_point_v<T>) {
    if (!std::isfinite(out)) bad_value(key, v, "number");
  }
  return out;
}

std::string format_double(double v) {
  // Shortest text that parses back to the same double.
  char buf[40];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

// `acc` maps a config to the member; the value type picks the codec.
template <typename Acc>
Field field(const char* section, const char* key, Acc acc) {
  using T = std::remove_reference_t<decltype(acc(std::declval<RunConfig&>()))>;
  Field f;
  f.section = section;
  f.key = key;
  const std::string name = std::string(section) + "." + key;
  f.set = [acc, name](RunConfig& c, const std::string& v) {
    T& ref = acc(c);
    if constexpr (std::is_same_v<T, bool>) {
      if (v == "true") {
        ref = true;
      } else if (v == "false") {
        ref = false;
      } else {
        bad_value(name, v, "boolean (true/false)");
      }
    } else if constexpr (std::is_same_v<T, std::string>) {
      ref = v;
    } else if constexpr (std::is_same_v<T, std::vector<int>>) {
      std::vector<int> out;
      std::stringstream ss(v);
      std::string item;
      while (std::getline(ss, item, ',')) {
        const auto b = item.find_first_not_of(" \t");
        const auto e = item.find_last_not_of(" \t");
        if (b == std::string::npos) bad_value(name, v, "integer list");
        out.push_back(parse_number<int>(name, item.substr(b, e - b + 1)));
      }
      if (out.empty()) bad_value(name, v, "integer list");
      ref = out;
    } else {
      ref = parse_number<T>(name, v);
    }
  };
  f.get = [acc](const RunConfig& c) -> std::string {
    const T& ref = acc(const_cast<RunConfig&>(c));
    if constexpr (std::is_same_v<T, bool>) {
      return ref ? "true" : "false";
    } else if constexpr (std::is_same_v<T, std::string>) {
      return ref;
    } else if constexpr (std::is_same_v<T, std::vector<int>>) {
      std::string s;
      for (std::size_t i = 0; i < ref.size(); ++i) s += (i ? "," : "") + std::to_string(ref[i]);
      return s;
    } else if constexpr (std::is_floating_point_v<T>) {
      return format_double(ref);
    } else {
      return std::to_string(ref);
    }
  };
  return f;
}

#define CFG_FIELD(sec, key, expr) field(sec, key, [](RunConfig& c) -> auto& { return expr; })

const std::vector<Field>& fields() {
  static const std::vector<Field> table = {
      CFG_FIELD("", "seed", c.seed),

      CFG_FIELD("plant", "mass", c.train.plant.mass),
      CFG_FIELD("plant", "gravity", c.train.plant.gravity),
      CFG_FIELD("plant", "inertia", c.train.plant.inertia),
      CFG_FIELD("plant", "dt", c.train.plant.dt),
      CFG_FIELD("plant", "noise_sigma", c.train.plant.noise_sigma),
      CFG_FIELD("plant", "safe_boundary", c.train.safe_set.boundary),
      CFG_FIELD("plant", "delta_thrust_max", c.train.bounds.delta_thrust_max),
      CFG_FIELD("plant", "theta_ref_max", c.train.bounds.theta_ref_max),
      CFG_FIELD("plant", "px_min", c.train.sampler.px_min),
      CFG_FIELD("plant", "px_max", c.train.sampler.px_max),
      CFG_FIELD("plant", "pz_min", c.train.sampler.pz_min),
      CFG_FIELD("plant", "pz_max", c.train.sampler.pz_max),
      CFG_FIELD("plant", "velocity_range", c.train.sampler.velocity_range),

      CFG_FIELD("train", "delta", c.train.delta),
      CFG_FIELD("train", "gamma", c.train.gamma),
      CFG_FIELD("train", "lambda0", c.train.lambda0),
      CFG_FIELD("train", "eta_lambda", c.train.eta_lambda),
      CFG_FIELD("train", "learning_rate", c.train.learning_rate),
      CFG_FIELD("train", "clip_range", c.train.clip_range),
      CFG_FIELD("train", "gae_lambda", c.train.gae_lambda),
      CFG_FIELD("train", "horizon", c.train.horizon),
      CFG_FIELD("train", "iterations", c.train.iterations),
      CFG_FIELD("train", "episodes_per_iteration", c.train.episodes_per_iteration),
      CFG_FIELD("train", "epochs_per_iteration", c.train.epochs_per_iteration),
      CFG_FIELD("train", "minibatch_size", c.train.minibatch_size),
      CFG_FIELD("train", "hidden", c.train.hidden),
      CFG_FIELD("train", "log_std_init", c.train.log_std_init),
      CFG_FIELD("train", "value_scale", c.train.value_scale),
      CFG_FIELD("train", "max_grad_norm", c.train.max_grad_norm),
      CFG_FIELD("train", "obs_position_scale", c.train.obs_position_scale),
      CFG_FIELD("train", "obs_velocity_scale", c.train.obs_velocity_scale),
      CFG_FIELD("train", "goal_x", c.train.reward.goal_x),
      CFG_FIELD("train", "goal_z", c.train.reward.goal_z),
      CFG_FIELD("train", "distance_scale", c.train.reward.distance_scale),
      CFG_FIELD("train", "goal_bonus", c.train.reward.bonus),
      CFG_FIELD("train", "goal_radius", c.train.reward.bonus_radius),

      CFG_FIELD("sweep", "omega_n_min", c.sweep.omega_n_min),
      CFG_FIELD("sweep", "omega_n_max", c.sweep.omega_n_max),
      CFG_FIELD("sweep", "omega_n_step", c.sweep.omega_n_step),
      CFG_FIELD("sweep", "zeta_min", c.sweep.zeta_min),
      CFG_FIELD("sweep", "zeta_max", c.sweep.zeta_max),
      CFG_FIELD("sweep", "zeta_step", c.sweep.zeta_step),
      CFG_FIELD("sweep", "episodes", c.sweep.episodes),
      CFG_FIELD("sweep", "deterministic_policy", c.sweep.deterministic_policy),
      CFG_FIELD("sweep", "filter_time_constant", c.sweep.inner.filter_time_constant),
      CFG_FIELD("sweep", "moment_max", c.sweep.inner.moment_max),

      CFG_FIELD("certify", "omega_n", c.certify.omega_n),
      CFG_FIELD("certify", "zeta", c.certify.zeta),
      CFG_FIELD("certify", "noise_sigma", c.certify.noise_sigma),
      CFG_FIELD("certify", "delta", c.certify.delta),
      CFG_FIELD("certify", "fit_episodes", c.certify.fit_episodes),
      CFG_FIELD("certify", "eval_episodes", c.certify.eval_episodes),
      CFG_FIELD("certify", "alpha_grid_step", c.certify.alpha_grid_step),
      CFG_FIELD("certify", "rate_weight", c.certify.rate_weight),

      CFG_FIELD("io", "out_dir", c.io.out_dir),
      CFG_FIELD("io", "checkpoint", c.io.checkpoint),
  };
  return table;
}

#undef CFG_FIELD

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

}  // namespace

RunConfig parse_config(std::istream& in) {
  static const std::set<std::string> sections = {"plant", "train", "sweep", "certify", "io"};
  RunConfig cfg;
  std::string section;
  std::set<std::string> seen_sections;
  std::set<std::string> seen_keys;
  std::string raw;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const std::string line = trim(raw);
    if (line.empty() || line[0] == '#' || line[0] == ';') continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw ConfigError("malformed section header '" + line + "'", line_no);
      section = trim(line.substr(1, line.size() - 2));
      if (!sections.count(section))
        throw ConfigError("unknown section [" + section + "]", line_no);
      if (!seen_sections.insert(section).second)
        throw ConfigError("duplicate section [" + section + "]", line_no);
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError("expected 'key = value'", line_no);
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) throw ConfigError("missing key", line_no);
    const Field* match = nullptr;
    for (const Field& f : fields())
      if (f.section == section && f.key == key) match = &f;
    if (!match) {
      const std::string where = section.empty() ? "top level" : "[" + section + "]";
      throw ConfigError("unknown key '" + key + "' in " + where, line_no);
    }
    if (!seen_keys.insert(section + "." + key).second)
      throw ConfigError("duplicate key '" + key + "'", line_no);
    try {
      match->set(cfg, value);
    } catch (const ConfigError& e) {
      throw ConfigError(e.what(), line_no);
    }
  }
  cfg.finalize();
  return cfg;
}

RunConfig parse_config_string(const std::string& text) {
  std::istringstream in(text);
  return parse_config(in);
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path.string() + "'");
  return parse_config(in);
}

void write_config(std::ostream& os, const RunConfig& cfg) {
  std::string section = "\x01";
  for (const Field& f : fields()) {
    if (f.section != section) {
      section = f.section;
      if (!section.empty()) os << "\n[" << section << "]\n";
    }
    os << f.key << " = " << f.get(cfg) << "\n";
  }
}

std::string config_to_string(const RunConfig& cfg) {
  std::ostringstream os;
  write_config(os, cfg);
  return os.str();
}

}  // namespace cascade
