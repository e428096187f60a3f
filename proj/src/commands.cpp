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


#include "cascade/commands.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>

#include "cascade/bounds.hpp"
#include "cascade/checkpoint.hpp"
#include "cascade/errors.hpp"
#include "cascade/mdp_oracle.hpp"
#include "cascade/transfer.hpp"

namespace cascade {

namespace fs = std::filesystem;

namespace {

fs::path prepare_out(const RunConfig& cfg) {
  const fs::path dir(cfg.io.out_dir);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create output directory '" + dir.string() + "'");
  return dir;
}

template <typename Fn>
void write_file(const fs::path& path, Fn&& body) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write '" + path.string() + "'");
  body(out);
  if (!out) throw IoError("write failed: '" + path.string() + "'");
}

void write_echo(const fs::path& dir, const char* command, const RunConfig& cfg,
                const std::string& extra = "") {
  write_file(dir / (std::string(command) + ".resolved.ini"), [&](std::ostream& os) {
    os << "# resolved configuration for '" << command << "'\n";
    if (!extra.empty()) os << extra;
    write_config(os, cfg);
  });
}

DeployConfig deploy_from(const RunConfig& cfg) {
  DeployConfig d = deploy_config_from(cfg.train);
  d.inner = cfg.sweep.inner;
  d.deterministic = cfg.sweep.deterministic_policy;
  return d;
}

}  // namespace

int run_train(const RunConfig& cfg, int jobs, std::ostream& log) {
  const fs::path dir = prepare_out(cfg);
  const int every = std::max(1, cfg.train.iterations / 20);
  const TrainResult res = train(cfg.train, jobs, [&](const TrainLogEntry& e, const PolicyParameters&) {
    if (e.iter % every == 0 || e.iter + 1 == cfg.train.iterations)
      log << "iter " << e.iter << " return " << e.mean_return << " cost " << e.mean_cost
          << " lambda " << e.lambda << " std " << e.policy_std << "\n";
  });
  const fs::path ckpt = cfg.checkpoint_path();
  if (ckpt.has_parent_path()) fs::create_directories(ckpt.parent_path());
  save_checkpoint(ckpt, res.policy);
  write_file(dir / "train_log.csv", [&](std::ostream& os) { write_train_log_csv(os, res.log); });
  write_echo(dir, "train", cfg);
  log << "checkpoint " << ckpt.string() << " id " << checkpoint_id(res.policy) << "\n";
  const ReducedEvaluation ev = evaluate_reduced(res.policy, cfg.train, 200,
                                                derive_seed(cfg.seed, "train_eval"), true, 0.5, jobs);
  log << "reduced-model evaluation (policy mean, " << ev.episodes << " episodes): goal reach "
      << ev.goal_reach_fraction << ", failure " << ev.failure_fraction << "\n";

  int status = kExitOk;
  for (const auto& e : res.log)
    if (e.lambda < 0.0) {
      log << "invariant violated: lambda < 0 at iteration " << e.iter << "\n";
      status = kExitFailure;
    }
  return status;
}

int run_sweep(const RunConfig& cfg_in, int jobs, std::ostream& log) {
  RunConfig cfg = cfg_in;
  cfg.io.checkpoint = cfg_in.checkpoint_path().string();
  const PolicyParameters policy = load_checkpoint(cfg.io.checkpoint);
  const fs::path dir = prepare_out(cfg);

  SweepSettings ss;
  ss.omega_n = cfg.sweep.omega_grid();
  ss.zeta = cfg.sweep.zeta_grid();
  ss.episodes = cfg.sweep.episodes;
  ss.seed = cfg.sweep_seed();
  ss.sampler = cfg.train.sampler;
  TransferReport rep = sweep(policy, ss, deploy_from(cfg), jobs);
  rep.checkpoint_id = checkpoint_id(policy);
  rep.anomalies = find_dominance_anomalies(rep);

  write_file(dir / "sweep.csv", [&](std::ostream& os) { write_sweep_csv(os, rep); });
  write_file(dir / "episodes.csv", [&](std::ostream& os) { write_episode_csv(os, rep); });
  for (const char* metric : {"p_fail", "mean_err", "mean_ref_var", "sat_freq"})
    write_file(dir / ("heatmap_" + std::string(metric) + ".csv"),
               [&](std::ostream& os) { write_heatmap_csv(os, rep, metric); });
  write_file(dir / "anomalies.txt", [&](std::ostream& os) {
    for (const auto& a : rep.anomalies) os << a << "\n";
  });
  write_echo(dir, "sweep", cfg,
             "# checkpoint_id = " + rep.checkpoint_id + "\n# sweep_seed = " +
                 std::to_string(ss.seed) + "\n");
  log << "sweep: " << rep.cells.size() << " gain pairs x " << ss.episodes << " episodes, "
      << rep.anomalies.size() << " dominance anomalies\n";

  try {
    verify_report(rep);
  } catch (const std::logic_error& e) {
    log << "invariant violated: " << e.what() << "\n";
    return kExitFailure;
  }
  return kExitOk;
}

int run_certify(const RunConfig& cfg_in, int jobs, std::ostream& log) {
  RunConfig cfg = cfg_in;
  if (!(cfg.certify.noise_sigma > 0.0))
    throw DegenerateKernelError(
        "certify: [certify] noise_sigma must be > 0. With a noise-free plant the transition "
        "kernel is a point mass, so the total-variation Lipschitz constant is unbounded and "
        "no certificate exists.");
  cfg.io.checkpoint = cfg_in.checkpoint_path().string();
  const PolicyParameters policy = load_checkpoint(cfg.io.checkpoint);
  const fs::path dir = prepare_out(cfg);

  DeployConfig d = deploy_from(cfg);
  d.plant.noise_sigma = cfg.certify.noise_sigma;
  CertifySettings cs;
  cs.fit_episodes = cfg.certify.fit_episodes;
  cs.eval_episodes = cfg.certify.eval_episodes;
  cs.seed = cfg.certify_seed();
  cs.delta = cfg.certify.delta;
  cs.grid_step = cfg.certify.alpha_grid_step;
  cs.norm.rate_weight = cfg.certify.rate_weight;
  cs.sampler = cfg.train.sampler;
  const GainSpec gains(cfg.certify.omega_n, cfg.certify.zeta, d.plant.inertia);
  CertifyReport rep = certify(policy, gains, d, cs, cfg.train.bounds, jobs);
  rep.checkpoint_id = checkpoint_id(policy);

  write_file(dir / "certificate.txt", [&](std::ostream& os) { write_certificate_report(os, rep); });
  write_echo(dir, "certify", cfg, "# checkpoint_id = " + rep.checkpoint_id + "\n");
  std::ostringstream summary;
  write_certificate_report(summary, rep);
  log << summary.str();
  return kExitOk;
}

int run_oracle(const OracleOptions& opts, std::ostream& out) {
  if (opts.seed_end < opts.seed_begin) throw DomainError("oracle: empty seed range");
  int failures = 0;
  auto record = [&](const char* label, const FiniteMdpPair& pair, std::uint64_t seed) {
    OracleResult r = run_oracle(pair, opts.tolerance, opts.mutant);
    r.seed = seed;
    out << label << ' ';
    write_oracle_line(out, r);
    if (!r.ok()) ++failures;
  };
  for (std::uint64_t s = opts.seed_begin; s <= opts.seed_end; ++s)
    record("random", random_mdp_pair(s, opts.num_states, opts.num_actions, opts.horizon), s);
  record("identical", identical_mdp_pair(opts.seed_begin, opts.num_states, opts.num_actions,
                                         opts.horizon),
         opts.seed_begin);
  record("two_state", two_state_pair(0.1, 3), 0);
  out << (failures == 0 ? "oracle: all checks passed\n"
                        : "oracle: " + std::to_string(failures) + " instance(s) failed\n");
  return failures == 0 ? kExitOk : kExitFailure;
}

}  // namespace cascade
