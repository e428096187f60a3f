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


// Acceptance report: one PASS/FAIL line per criterion. Trains (or reuses a
// cached run whose resolved config matches), sweeps, certifies, and runs the
// analytic checks. Exits 0 once every criterion has been evaluated; with
// --strict, exits 1 if any criterion failed.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <numbers>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "cascade/bounds.hpp"
#include "cascade/commands.hpp"
#include "cascade/config.hpp"
#include "cascade/errors.hpp"
#include "cascade/mdp_oracle.hpp"
#include "cascade/parallel.hpp"
#include "cascade/quadrotor.hpp"
#include "support/gradcheck.hpp"

namespace fs = std::filesystem;
using namespace cascade;

namespace {

struct Verdict {
  bool pass = false;
  std::string detail;
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw IoError("cannot read '" + p.string() + "'");
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

std::vector<std::map<std::string, double>> read_csv(const fs::path& p) {
  std::istringstream in(slurp(p));
  std::string line;
  std::getline(in, line);
  std::vector<std::string> cols;
  {
    std::istringstream h(line);
    for (std::string c; std::getline(h, c, ',');) cols.push_back(c);
  }
  std::vector<std::map<std::string, double>> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream r(line);
    std::map<std::string, double> row;
    std::size_t i = 0;
    for (std::string v; std::getline(r, v, ',') && i < cols.size(); ++i)
      row[cols[i]] = std::stod(v);
    rows.push_back(std::move(row));
  }
  return rows;
}

std::string fmt(double v, int prec = 4) {
  std::ostringstream os;
  os.precision(prec);
  os << v;
  return os.str();
}

bool near(double a, double b) { return std::abs(a - b) < 1e-9; }

// ---------------------------------------------------------------- pipeline

struct Pipeline {
  RunConfig cfg;
  fs::path run_dir;
  int jobs = 1;

  void ensure_trained(bool retrain, std::ostream& log) {
    const fs::path echo = run_dir / "train.resolved.ini";
    const bool cached = !retrain && fs::exists(echo) && fs::exists(cfg.checkpoint_path()) &&
                        fs::exists(run_dir / "train_log.csv") &&
                        config_to_string(load_config(echo)) == config_to_string(cfg);
    if (cached) {
      log << "reusing trained policy in " << run_dir.string() << "\n";
      return;
    }
    log << "training (" << cfg.train.iterations << " iterations)\n";
    if (run_train(cfg, jobs, log) != kExitOk) log << "training reported a violated invariant\n";
  }
};

using Cells = std::vector<std::map<std::string, double>>;

double cell(const Cells& cells, double w, double z, const char* key) {
  for (const auto& c : cells)
    if (near(c.at("omega_n"), w) && near(c.at("zeta"), z)) return c.at(key);
  throw std::out_of_range("no cell (" + fmt(w) + "," + fmt(z) + ")");
}

Verdict criterion1(const Cells& cells) {
  double outside_max = 0.0, corner_max = 0.0, global_max = 0.0;
  int outside_nonzero = 0;
  std::string worst;
  for (const auto& c : cells) {
    const double w = c.at("omega_n"), z = c.at("zeta"), p = c.at("p_fail");
    global_max = std::max(global_max, p);
    if (w >= 6.0 - 1e-9 || z >= 0.7 - 1e-9) {
      if (p > 0.0) {
        ++outside_nonzero;
        if (p > outside_max) worst = "(" + fmt(w) + "," + fmt(z) + ")";
      }
      outside_max = std::max(outside_max, p);
    }
    if (w <= 5.0 + 1e-9 && z <= 0.6 + 1e-9) corner_max = std::max(corner_max, p);
  }
  Verdict v;
  v.pass = outside_nonzero == 0 && corner_max > 0.0 && corner_max == global_max;
  v.detail = "cells with p_fail>0 where wn>=6 or zeta>=0.7: " + std::to_string(outside_nonzero) +
             (outside_nonzero ? " (max " + fmt(outside_max) + " at " + worst + ")" : "") +
             "; corner max " + fmt(corner_max) + ", global max " + fmt(global_max);
  return v;
}

Verdict criterion2(const Cells& cells) {
  std::vector<double> W, Z;
  for (const auto& c : cells) {
    if (std::none_of(W.begin(), W.end(), [&](double w) { return near(w, c.at("omega_n")); }))
      W.push_back(c.at("omega_n"));
    if (std::none_of(Z.begin(), Z.end(), [&](double z) { return near(z, c.at("zeta")); }))
      Z.push_back(c.at("zeta"));
  }
  std::sort(W.begin(), W.end());
  std::sort(Z.begin(), Z.end());
  int pairs = 0, ok = 0;
  for (double w : W)
    for (std::size_t i = 0; i + 1 < Z.size(); ++i, ++pairs)
      ok += cell(cells, w, Z[i + 1], "mean_err") <= cell(cells, w, Z[i], "mean_err");
  for (double z : Z)
    for (std::size_t i = 0; i + 1 < W.size(); ++i, ++pairs)
      ok += cell(cells, W[i + 1], z, "mean_err") <= cell(cells, W[i], z, "mean_err");
  const double weak = cell(cells, 2.0, 0.2, "mean_err");
  const double strong = cell(cells, 12.0, 1.0, "mean_err");
  const double frac = pairs ? static_cast<double>(ok) / pairs : 0.0;
  Verdict v;
  v.pass = weak > strong && frac >= 0.9;
  v.detail = "e(2,0.2)=" + fmt(weak) + " e(12,1)=" + fmt(strong) + "; non-increasing pairs " +
             std::to_string(ok) + "/" + std::to_string(pairs) + " = " + fmt(frac, 3) +
             " (need >= 0.9)";
  return v;
}

Verdict criterion3(const fs::path& log_csv, double delta, double lambda0) {
  const Cells log = read_csv(log_csv);
  Verdict v;
  if (log.empty()) {
    v.detail = "empty training log";
    return v;
  }
  double min_lambda = lambda0;
  for (const auto& r : log) min_lambda = std::min(min_lambda, r.at("lambda"));
  const double final_cost = log.back().at("mean_cost");
  v.pass = final_cost <= delta && min_lambda >= 0.0;
  v.detail = "final batch cost " + fmt(final_cost) + " (delta " + fmt(delta) + "), min lambda " +
             fmt(min_lambda) + " over " + std::to_string(log.size()) + " iterations";
  return v;
}

// ------------------------------------------------------------ analytic checks

Verdict criterion4() {
  int instances = 0, violations = 0;
  for (std::uint64_t seed = 0; seed < 20; ++seed, ++instances) {
    const OracleResult r = run_oracle(random_mdp_pair(seed, 3, 2, 4), 1e-12);
    for (const auto& c : r.checks)
      if (!c.ok) ++violations;
  }
  // The harness must be able to fail.
  int mutant_caught = 0;
  for (std::uint64_t seed = 0; seed < 20; ++seed)
    mutant_caught += run_oracle(random_mdp_pair(seed), 1e-12, true).ok() ? 0 : 1;
  Verdict v;
  v.pass = violations == 0 && mutant_caught == 20;
  v.detail = std::to_string(instances) + " random pairs, " + std::to_string(violations) +
             " violations at tol 1e-12; mutant caught on " + std::to_string(mutant_caught) + "/20";
  return v;
}

Verdict criterion5() {
  Rng rng(20260101, "acceptance_bounds");
  int bad = 0;
  double worst = -1e300;
  for (int rep = 0; rep < 100; ++rep) {
    std::vector<double> d(static_cast<std::size_t>(rng.integer(1, 300)));
    for (double& x : d) x = rng.uniform(0.0, 0.1);
    const IssEstimate iss = IssEstimate::make(rng.uniform(0.01, 0.99), rng.uniform(0.0, 3.0),
                                              rng.uniform(0.0, 1.0), d, rng.uniform(0.0, 10.0));
    double sum = 0.0;
    for (int t = 0; t < static_cast<int>(d.size()); ++t) sum += transient_bound(iss, t);
    const double rhs = safety_bound(iss, 0.025).transfer_term;
    worst = std::max(worst, sum - rhs);
    if (sum > rhs + 1e-12) ++bad;
  }
  // Monotonicity: the bound falls as delta, L, e0, beta, D or alpha grow.
  const IssEstimate base = IssEstimate::make(0.6, 0.8, 0.1, {0.05, 0.02, 0.01}, 0.5);
  const double b0 = safety_bound(base, 0.025).bound;
  int mono_fail = 0;
  const std::vector<std::function<void(IssEstimate&)>> edits = {
      [](IssEstimate& s) { s.L *= 2; },      [](IssEstimate& s) { s.e0 += 0.1; },
      [](IssEstimate& s) { s.beta += 0.1; }, [](IssEstimate& s) { s.D += 0.1; },
      [](IssEstimate& s) { s.alpha = 0.9; }};
  for (const auto& edit : edits) {
    IssEstimate s = base;
    edit(s);
    if (!(safety_bound(s, 0.025).bound < b0)) ++mono_fail;
  }
  if (!(safety_bound(base, 0.05).bound < b0)) ++mono_fail;
  if (!safety_bound(base, 1.0).vacuous) ++mono_fail;
  Verdict v;
  v.pass = bad == 0 && mono_fail == 0;
  v.detail = "100 random estimates, " + std::to_string(bad) +
             " majorization violations (max lhs-rhs " + fmt(worst) + "); " +
             std::to_string(mono_fail) + " monotonicity failures";
  return v;
}

Verdict criterion6() {
  double worst_actor = 0.0, worst_critic = 0.0;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto point = testing::random_grad_point(seed, 16, 0.05);
    const auto r = testing::check_gradients(point, 0.05, 1e-6);
    worst_actor = std::max(worst_actor, r.actor_rel_error);
    worst_critic = std::max(worst_critic, r.critic_rel_error);
  }
  Verdict v;
  v.pass = worst_actor < 1e-5 && worst_critic < 1e-5;
  v.detail = "10 points, max relative error actor " + fmt(worst_actor, 3) + ", critic " +
             fmt(worst_critic, 3) + " (need < 1e-5)";
  return v;
}

Verdict criterion7() {
  const QuadParams p;
  double dev = 0.0;
  auto track = [&](double got, double want) { dev = std::max(dev, std::abs(got - want)); };
  const FullState zero{};
  const FullState hover = full_step(zero, 9.81, 0.0, p, nullptr);
  track(hover.outer.p_x, 0); track(hover.outer.v_x, 0); track(hover.outer.p_z, 0);
  track(hover.outer.v_z, 0); track(hover.inner.theta, 0); track(hover.inner.theta_dot, 0);
  const FullState kick = full_step(zero, 9.81, 0.02, p, nullptr);
  track(kick.inner.theta_dot, 0.05); track(kick.inner.theta, 0.0025);
  track(kick.outer.v_z, 0.0); track(kick.outer.p_z, 0.0);
  const FullState fall = full_step(zero, 0.0, 0.0, p, nullptr);
  track(fall.outer.v_z, -0.4905); track(fall.outer.p_z, -0.024525);
  const OuterState side = reduced_step({}, {0.0, std::numbers::pi / 2}, p, nullptr);
  track(side.v_x, 0.4905); track(side.p_x, 0.024525);
  track(side.v_z, -0.4905); track(side.p_z, -0.024525);

  const QuadrotorPlant plant(p);
  const PropertyReport cascade = check_cascade_property(plant, 1000, 7);
  QuadParams noisy = p;
  noisy.noise_sigma = 0.1;
  const PropertyReport match = check_outer_matching(p, 1000, 8);
  const PropertyReport match_noisy = check_outer_matching(noisy, 1000, 9);
  Verdict v;
  v.pass = dev <= 1e-12 && cascade.ok() && match.ok() && match_noisy.ok();
  v.detail = "hand values max deviation " + fmt(dev, 3) + "; cascade property " +
             std::to_string(cascade.violations.size()) + " violations / " +
             std::to_string(cascade.samples) + "; outer matching " +
             std::to_string(match.violations.size() + match_noisy.violations.size()) +
             " violations / " + std::to_string(match.samples + match_noisy.samples) +
             " (max dev " + fmt(std::max(match.max_deviation, match_noisy.max_deviation), 3) + ")";
  return v;
}

Verdict criterion8() {
  Rng rng(88, "acceptance_iss");
  std::vector<double> e{0.37}, d;
  for (int k = 0; k < 299; ++k) {
    d.push_back(rng.uniform(1e-3, 0.05));
    e.push_back(0.8 * e.back() + 0.5 * d.back());
  }
  const double b = beta_at(e, d, 0.8);
  const IssFit fit = fit_iss(e, d, 1e-3);
  int violated = 0;
  for (std::size_t k = 0; k < d.size(); ++k)
    if (e[k + 1] > fit.alpha * e[k] + fit.beta * d[k]) ++violated;
  Verdict v;
  v.pass = std::abs(b - 0.5) <= 1e-6 && violated == 0 && fit.alpha > 0 && fit.alpha < 1;
  v.detail = "beta(0.8) = " + fmt(b, 12) + "; fitted (alpha, beta) = (" + fmt(fit.alpha) + ", " +
             fmt(fit.beta) + "), " + std::to_string(violated) + " violated constraints";
  return v;
}

// ---------------------------------------------------------------- determinism

std::vector<std::string> diff_outputs(const fs::path& a, const fs::path& b,
                                      const std::vector<std::string>& files) {
  std::vector<std::string> out;
  for (const auto& f : files)
    if (slurp(a / f) != slurp(b / f)) out.push_back(f);
  return out;
}

Verdict criterion9(const Pipeline& pl, const fs::path& work, std::ostream& log) {
  std::ostringstream quiet;
  std::vector<std::string> mismatches;
  const int many = std::max(2, pl.jobs);

  // Train: a short run, once per job count and once more from its own echo.
  RunConfig small = pl.cfg;
  small.train.iterations = 3;
  small.train.episodes_per_iteration = 4;
  const fs::path t1 = work / "det_train_1", t2 = work / "det_train_n", t3 = work / "det_train_echo";
  small.io = {t1.string(), ""};
  run_train(small, 1, quiet);
  small.io = {t2.string(), ""};
  run_train(small, many, quiet);
  RunConfig echo = load_config(t1 / "train.resolved.ini");
  echo.io = {t3.string(), ""};
  echo.finalize();
  run_train(echo, many, quiet);
  for (const auto& dir : {t2, t3})
    for (const auto& f : diff_outputs(t1, dir, {"train_log.csv", "policy.ckpt"}))
      mismatches.push_back("train " + f);

  // Sweep and certify on the trained policy.
  const std::vector<std::string> sweep_files = {
      "sweep.csv", "episodes.csv", "heatmap_p_fail.csv", "heatmap_mean_err.csv",
      "heatmap_mean_ref_var.csv", "heatmap_sat_freq.csv", "anomalies.txt"};
  const fs::path s1 = work / "det_sweep_1", s2 = work / "det_sweep_echo";
  RunConfig sc = pl.cfg;
  sc.io = {s1.string(), pl.cfg.checkpoint_path().string()};
  run_sweep(sc, 1, quiet);
  RunConfig se = load_config(s1 / "sweep.resolved.ini");
  se.io.out_dir = s2.string();
  se.finalize();
  run_sweep(se, many, quiet);
  for (const auto& f : diff_outputs(s1, s2, sweep_files)) mismatches.push_back("sweep " + f);
  for (const auto& f : diff_outputs(s1, pl.run_dir, sweep_files))
    mismatches.push_back("sweep (main run) " + f);

  const fs::path c1 = work / "det_certify_1", c2 = work / "det_certify_echo";
  sc.io.out_dir = c1.string();
  run_certify(sc, 1, quiet);
  RunConfig ce = load_config(c1 / "certify.resolved.ini");
  ce.io.out_dir = c2.string();
  ce.finalize();
  run_certify(ce, many, quiet);
  for (const auto& f : diff_outputs(c1, c2, {"certificate.txt"}))
    mismatches.push_back("certify " + f);
  for (const auto& f : diff_outputs(c1, pl.run_dir, {"certificate.txt"}))
    mismatches.push_back("certify (main run) " + f);

  log << quiet.str().size() << " bytes of determinism-run logs suppressed\n";
  Verdict v;
  v.pass = mismatches.empty();
  v.detail = "train/sweep/certify re-run from resolved echo with --jobs 1 vs " +
             std::to_string(many) + ": " +
             (mismatches.empty() ? std::string("all outputs byte-identical")
                                 : std::to_string(mismatches.size()) + " differ (" +
                                       mismatches.front() + ", ...)");
  return v;
}

Verdict criterion10(const fs::path& report) {
  std::map<std::string, std::string> kv;
  std::istringstream in(slurp(report));
  for (std::string line; std::getline(in, line);) {
    const auto eq = line.find(" = ");
    if (eq != std::string::npos) kv[line.substr(0, eq)] = line.substr(eq + 3);
  }
  Verdict v;
  auto get = [&](const char* k) { return kv.count(k) ? kv[k] : std::string("?"); };
  if (get("bound") == "withheld") {
    v.detail = "ISS fit failed: " + get("fit_error");
    return v;
  }
  const bool vacuous = get("vacuous") == "true";
  const double bound = std::stod(get("bound"));
  const double emp = std::stod(get("safe_probability"));
  v.pass = !vacuous && emp >= bound && std::stoi(get("eval_episodes")) >= 500;
  v.detail = "sigma " + get("noise_sigma") + ", gains (" + get("omega_n") + "," + get("zeta") +
             "): certificate " + fmt(bound) + (vacuous ? " (vacuous)" : "") + " = 1 - " +
             get("delta") + " - " + fmt(std::stod(get("transfer_term"))) + " with L " +
             fmt(std::stod(get("L"))) + ", alpha " + fmt(std::stod(get("alpha"))) + ", beta " +
             fmt(std::stod(get("beta"))) + ", e0 " + fmt(std::stod(get("e0"))) + ", D " +
             fmt(std::stod(get("D"))) + "; empirical safe " + fmt(emp) + " over " +
             get("eval_episodes") + " episodes";
  return v;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Acceptance report"};
  std::string work = "acceptance_work";
  std::string config;
  bool retrain = false, strict = false;
  int jobs = default_jobs();
  app.add_option("--work", work, "Working directory for artifacts (cached between runs)");
  app.add_option("--config", config, "Run configuration (default: built-in defaults)");
  app.add_option("--jobs", jobs, "Worker threads")->check(CLI::PositiveNumber);
  app.add_flag("--retrain", retrain, "Ignore a cached training run");
  app.add_flag("--strict", strict, "Exit 1 if any criterion fails");
  CLI11_PARSE(app, argc, argv);

  try {
    Pipeline pl;
    pl.cfg = config.empty() ? RunConfig{} : load_config(config);
    pl.run_dir = fs::path(work) / "run";
    pl.cfg.io = {pl.run_dir.string(), ""};
    pl.cfg.finalize();
    pl.jobs = jobs;

    std::vector<std::pair<std::string, std::function<Verdict()>>> criteria;
    std::ostringstream log;
    Cells cells;
    bool have_run = false;
    auto with_run = [&](auto fn) {
      return [&, fn]() -> Verdict {
        if (!have_run) return {false, "pipeline did not complete"};
        return fn();
      };
    };

    const auto t0 = std::chrono::steady_clock::now();
    try {
      pl.ensure_trained(retrain, std::cerr);
      const auto t1 = std::chrono::steady_clock::now();
      run_sweep(pl.cfg, jobs, std::cerr);
      const auto t2 = std::chrono::steady_clock::now();
      run_certify(pl.cfg, jobs, std::cerr);
      cells = read_csv(pl.run_dir / "sweep.csv");
      have_run = true;
      std::cerr << "timing: train/cache " << std::chrono::duration<double>(t1 - t0).count()
                << " s, sweep " << std::chrono::duration<double>(t2 - t1).count() << " s\n";
    } catch (const std::exception& e) {
      std::cerr << "pipeline failed: " << e.what() << "\n";
    }

    criteria.emplace_back("reduced-trained policy fails only at weak inner-loop gains",
                          with_run([&] { return criterion1(cells); }));
    criteria.emplace_back("tracking error shrinks with inner-loop gains",
                          with_run([&] { return criterion2(cells); }));
    criteria.emplace_back("training meets the cost constraint with lambda >= 0",
                          with_run([&] {
                            return criterion3(pl.run_dir / "train_log.csv", pl.cfg.train.delta,
                                              pl.cfg.train.lambda0);
                          }));
    criteria.emplace_back("finite-MDP divergence, event-gap and union bounds", criterion4);
    criteria.emplace_back("geometric majorization and certificate monotonicity", criterion5);
    criteria.emplace_back("analytic gradients match central differences", criterion6);
    criteria.emplace_back("integrator hand values and model-structure properties", criterion7);
    criteria.emplace_back("ISS fit on synthetic equality data", criterion8);
    criteria.emplace_back("byte-identical outputs across re-runs and job counts",
                          with_run([&] { return criterion9(pl, work, std::cerr); }));
    criteria.emplace_back("end-to-end certificate at strong gains",
                          with_run([&] { return criterion10(pl.run_dir / "certificate.txt"); }));

    int failed = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
      Verdict v;
      try {
        v = criteria[i].second();
      } catch (const std::exception& e) {
        v = {false, std::string("error: ") + e.what()};
      }
      failed += v.pass ? 0 : 1;
      std::cout << "criterion " << (i + 1) << ": " << (v.pass ? "PASS" : "FAIL") << "  "
                << criteria[i].first << "  [" << v.detail << "]" << std::endl;
    }
    std::cout << "acceptance: " << (criteria.size() - failed) << "/" << criteria.size()
              << " criteria passed" << std::endl;
    return strict && failed > 0 ? 1 : 0;
  } catch (const std::exception& e) {
    std::cerr << "acceptance: " << e.what() << "\n";
    return 2;
  }
}
