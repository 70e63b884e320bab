#include "cli.hpp"

#include <chrono>
#include <iostream>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <json.hpp>

#include "leowb/lowrank_inverse.hpp"
#include "leowb/random.hpp"
#include "leowb/scenario.hpp"
#include "leowb/sim_harness.hpp"

namespace leowb::cli {

namespace {

using nlohmann::json;
namespace fs = std::filesystem;

struct ConfigFlags {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::vector<std::string> sets;
  std::optional<int> runs;
  std::string eta;
  bool full_scale = false;
  std::string out_dir = "out";
  int threads = 0;
};

void add_config_flags(CLI::App* sub, ConfigFlags& f) {
  sub->add_option("--config", f.config_path, "Scenario config file (TOML subset or JSON)");
  sub->add_option("--seed", f.seed, "Master seed");
  sub->add_option("--set", f.sets, "Override KEY=VALUE (repeatable)")->allow_extra_args(false);
  sub->add_option("--runs", f.runs, "Monte Carlo runs");
  sub->add_option("--eta", f.eta, "Comma-separated eta list");
  sub->add_flag("--full-scale", f.full_scale, "Use 500 Monte Carlo runs");
  sub->add_option("--out-dir", f.out_dir, "Output directory");
  sub->add_option("--threads", f.threads, "Worker threads (0 = hardware concurrency)");
}

ScenarioConfig resolve_config(const ConfigFlags& f) {
  ScenarioConfig cfg;
  if (!f.config_path.empty()) {
    if (!fs::exists(f.config_path)) throw ConfigError("config file '" + f.config_path + "' does not exist");
    cfg = parse_config(f.config_path, f.sets);
  } else {
    for (const auto& s : f.sets) apply_override(cfg, s);
  }
  if (f.full_scale) cfg.mc_runs = 500;
  if (f.runs) cfg.mc_runs = *f.runs;
  if (f.seed) cfg.seed = *f.seed;
  if (!f.eta.empty()) apply_override(cfg, "eta_list=" + f.eta);
  cfg.validate();
  return cfg;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

int cmd_campaign(const ConfigFlags& f, std::ostream& out) {
  const ScenarioConfig cfg = resolve_config(f);
  const auto t0 = std::chrono::steady_clock::now();
  const CampaignResult res = run_campaign(cfg, CampaignOptions{f.threads});
  const double wall = seconds_since(t0);

  write_campaign_artifacts(f.out_dir, res);
  // wall clock is kept out of summary.json so that file stays reproducible
  write_text_atomic(fs::path(f.out_dir) / "timing.json",
                    json{{"wall_clock_s", wall}, {"threads", f.threads}}.dump(2) + "\n");

  out << fmt::format("{:<28} {:>12} {:>12} {:>16}\n", "method", "savings_%", "degrad_%", "mean_sum_rate");
  for (std::size_t i = 0; i < res.table.size(); ++i) {
    const auto& row = res.table[i];
    out << fmt::format("{:<28} {:>12.2f} {:>12.2f} {:>16.4f}\n", row.label, row.savings_pct,
                       row.degradation_pct, res.methods[i].mean_sum_rate);
  }
  out << fmt::format("artifacts written to {} ({:.1f} s)\n", f.out_dir, wall);
  return kExitOk;
}

int cmd_trial(const ConfigFlags& f, std::uint64_t trial_index, bool dump_geometry, std::ostream& out) {
  const ScenarioConfig cfg = resolve_config(f);
  const auto methods = campaign_methods(cfg);
  const std::uint64_t trial_seed = derive_seed(cfg.seed, trial_index);
  const auto trials = run_trial_methods(cfg, methods, trial_seed);

  fs::create_directories(f.out_dir);
  write_text_atomic(fs::path(f.out_dir) / "trial_snapshots.csv", trial_csv(trials));
  if (dump_geometry)
    write_text_atomic(fs::path(f.out_dir) / "snapshot_geometry.csv", snapshot_geometry_csv(cfg, trial_seed));

  json summary;
  summary["config"] = to_json(cfg);
  summary["trial_index"] = trial_index;
  summary["trial_seed"] = trial_seed;
  json rows = json::array();
  for (const auto& t : trials) {
    rows.push_back({{"label", t.method_label},
                    {"mean_sum_rate", t.mean_sum_rate},
                    {"total_cost_units", t.total_cost_units}});
    out << fmt::format("{:<28} mean_sum_rate={:.4f} cost_units={:.0f}\n", t.method_label,
                       t.mean_sum_rate, t.total_cost_units);
  }
  summary["methods"] = rows;
  write_text_atomic(fs::path(f.out_dir) / "trial_summary.json", summary.dump(2) + "\n");
  return kExitOk;
}

int cmd_complexity(int K, const std::string& out_dir, std::ostream& out) {
  const auto curve = complexity_curve(K);
  fs::create_directories(out_dir);
  const std::string csv = complexity_csv(curve);
  write_text_atomic(fs::path(out_dir) / "complexity_curve.csv", csv);
  int crossover = -1;
  for (const auto& p : curve)
    if (p.ratio > 1.0) {
      crossover = p.r;
      break;
    }
  out << fmt::format("K={} crossover r={} (first r with cost ratio > 1)\n", K, crossover);
  return kExitOk;
}

struct BenchFlags {
  int K = 16;
  int trials = 200;
  std::string eta = "0.65,0.8,0.9";
  int k_init = 2;
  int p = 5;
  int i_max = 6;
  double decay = 2.0;
  std::uint64_t seed = 42;
  std::string out_dir = "out";
};

// Matrix with singular values decay^-j (j = 1..K) and Haar-like random
// singular vectors.
ComplexMatrix geometric_spectrum_matrix(int K, double decay, RandomSource& rng, RealVector& sigma) {
  auto unitary = [&] {
    Eigen::HouseholderQR<ComplexMatrix> qr(rng.complex_normal_matrix(K, K));
    return ComplexMatrix(qr.householderQ());
  };
  const ComplexMatrix U = unitary(), V = unitary();
  sigma.resize(K);
  for (int j = 0; j < K; ++j) sigma(j) = std::pow(decay, -(j + 1));
  return U * sigma.cast<Complex>().asDiagonal() * V.adjoint();
}

int cmd_arsvd_bench(const BenchFlags& b, std::ostream& out) {
  ScenarioConfig parse_probe;
  apply_override(parse_probe, "eta_list=" + b.eta);
  parse_probe.validate();

  std::string csv = "eta,trials,oracle_match_rate,mean_k_est,mean_iterations,converged_rate,max_residual_over_bound\n";
  for (double eta : parse_probe.eta_list) {
    ArSvdConfig cfg{eta, b.k_init, b.p, b.i_max};
    RandomSource rng(derive_seed(b.seed, fmt::format("arsvd-bench-{}", eta)));
    int match = 0, converged = 0;
    double k_acc = 0.0, it_acc = 0.0, worst = 0.0;
    for (int t = 0; t < b.trials; ++t) {
      RealVector sigma;
      const ComplexMatrix dA = geometric_spectrum_matrix(b.K, b.decay, rng, sigma);
      // truncation rank from an independent full SVD
      const RealVector s = Eigen::JacobiSVD<ComplexMatrix>(dA).singularValues();
      const double total = s.squaredNorm();
      int oracle = 0;
      double cum = 0.0;
      while (oracle < s.size() && cum < eta * total) cum += s(oracle) * s(oracle), ++oracle;

      const ArSvdResult r = arsvd(dA, cfg, rng);
      match += r.factor.k_est() == oracle;
      converged += r.converged;
      k_acc += r.factor.k_est();
      it_acc += r.iterations;
      if (r.converged) {
        const double resid = (dA - r.factor.reconstruct()).squaredNorm();
        worst = std::max(worst, resid / ((1.0 - eta) * total));
      }
    }
    const double n = b.trials;
    csv += fmt::format("{},{},{:.6f},{:.6f},{:.6f},{:.6f},{:.6f}\n", eta, b.trials, match / n, k_acc / n,
                       it_acc / n, converged / n, worst);
    out << fmt::format("eta={:<6} match={:.3f} mean_k={:.3f} mean_iters={:.2f}\n", eta, match / n, k_acc / n,
                       it_acc / n);
  }
  fs::create_directories(b.out_dir);
  write_text_atomic(fs::path(b.out_dir) / "arsvd_bench.csv", csv);
  return kExitOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"LEO RZF precoding with Woodbury/arSVD inverse maintenance", "leowb"};
  app.require_subcommand(1);

  ConfigFlags campaign_flags, trial_flags;
  auto* campaign = app.add_subcommand("campaign", "Monte Carlo comparison campaign");
  add_config_flags(campaign, campaign_flags);

  auto* trial = app.add_subcommand("trial", "Single pass, all methods, per-snapshot output");
  add_config_flags(trial, trial_flags);
  std::uint64_t trial_index = 0;
  bool dump_geometry = false;
  trial->add_option("--trial-index", trial_index, "Trial index within the campaign seed sequence");
  trial->add_flag("--dump-snapshots", dump_geometry, "Also write snapshot_geometry.csv");

  int curve_K = 100;
  std::string curve_out = "out";
  auto* curve = app.add_subcommand("complexity-curve", "Normalized WB-arSVD / full inversion cost");
  curve->add_option("--K", curve_K, "Matrix dimension")->check(CLI::Range(2, 1 << 20));
  curve->add_option("--out-dir", curve_out, "Output directory");

  BenchFlags bench_flags;
  auto* bench = app.add_subcommand("arsvd-bench", "arSVD rank agreement with a full-SVD oracle");
  bench->add_option("--K", bench_flags.K)->check(CLI::Range(1, 4096));
  bench->add_option("--trials", bench_flags.trials)->check(CLI::Range(1, 1000000));
  bench->add_option("--eta", bench_flags.eta);
  bench->add_option("--k-init", bench_flags.k_init)->check(CLI::Range(1, 4096));
  bench->add_option("--p", bench_flags.p)->check(CLI::Range(0, 4096));
  bench->add_option("--i-max", bench_flags.i_max)->check(CLI::Range(1, 64));
  bench->add_option("--decay", bench_flags.decay);
  bench->add_option("--seed", bench_flags.seed);
  bench->add_option("--out-dir", bench_flags.out_dir);

  std::vector<std::string> argv_rev(args.rbegin(), args.rend());
  try {
    app.parse(argv_rev);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kExitConfig;
  }

  try {
    if (campaign->parsed()) return cmd_campaign(campaign_flags, out);
    if (trial->parsed()) return cmd_trial(trial_flags, trial_index, dump_geometry, out);
    if (curve->parsed()) return cmd_complexity(curve_K, curve_out, out);
    if (bench->parsed()) return cmd_arsvd_bench(bench_flags, out);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    err << "runtime error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return kExitConfig;
}

}  // namespace leowb::cli
