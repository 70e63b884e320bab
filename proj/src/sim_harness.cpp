#include "leowb/sim_harness.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <mutex>
#include <thread>

#include <fmt/format.h>

#include "leowb/channel_model.hpp"
#include "leowb/precoding.hpp"
#include "leowb/random.hpp"

namespace leowb {

std::string MethodSpec::label() const {
  if (kind == Kind::conventional) return "conventional";
  return fmt::format("wb_arsvd_eta{}", eta);
}

std::vector<UserTerminal> trial_users(const ScenarioConfig& cfg, std::uint64_t trial_seed) {
  RandomSource rng(derive_seed(trial_seed, "users"));
  const auto positions =
      place_users_uniform_disk(cfg.orbit_params().centroid, cfg.footprint_radius_m, cfg.K, rng);
  std::vector<UserTerminal> users;
  users.reserve(positions.size());
  for (const auto& p : positions) {
    UserTerminal ut;
    ut.position = p;
    ut.antenna_gain_dBi = cfg.ut_gain_dBi;
    ut.rician_K_dB = cfg.rician_K_dB();
    ut.noise_variance = cfg.noise_variance();
    users.push_back(ut);
  }
  return users;
}

namespace {

// Per-method inverse-maintenance state within one trial.
struct MethodRunner {
  MethodSpec spec;
  ArSvdConfig arsvd_cfg;
  UpdatePolicy policy;
  RandomSource rng;
  std::optional<GramState> state;
  TrialResult result;

  MethodRunner(const ScenarioConfig& cfg, const MethodSpec& m, std::uint64_t trial_seed)
      : spec(m),
        arsvd_cfg(cfg.arsvd_config(m.kind == MethodSpec::Kind::wb_arsvd ? m.eta : 1.0)),
        policy(cfg.update_policy()),
        rng(derive_seed(trial_seed, m.label())) {
    result.method_label = m.label();
  }

  void step(const ChannelSnapshot& snap, const ComplexMatrix* prev_H_eff, double alpha, double P_t,
            std::span<const double> noise) {
    SnapshotRecord rec;
    rec.t = snap.timestamp_s;
    const int K = static_cast<int>(snap.H_eff.rows());

    if (spec.kind == MethodSpec::Kind::conventional || !state || prev_H_eff == nullptr) {
      state = gram_matrix(snap.H_eff, alpha);
      rec.method = UpdateMethod::full;
      rec.cost_units = cost_full(K);
    } else {
      const ComplexMatrix dH = snap.H_eff - *prev_H_eff;
      UpdateResult up = update_inverse(*state, *prev_H_eff, dH, arsvd_cfg, rng, policy);
      state = std::move(up.state);
      rec.method = up.report.method;
      rec.k_est = up.report.k_est;
      rec.cost_units = up.report.cost_units;
      rec.auxiliary_fallback = up.report.auxiliary_fallback;
    }

    const Precoder pre = rzf_precoder_rf_gram(snap.H_eff, state->A_inv, snap.rf_gram, P_t);
    rec.sum_rate = sum_rate_hybrid(snap.H_hybrid, pre, noise).sum_rate;
    result.total_cost_units += rec.cost_units;
    result.snapshots.push_back(rec);
  }
};

}  // namespace

std::vector<TrialResult> run_trial_methods(const ScenarioConfig& cfg,
                                           std::span<const MethodSpec> methods,
                                           std::uint64_t trial_seed) {
  cfg.validate();
  const int n_snap = cfg.snapshot_count();
  const double dt = 1.0 / cfg.update_rate_Hz;

  std::vector<UserTerminal> users = trial_users(cfg, trial_seed);
  const std::vector<double> noise(users.size(), cfg.noise_variance());
  ChannelProcess channel(cfg.orbit_params(), cfg.link_params(), users);
  RandomSource channel_rng(derive_seed(trial_seed, "channel"));

  std::vector<MethodRunner> runners;
  runners.reserve(methods.size());
  for (const auto& m : methods) {
    runners.emplace_back(cfg, m, trial_seed);
    runners.back().result.snapshots.reserve(static_cast<std::size_t>(n_snap));
  }

  double alpha = 0.0;
  ComplexMatrix prev_H_eff;
  for (int i = 0; i < n_snap; ++i) {
    // i / rate rather than accumulated dt keeps the final sample on the grid
    const double t = std::min(static_cast<double>(i) * dt, cfg.pass_s);
    const ChannelSnapshot snap = channel.next(t, channel_rng);
    if (i == 0) alpha = cfg.alpha ? *cfg.alpha : default_regularization(noise, snap.gamma, cfg.P_t_W);
    for (auto& r : runners) r.step(snap, i == 0 ? nullptr : &prev_H_eff, alpha, cfg.P_t_W, noise);
    prev_H_eff = snap.H_eff;
  }

  std::vector<TrialResult> out;
  out.reserve(runners.size());
  for (auto& r : runners) {
    double acc = 0.0;
    for (const auto& s : r.result.snapshots) acc += s.sum_rate;
    r.result.mean_sum_rate = acc / static_cast<double>(r.result.snapshots.size());
    out.push_back(std::move(r.result));
  }
  return out;
}

TrialResult run_trial(const ScenarioConfig& cfg, const MethodSpec& method, std::uint64_t trial_seed) {
  return run_trial_methods(cfg, std::span<const MethodSpec>(&method, 1), trial_seed).front();
}

std::vector<EcdfPoint> ecdf(std::span<const double> samples) {
  if (samples.empty()) throw EmptyInput("ecdf: empty sample");
  std::vector<double> v(samples.begin(), samples.end());
  std::sort(v.begin(), v.end());
  const double n = static_cast<double>(v.size());
  std::vector<EcdfPoint> out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i + 1 < v.size() && v[i + 1] == v[i]) continue;
    out.push_back({v[i], static_cast<double>(i + 1) / n});
  }
  return out;
}

std::vector<CurvePoint> complexity_curve(int K) {
  if (K < 2) throw InvalidArgument("complexity_curve: K must be >= 2");
  std::vector<CurvePoint> out;
  out.reserve(static_cast<std::size_t>(K));
  const double full = cost_full(K);
  for (int r = 1; r <= K; ++r) out.push_back({r, cost_wb_arsvd(K, r) / full});
  return out;
}

std::vector<MethodSpec> campaign_methods(const ScenarioConfig& cfg) {
  std::vector<double> etas = cfg.eta_list;
  std::sort(etas.begin(), etas.end(), std::greater<>());
  etas.erase(std::unique(etas.begin(), etas.end()), etas.end());
  std::vector<MethodSpec> out{MethodSpec::conventional()};
  for (double e : etas) out.push_back(MethodSpec::wb_arsvd(e));
  return out;
}

ComparisonTable compare(std::span<const MethodSummary> methods) {
  const auto conv = std::find_if(methods.begin(), methods.end(), [](const MethodSummary& m) {
    return m.method.kind == MethodSpec::Kind::conventional;
  });
  if (conv == methods.end()) throw InvalidArgument("compare: no conventional baseline");

  ComparisonTable table;
  table.push_back({conv->method.label(), std::nullopt, 0.0, 0.0});
  std::vector<const MethodSummary*> rows;
  for (const auto& m : methods)
    if (m.method.kind == MethodSpec::Kind::wb_arsvd) rows.push_back(&m);
  std::stable_sort(rows.begin(), rows.end(),
                   [](const MethodSummary* a, const MethodSummary* b) { return a->method.eta > b->method.eta; });
  for (const auto* m : rows) {
    ComparisonRow row;
    row.label = m->method.label();
    row.eta = m->method.eta;
    row.savings_pct = 100.0 * (1.0 - m->mean_trial_cost / conv->mean_trial_cost);
    row.degradation_pct = 100.0 * (1.0 - m->mean_sum_rate / conv->mean_sum_rate);
    table.push_back(row);
  }
  return table;
}

namespace {

double median_of(std::vector<double> v) {
  if (v.empty()) return 0.0;
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

}  // namespace

CampaignResult run_campaign(const ScenarioConfig& cfg, const CampaignOptions& opts) {
  cfg.validate();
  const std::vector<MethodSpec> methods = campaign_methods(cfg);
  const int runs = cfg.mc_runs;

  std::vector<std::vector<TrialResult>> trials(static_cast<std::size_t>(runs));
  std::atomic<int> next{0};
  std::exception_ptr failure;
  std::mutex failure_mu;
  auto worker = [&] {
    while (true) {
      const int i = next.fetch_add(1);
      if (i >= runs) return;
      try {
        trials[static_cast<std::size_t>(i)] =
            run_trial_methods(cfg, methods, derive_seed(cfg.seed, static_cast<std::uint64_t>(i)));
      } catch (...) {
        std::lock_guard lock(failure_mu);
        if (!failure) failure = std::current_exception();
        next.store(runs);
      }
    }
  };

  int threads = opts.threads > 0 ? opts.threads : static_cast<int>(std::thread::hardware_concurrency());
  threads = std::clamp(threads, 1, runs);
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  if (failure) std::rethrow_exception(failure);

  // Reduce in trial order so the result does not depend on scheduling.
  CampaignResult res;
  res.config = cfg;
  for (std::size_t mi = 0; mi < methods.size(); ++mi) {
    MethodSummary s;
    s.method = methods[mi];
    s.rank_histogram.assign(static_cast<std::size_t>(cfg.K) + 1, 0);
    std::vector<double> ranks;
    double rate_acc = 0.0, cost_acc = 0.0;
    for (const auto& trial : trials) {
      const TrialResult& tr = trial[mi];
      s.trial_mean_rates.push_back(tr.mean_sum_rate);
      s.trial_costs.push_back(tr.total_cost_units);
      cost_acc += tr.total_cost_units;
      for (const auto& rec : tr.snapshots) {
        s.snapshot_rates.push_back(rec.sum_rate);
        rate_acc += rec.sum_rate;
        switch (rec.method) {
          case UpdateMethod::none: ++s.count_none; break;
          case UpdateMethod::woodbury: ++s.count_woodbury; break;
          case UpdateMethod::full: ++s.count_full; break;
        }
        if (rec.auxiliary_fallback) ++s.count_fallback;
        if (s.method.kind == MethodSpec::Kind::wb_arsvd && (rec.k_est > 0 || rec.method == UpdateMethod::none)) {
          ++s.rank_histogram[static_cast<std::size_t>(std::clamp(rec.k_est, 0, cfg.K))];
          ranks.push_back(rec.k_est);
        }
      }
    }
    s.mean_sum_rate = rate_acc / static_cast<double>(s.snapshot_rates.size());
    s.mean_trial_cost = cost_acc / static_cast<double>(runs);
    s.median_k_est = median_of(std::move(ranks));
    res.methods.push_back(std::move(s));
  }
  res.table = compare(res.methods);
  return res;
}

}  // namespace leowb
