#include <algorithm>
#include <cmath>
#include <fstream>
#include <system_error>

#include <fmt/format.h>

#include "leowb/sim_harness.hpp"

namespace leowb {

using nlohmann::json;

void write_text_atomic(const std::filesystem::path& path, const std::string& content) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot open '" + tmp.string() + "' for writing");
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    out.flush();
    if (!out) {
      std::error_code ec;
      std::filesystem::remove(tmp, ec);
      throw Error("failed writing '" + tmp.string() + "'");
    }
  }
  std::filesystem::rename(tmp, path);
}

std::string ecdf_csv(std::span<const EcdfPoint> points) {
  std::string s = "value,cdf\n";
  for (const auto& p : points) s += fmt::format("{:.12g},{:.12g}\n", p.value, p.probability);
  return s;
}

std::string comparison_csv(const ComparisonTable& table) {
  std::string s = "eta,savings_pct,degradation_pct\n";
  for (const auto& row : table) {
    const std::string eta = row.eta ? fmt::format("{}", *row.eta) : std::string("conventional");
    s += fmt::format("{},{:.6f},{:.6f}\n", eta, row.savings_pct, row.degradation_pct);
  }
  return s;
}

std::string complexity_csv(std::span<const CurvePoint> curve) {
  std::string s = "r,ratio\n";
  for (const auto& p : curve) s += fmt::format("{},{:.12g}\n", p.r, p.ratio);
  return s;
}

std::string trial_csv(std::span<const TrialResult> trials) {
  std::string s = "method,t,sum_rate,inversion,k_est,cost_units\n";
  for (const auto& tr : trials)
    for (const auto& r : tr.snapshots)
      s += fmt::format("{},{:.6f},{:.12g},{},{},{:.12g}\n", tr.method_label, r.t, r.sum_rate,
                       to_string(r.method), r.k_est, r.cost_units);
  return s;
}

std::string snapshot_geometry_csv(const ScenarioConfig& cfg, std::uint64_t trial_seed) {
  cfg.validate();
  const auto users = trial_users(cfg, trial_seed);
  const OrbitParams orbit = cfg.orbit_params();
  std::string s = "t,ut_index,theta_rad,phi_rad,slant_range_m,gain_dB\n";
  const int n = cfg.snapshot_count();
  for (int i = 0; i < n; ++i) {
    const double t = std::min(static_cast<double>(i) / cfg.update_rate_Hz, cfg.pass_s);
    const OrbitState st = propagate_pass(orbit, users, t);
    for (std::size_t u = 0; u < users.size(); ++u) {
      const double g = los_gain(st.slant_range[u], cfg.carrier_Hz, users[u], cfg.atmospheric_loss_dB);
      s += fmt::format("{:.6f},{},{:.12g},{:.12g},{:.6f},{:.6f}\n", t, u, st.theta[u], st.phi[u],
                       st.slant_range[u], 20.0 * std::log10(g));
    }
  }
  return s;
}

json campaign_summary_json(const CampaignResult& result) {
  json j;
  j["config"] = to_json(result.config);
  j["seed"] = result.config.seed;
  j["snapshots_per_trial"] = result.config.snapshot_count();
  j["noise_variance_W"] = result.config.noise_variance();

  json methods = json::array();
  for (const auto& m : result.methods) {
    json e;
    e["label"] = m.method.label();
    if (m.method.kind == MethodSpec::Kind::wb_arsvd) e["eta"] = m.method.eta;
    e["mean_sum_rate"] = m.mean_sum_rate;
    e["mean_trial_cost_units"] = m.mean_trial_cost;
    e["trial_mean_sum_rates"] = m.trial_mean_rates;
    e["trial_cost_units"] = m.trial_costs;
    e["inversions"] = {{"none", m.count_none},
                       {"woodbury", m.count_woodbury},
                       {"full", m.count_full},
                       {"auxiliary_fallback", m.count_fallback}};
    if (m.method.kind == MethodSpec::Kind::wb_arsvd) {
      e["rank_histogram"] = m.rank_histogram;
      e["median_k_est"] = m.median_k_est;
    }
    methods.push_back(std::move(e));
  }
  j["methods"] = std::move(methods);

  json table = json::array();
  for (const auto& row : result.table) {
    json r;
    r["label"] = row.label;
    r["eta"] = row.eta ? json(*row.eta) : json(nullptr);
    r["savings_pct"] = row.savings_pct;
    r["degradation_pct"] = row.degradation_pct;
    table.push_back(std::move(r));
  }
  j["comparison_table"] = std::move(table);
  return j;
}

void write_campaign_artifacts(const std::filesystem::path& out_dir, const CampaignResult& result) {
  std::filesystem::create_directories(out_dir);
  for (const auto& m : result.methods) {
    const std::string label = m.method.label();
    write_text_atomic(out_dir / ("ecdf_" + label + ".csv"), ecdf_csv(ecdf(m.snapshot_rates)));
    write_text_atomic(out_dir / ("ecdf_trialmean_" + label + ".csv"), ecdf_csv(ecdf(m.trial_mean_rates)));
  }
  write_text_atomic(out_dir / "comparison_table.csv", comparison_csv(result.table));
  write_text_atomic(out_dir / "complexity_curve.csv", complexity_csv(complexity_curve(std::max(result.config.K, 2))));
  write_text_atomic(out_dir / "summary.json", campaign_summary_json(result).dump(2) + "\n");
}

}  // namespace leowb
