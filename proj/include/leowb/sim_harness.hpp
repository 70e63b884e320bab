// leowb/sim_harness.hpp
//
// Seeded Monte Carlo passes comparing conventional RZF (direct inversion at
// every precoder update) against the Woodbury/arSVD inverse maintenance at a
// list of energy thresholds.
//
// Seeding: trial i of a campaign uses trial_seed = derive_seed(seed, i). The
// user drop and the channel draws come from streams derived from trial_seed
// alone, so every method sees the same pass; each method's sketch stream is
// derived from (trial_seed, method label).

#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "leowb/lowrank_inverse.hpp"
#include "leowb/scenario.hpp"

namespace leowb {

struct MethodSpec {
  enum class Kind { conventional, wb_arsvd };
  Kind kind = Kind::conventional;
  double eta = 1.0;  ///< only meaningful for wb_arsvd

  static MethodSpec conventional() { return {}; }
  static MethodSpec wb_arsvd(double eta) { return {Kind::wb_arsvd, eta}; }

  /// "conventional" or "wb_arsvd_eta<eta>"; also used as a file-name stem.
  std::string label() const;
};

struct SnapshotRecord {
  double t = 0.0;
  double sum_rate = 0.0;
  UpdateMethod method = UpdateMethod::full;
  int k_est = 0;  ///< arSVD rank; 0 for direct inversions that ran no sketch
  double cost_units = 0.0;
  bool auxiliary_fallback = false;
};

struct TrialResult {
  std::string method_label;
  std::vector<SnapshotRecord> snapshots;
  double mean_sum_rate = 0.0;
  double total_cost_units = 0.0;
};

/// UT drop for a trial (uniform over the footprint disk).
std::vector<UserTerminal> trial_users(const ScenarioConfig& cfg, std::uint64_t trial_seed);

/// Runs the pass once and steps every method in lockstep on the same channel.
/// Results are identical to running each method on its own with run_trial.
std::vector<TrialResult> run_trial_methods(const ScenarioConfig& cfg,
                                           std::span<const MethodSpec> methods,
                                           std::uint64_t trial_seed);

TrialResult run_trial(const ScenarioConfig& cfg, const MethodSpec& method, std::uint64_t trial_seed);

struct EcdfPoint {
  double value = 0.0;
  double probability = 0.0;
};

/// Step ECDF with duplicates collapsed: F(x_i) = (#samples <= x_i) / n.
/// Throws EmptyInput for an empty sample.
std::vector<EcdfPoint> ecdf(std::span<const double> samples);

struct CurvePoint {
  int r = 0;
  double ratio = 0.0;
};

/// cost_wb_arsvd(K, r) / cost_full(K) for r = 1..K. Requires K >= 2.
std::vector<CurvePoint> complexity_curve(int K);

struct ComparisonRow {
  std::string label;
  std::optional<double> eta;  ///< empty for the conventional row
  double savings_pct = 0.0;
  double degradation_pct = 0.0;
};

/// Conventional row first, then eta rows in descending order.
using ComparisonTable = std::vector<ComparisonRow>;

struct MethodSummary {
  MethodSpec method;
  std::vector<double> snapshot_rates;   ///< pooled over trials, trial-major order
  std::vector<double> trial_mean_rates;
  std::vector<double> trial_costs;
  double mean_sum_rate = 0.0;
  double mean_trial_cost = 0.0;
  std::vector<long long> rank_histogram;  ///< index k: snapshots with k_est = k (sketch ran)
  long long count_none = 0, count_woodbury = 0, count_full = 0, count_fallback = 0;
  double median_k_est = 0.0;
};

struct CampaignResult {
  ScenarioConfig config;
  std::vector<MethodSummary> methods;  ///< conventional first, eta descending
  ComparisonTable table;
};

struct CampaignOptions {
  /// Worker threads; 0 uses the hardware concurrency.
  int threads = 0;
};

/// Method list for a config: conventional plus one wb_arsvd per distinct eta,
/// eta descending.
std::vector<MethodSpec> campaign_methods(const ScenarioConfig& cfg);

CampaignResult run_campaign(const ScenarioConfig& cfg, const CampaignOptions& opts = {});

/// Savings and degradation of each summary relative to the conventional one.
ComparisonTable compare(std::span<const MethodSummary> methods);

// ---------------------------------------------------------------------------
// Artifacts (artifacts.cpp). All files are written to a temporary name in the
// target directory and renamed into place.

void write_text_atomic(const std::filesystem::path& path, const std::string& content);

std::string ecdf_csv(std::span<const EcdfPoint> points);
std::string comparison_csv(const ComparisonTable& table);
std::string complexity_csv(std::span<const CurvePoint> curve);
std::string trial_csv(std::span<const TrialResult> trials);

/// Per-snapshot geometry of a trial's pass:
/// t,ut_index,theta_rad,phi_rad,slant_range_m,gain_dB.
std::string snapshot_geometry_csv(const ScenarioConfig& cfg, std::uint64_t trial_seed);

nlohmann::json campaign_summary_json(const CampaignResult& result);

/// Writes ecdf_<label>.csv (pooled snapshots), ecdf_trialmean_<label>.csv,
/// comparison_table.csv, complexity_curve.csv and summary.json.
void write_campaign_artifacts(const std::filesystem::path& out_dir, const CampaignResult& result);

}  // namespace leowb
