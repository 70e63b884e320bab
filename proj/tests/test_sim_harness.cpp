#include <doctest.h>

#include <algorithm>

#include "leowb/sim_harness.hpp"
#include "oracles.hpp"

using namespace leowb;

namespace {

// A short pass keeps these tests quick; the geometry is the default one.
ScenarioConfig short_pass(double seconds = 3.0) {
  ScenarioConfig c;
  c.pass_s = seconds;
  c.mc_runs = 3;
  return c;
}

}  // namespace

TEST_CASE("ecdf") {
  SUBCASE("singleton") {
    const std::vector<double> x{5.0};
    const auto e = ecdf(x);
    REQUIRE(e.size() == 1);
    CHECK(e[0].value == 5.0);
    CHECK(e[0].probability == 1.0);
  }
  SUBCASE("duplicates collapse") {
    const std::vector<double> x{4.0, 2.0, 1.0, 2.0};
    const auto e = ecdf(x);
    REQUIRE(e.size() == 3);
    CHECK(e[0].value == 1.0);
    CHECK(e[0].probability == 0.25);
    CHECK(e[1].value == 2.0);
    CHECK(e[1].probability == 0.75);
    CHECK(e[2].value == 4.0);
    CHECK(e[2].probability == 1.0);
  }
  SUBCASE("uniform sample passes a Kolmogorov check") {
    RandomSource rng(1);
    std::vector<double> x(10000);
    for (auto& v : x) v = rng.uniform();
    double worst = 0.0;
    const auto e = ecdf(x);
    double prev = 0.0;
    for (const auto& p : e) {
      // the step function jumps at each sample, so check both sides
      worst = std::max({worst, std::abs(p.probability - p.value), std::abs(prev - p.value)});
      prev = p.probability;
    }
    CHECK(worst < 0.02);
  }
  SUBCASE("empty input") { CHECK_THROWS_AS(ecdf(std::vector<double>{}), EmptyInput); }
}

TEST_CASE("complexity curve") {
  const auto c = complexity_curve(100);
  REQUIRE(c.size() == 100);
  CHECK(c.front().r == 1);
  CHECK(c[0].ratio == doctest::Approx(0.0202).epsilon(0.001));
  CHECK(std::abs(c[49].ratio - 0.885) < 1e-12);
  CHECK(std::abs(c[99].ratio - 3.01) < 1e-12);
  const auto first_above = std::find_if(c.begin(), c.end(), [](const CurvePoint& p) { return p.ratio > 1.0; });
  CHECK(first_above->r == 55);
  CHECK_THROWS_AS(complexity_curve(1), InvalidArgument);
}

TEST_CASE("single snapshot: both methods invert once and agree") {
  ScenarioConfig c;
  c.pass_s = 0.05;
  const auto methods = campaign_methods(c);
  const auto res = run_trial_methods(c, methods, 17);
  REQUIRE(res.size() == 4);
  for (const auto& r : res) {
    REQUIRE(r.snapshots.size() == 1);
    CHECK(r.snapshots[0].method == UpdateMethod::full);
    CHECK(r.mean_sum_rate == res[0].mean_sum_rate);
    CHECK(r.total_cost_units == cost_full(16));
  }
}

TEST_CASE("trial records and cost audit") {
  const ScenarioConfig c = short_pass();
  const auto methods = campaign_methods(c);
  const auto res = run_trial_methods(c, methods, 5);
  for (const auto& r : res) {
    CHECK(r.snapshots.size() == static_cast<std::size_t>(c.snapshot_count()));
    double total = 0.0, rate = 0.0;
    for (const auto& s : r.snapshots) {
      total += s.cost_units;
      rate += s.sum_rate;
      switch (s.method) {
        case UpdateMethod::full:
          if (r.method_label == "conventional" || &s == &r.snapshots.front()) {
            CHECK(s.cost_units == cost_full(c.K));
          } else {
            CHECK(s.cost_units == cost_full(c.K) + cost_arsvd(c.K, s.k_est));
          }
          break;
        case UpdateMethod::woodbury: CHECK(s.cost_units == cost_wb_arsvd(c.K, s.k_est)); break;
        case UpdateMethod::none: CHECK(s.cost_units == 0.0); break;
      }
    }
    CHECK(r.total_cost_units == doctest::Approx(total).epsilon(1e-15));
    CHECK(r.mean_sum_rate == doctest::Approx(rate / r.snapshots.size()).epsilon(1e-15));
  }
  for (const auto& s : res[0].snapshots) CHECK(s.method == UpdateMethod::full);
}

TEST_CASE("lockstep trial equals per-method trials") {
  const ScenarioConfig c = short_pass(1.0);
  const auto methods = campaign_methods(c);
  const auto all = run_trial_methods(c, methods, 8);
  for (std::size_t i = 0; i < methods.size(); ++i) {
    const TrialResult one = run_trial(c, methods[i], 8);
    REQUIRE(one.snapshots.size() == all[i].snapshots.size());
    for (std::size_t s = 0; s < one.snapshots.size(); ++s) {
      CHECK(one.snapshots[s].sum_rate == all[i].snapshots[s].sum_rate);
      CHECK(one.snapshots[s].k_est == all[i].snapshots[s].k_est);
    }
  }
}

TEST_CASE("most updates take the Woodbury branch in the LOS-dominated regime") {
  const ScenarioConfig c = short_pass(5.0);
  const auto r = run_trial(c, MethodSpec::wb_arsvd(0.9), 3);
  std::vector<int> ranks;
  for (std::size_t i = 1; i < r.snapshots.size(); ++i) ranks.push_back(r.snapshots[i].k_est);
  std::nth_element(ranks.begin(), ranks.begin() + ranks.size() / 2, ranks.end());
  const int median = ranks[ranks.size() / 2];
  CHECK(median <= c.K / 2);  // the dispatcher threshold
  const auto conv = run_trial(c, MethodSpec::conventional(), 3);
  CHECK(r.total_cost_units < conv.total_cost_units);
}

TEST_CASE("campaign comparison table") {
  const ScenarioConfig c = short_pass(2.0);
  const CampaignResult res = run_campaign(c, CampaignOptions{1});
  REQUIRE(res.table.size() == 4);
  CHECK(res.table[0].label == "conventional");
  CHECK(res.table[0].savings_pct == 0.0);
  CHECK(res.table[0].degradation_pct == 0.0);
  for (std::size_t i = 2; i < res.table.size(); ++i) CHECK(*res.table[i].eta < *res.table[i - 1].eta);
  for (const auto& m : res.methods) {
    CHECK(m.trial_mean_rates.size() == 3);
    CHECK(m.snapshot_rates.size() == static_cast<std::size_t>(3 * c.snapshot_count()));
  }
}

TEST_CASE("campaign is reproducible and independent of the thread count") {
  const ScenarioConfig c = short_pass(1.0);
  const CampaignResult serial = run_campaign(c, CampaignOptions{1});
  const CampaignResult parallel = run_campaign(c, CampaignOptions{3});
  const CampaignResult again = run_campaign(c, CampaignOptions{1});
  CHECK(campaign_summary_json(serial).dump() == campaign_summary_json(parallel).dump());
  CHECK(campaign_summary_json(serial).dump() == campaign_summary_json(again).dump());
  CHECK(comparison_csv(serial.table) == comparison_csv(parallel.table));
}

TEST_CASE("different seeds give different passes") {
  ScenarioConfig a = short_pass(0.5), b = short_pass(0.5);
  b.seed = a.seed + 1;
  CHECK(run_campaign(a).methods[0].mean_sum_rate != run_campaign(b).methods[0].mean_sum_rate);
}

TEST_CASE("compare needs a baseline") {
  MethodSummary m;
  m.method = MethodSpec::wb_arsvd(0.9);
  const std::vector<MethodSummary> only{m};
  CHECK_THROWS_AS(compare(only), InvalidArgument);
}

TEST_CASE("artifact formats") {
  ComparisonTable t{{"conventional", std::nullopt, 0.0, 0.0}, {"wb_arsvd_eta0.9", 0.9, 30.5, 1.25}};
  CHECK(comparison_csv(t) == "eta,savings_pct,degradation_pct\nconventional,0.000000,0.000000\n0.9,30.500000,1.250000\n");
  const std::vector<EcdfPoint> e{{1.5, 0.5}, {2.0, 1.0}};
  CHECK(ecdf_csv(e) == "value,cdf\n1.5,0.5\n2,1\n");
  CHECK(complexity_csv(complexity_curve(2)) == "r,ratio\n1,1.375\n2,3.5\n");
  CHECK(MethodSpec::wb_arsvd(0.65).label() == "wb_arsvd_eta0.65");

  const ScenarioConfig c = short_pass(0.1);
  const std::string geo = snapshot_geometry_csv(c, 1);
  CHECK(geo.rfind("t,ut_index,theta_rad,phi_rad,slant_range_m,gain_dB\n", 0) == 0);
  CHECK(std::count(geo.begin(), geo.end(), '\n') == 1 + 2 * c.K);
}

TEST_CASE("atomic writes leave no temporary file") {
  const auto dir = std::filesystem::temp_directory_path() / "leowb_atomic_test";
  std::filesystem::create_directories(dir);
  write_text_atomic(dir / "a.txt", "hello\n");
  CHECK(std::filesystem::exists(dir / "a.txt"));
  CHECK_FALSE(std::filesystem::exists(dir / "a.txt.tmp"));
  CHECK_THROWS_AS(write_text_atomic(dir / "missing" / "b.txt", "x"), Error);
  std::filesystem::remove_all(dir);
}
