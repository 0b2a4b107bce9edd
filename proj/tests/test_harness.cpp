#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <cstring>
#include <sstream>

#include "metagame/harness.hpp"
#include "metagame/rng.hpp"

using namespace metagame;
using namespace metagame::harness;

TEST_CASE("wilson interval matches the closed form") {
  const auto [lo0, hi0] = wilson_interval(0, 0);
  CHECK(lo0 == 0.0);
  CHECK(hi0 == 1.0);

  const auto [lo, hi] = wilson_interval(50, 100);
  CHECK(lo == doctest::Approx(0.404).epsilon(1e-3));
  CHECK(hi == doctest::Approx(0.596).epsilon(1e-3));

  const auto [lo1, hi1] = wilson_interval(100, 100);
  CHECK(lo1 > 0.96);
  CHECK(hi1 == 1.0);

  // direct closed-form evaluation
  const double z = 1.959964;
  const double n = 100.0, phat = 0.5;
  const double center = (phat + z * z / (2 * n)) / (1 + z * z / n);
  const double half =
      z * std::sqrt(phat * (1 - phat) / n + z * z / (4 * n * n)) / (1 + z * z / n);
  CHECK(lo == doctest::Approx(center - half).epsilon(1e-12));
  CHECK(hi == doctest::Approx(center + half).epsilon(1e-12));

  CHECK_THROWS_AS(wilson_interval(5, 3), std::invalid_argument);
}

TEST_CASE("wilson interval always contains the point estimate and shrinks like 1/sqrt(n)") {
  Rng rng(8);
  for (int trial = 0; trial < 200; ++trial) {
    const long long n = 1 + rng.uniform_int(10000);
    const long long k = rng.uniform_int(static_cast<int>(n) + 1);
    const auto [lo, hi] = wilson_interval(k, n);
    const double p = static_cast<double>(k) / static_cast<double>(n);
    CHECK(lo <= p + 1e-12);
    CHECK(hi >= p - 1e-12);
    CHECK(lo >= 0.0);
    CHECK(hi <= 1.0);
  }

  double widths[3];
  const long long sizes[3] = {10, 1000, 100000};
  for (int i = 0; i < 3; ++i) {
    const auto [lo, hi] = wilson_interval(sizes[i] / 2, sizes[i]);
    widths[i] = hi - lo;
  }
  // each 100x step in n narrows the interval by about 10x
  CHECK(widths[0] / widths[1] == doctest::Approx(10.0).epsilon(0.25));
  CHECK(widths[1] / widths[2] == doctest::Approx(10.0).epsilon(0.25));

  // a non-default confidence exercises the quantile path
  const auto [lo90, hi90] = wilson_interval(50, 100, 0.90);
  const auto [lo95, hi95] = wilson_interval(50, 100, 0.95);
  CHECK(hi90 - lo90 < hi95 - lo95);
}

TEST_CASE("aggregation counts are order independent") {
  Rng rng(77);
  std::vector<ExperimentFlags> outcomes;
  for (int i = 0; i < 500; ++i) {
    ExperimentFlags f;
    f.opposite_change = rng.bernoulli(0.3);
    f.poisoned_apple = f.opposite_change && rng.bernoulli(0.3);
    f.improved = rng.bernoulli(0.4);
    f.harmed = !f.improved && rng.bernoulli(0.5);
    f.adopted = rng.bernoulli(0.6);
    f.inertia_harm = rng.bernoulli(0.4);
    outcomes.push_back(f);
  }
  const CellStats base =
      aggregate_cell(games::Family::Bargaining, engine::Objective::Fairness, outcomes);

  std::vector<ExperimentFlags> shuffled = outcomes;
  for (std::size_t i = shuffled.size(); i > 1; --i)
    std::swap(shuffled[i - 1], shuffled[static_cast<std::size_t>(rng.uniform_int(
                                   static_cast<int>(i)))]);
  const CellStats moved =
      aggregate_cell(games::Family::Bargaining, engine::Objective::Fairness, shuffled);

  for (std::size_t p = 0; p < kPanelNames.size(); ++p) {
    CHECK(base.panels[p].numerator == moved.panels[p].numerator);
    CHECK(base.panels[p].denominator == moved.panels[p].denominator);
    CHECK(std::memcmp(&base.panels[p].frequency, &moved.panels[p].frequency, sizeof(double)) ==
          0);
    CHECK(std::memcmp(&base.panels[p].ci_lo, &moved.panels[p].ci_lo, sizeof(double)) == 0);
  }

  // panel B counts only within opposite changes
  long long opposite = 0, poisoned = 0;
  for (const ExperimentFlags& f : outcomes) {
    opposite += f.opposite_change;
    poisoned += f.poisoned_apple;
  }
  CHECK(base.panels[1].denominator == opposite);
  CHECK(base.panels[1].numerator == poisoned);
}

TEST_CASE("an empty sweep reports undefined frequencies") {
  SweepConfig config;
  config.families = {games::Family::Bargaining};
  config.experiments_per_cell = 0;
  config.roster_size = 6;
  config.subset_sizes = {3};
  const SweepStats stats = run_sweep(config);
  REQUIRE(stats.cells.size() == 2);  // two objectives
  for (const CellStats& cell : stats.cells) {
    CHECK(cell.experiments == 0);
    for (const PanelStat& p : cell.panels) {
      CHECK(p.denominator == 0);
      CHECK(std::isnan(p.frequency));
    }
  }

  std::ostringstream csv;
  emit_report_csv(stats, csv);
  CHECK(csv.str().find("nan") != std::string::npos);
}

TEST_CASE("sweeps reproduce from the seed") {
  SweepConfig config;
  config.families = {games::Family::Bargaining};
  config.objectives = {engine::Objective::Fairness};
  config.roster_size = 8;
  config.subset_sizes = {2, 3, 4};
  config.experiments_per_cell = 40;
  config.seed = 31337;
  const SweepStats first = run_sweep(config);
  const SweepStats second = run_sweep(config);
  CHECK(stats_to_json(first).dump() == stats_to_json(second).dump());

  std::ostringstream csv1, csv2;
  emit_report_csv(first, csv1);
  emit_report_csv(second, csv2);
  CHECK(csv1.str() == csv2.str());

  // a different seed moves at least one count
  config.seed = 31338;
  const SweepStats other = run_sweep(config);
  CHECK(stats_to_json(first).dump() != stats_to_json(other).dump());
}

TEST_CASE("duplicate-tech bundles never move payoffs") {
  SweepConfig config;
  config.families = {games::Family::Bargaining};
  config.objectives = {engine::Objective::Fairness};
  config.roster_size = 6;
  config.subset_sizes = {2, 3, 4};
  config.experiments_per_cell = 30;
  config.seed = 5;
  std::map<games::Family, regression::CoefficientBundle> bundles;
  bundles.emplace(games::Family::Bargaining,
                  fixtures::duplicate_tech_bundle(games::Family::Bargaining, 6));
  const SweepStats stats = run_sweep(config, bundles);
  REQUIRE(stats.cells.size() == 1);
  CHECK(stats.cells[0].panels[0].numerator == 0);  // no opposite changes at all
  CHECK(stats.cells[0].panels[0].denominator == 30);
  CHECK(stats.cells[0].optimality_violations == 0);
}

TEST_CASE("worker count does not change sweep results") {
  SweepConfig config;
  config.families = {games::Family::Bargaining};
  config.objectives = {engine::Objective::Fairness};
  config.roster_size = 8;
  config.subset_sizes = {2, 4, 6};
  config.experiments_per_cell = 30;
  config.seed = 808;

  setenv("METAGAME_THREADS", "1", 1);
  const SweepStats serial = run_sweep(config);
  setenv("METAGAME_THREADS", "8", 1);
  const SweepStats parallel = run_sweep(config);
  unsetenv("METAGAME_THREADS");
  CHECK(stats_to_json(serial).dump() == stats_to_json(parallel).dump());
}

TEST_CASE("stats JSON round-trips byte for byte") {
  SweepConfig config;
  config.families = {games::Family::Bargaining};
  config.roster_size = 6;
  config.subset_sizes = {2, 4};
  config.experiments_per_cell = 25;
  config.seed = 99;
  const SweepStats stats = run_sweep(config);
  const nlohmann::json j = stats_to_json(stats);
  const SweepStats back = stats_from_json(j);
  CHECK(stats_to_json(back).dump() == j.dump());
}

TEST_CASE("sweep config validation") {
  SweepConfig config;
  config.subset_sizes = {13};
  CHECK_THROWS_AS(config.validate(), std::invalid_argument);
  config.subset_sizes = {1};
  CHECK_THROWS_AS(config.validate(), std::invalid_argument);
  config.subset_sizes = {2, 12};
  CHECK_NOTHROW(config.validate());
  config.experiments_per_cell = -1;
  CHECK_THROWS_AS(config.validate(), std::invalid_argument);
}
