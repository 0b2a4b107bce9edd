// Acceptance suite: runs each pipeline-level criterion at its stated
// tolerance and prints one pass/fail line per criterion. The CLI binary
// path is taken from argv[1] for the end-to-end determinism check.

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "metagame/engine.hpp"
#include "metagame/fixtures.hpp"
#include "metagame/harness.hpp"
#include "metagame/nash.hpp"
#include "metagame/regression.hpp"
#include "metagame/rng.hpp"

using namespace metagame;

namespace {

struct Check {
  std::string label;
  bool passed = false;
  std::string detail;
  double seconds = 0.0;
};

std::vector<Check> g_checks;

void run_criterion(const std::string& label, const std::function<std::string()>& body) {
  Check check;
  check.label = label;
  const auto start = std::chrono::steady_clock::now();
  try {
    check.detail = body();
    check.passed = true;
  } catch (const std::exception& e) {
    check.detail = e.what();
  }
  check.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  g_checks.push_back(std::move(check));
}

void require(bool condition, const std::string& message) {
  if (!condition) throw std::runtime_error(message);
}

void require_close(double actual, double expected, double tol, const std::string& what) {
  if (!(std::abs(actual - expected) <= tol)) {
    std::ostringstream msg;
    msg.precision(12);
    msg << what << ": got " << actual << ", want " << expected << " +- " << tol;
    throw std::runtime_error(msg.str());
  }
}

void require_runtime(double seconds, double limit, const std::string& what) {
  if (seconds > limit) {
    std::ostringstream msg;
    msg << what << " took " << seconds << " s (limit " << limit << " s)";
    throw std::runtime_error(msg.str());
  }
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  require(static_cast<bool>(in), "cannot open " + path);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

// --- criterion bodies -----------------------------------------------------

std::string fixture_replay() {
  const auto start = std::chrono::steady_clock::now();
  const auto bundle = fixtures::demo_bundle();
  const engine::ExpansionReport report = engine::expand_technology(
      bundle, {"A", "B", "C", "D"}, "E", engine::Objective::Fairness);

  require(report.baseline.chosen_market == 4,
          "pre-release market is " + std::to_string(report.baseline.chosen_market));
  require_close(report.baseline.objective_value, 1.000, 1e-3, "pre-release fairness");
  require_close(report.baseline.payoff_a, 0.49, 1e-2, "pre-release payoff_a");
  require_close(report.baseline.payoff_b, 0.50, 1e-2, "pre-release payoff_b");

  require(report.expanded.chosen_market == 8,
          "post-release market is " + std::to_string(report.expanded.chosen_market));
  require_close(report.expanded.objective_value, 0.990, 1e-3, "post-release fairness");
  require_close(report.expanded.payoff_a, 0.52, 1e-2, "post-release payoff_a");
  require_close(report.expanded.payoff_b, 0.46, 1e-2, "post-release payoff_b");

  require_close(report.inertia_objective, 0.976, 1e-3, "inertia fairness at market 4");
  require(report.expanded.adoption.at("E") <= 1e-6, "E picked up adoption mass");
  require(report.flags.poisoned_apple, "poisoned_apple flag not set");
  require(report.flags.inertia_harm, "inertia_harm flag not set");

  const double elapsed =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  require_runtime(elapsed, 1.0, "fixture replay");
  std::ostringstream detail;
  detail << "m* 4->8, fairness 1.000->0.990, inertia 0.976, payoffs (0.49,0.50)->("
         << report.expanded.payoff_a << "," << report.expanded.payoff_b << ")";
  return detail.str();
}

std::string solver_oracle_equivalence() {
  const auto start = std::chrono::steady_clock::now();
  int profiles_checked = 0;
  for (int trial = 0; trial < 500; ++trial) {
    Rng rng = Rng::stream(20240601, static_cast<std::uint64_t>(trial));
    const int n = 2 + trial % 4;
    Eigen::MatrixXd a(n, n), b(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        a(i, j) = rng.uniform01();
        b(i, j) = rng.uniform01();
      }
    const nash::BimatrixGame game{a, b};
    const auto found = nash::enumerate_equilibria(game);
    const auto oracle = nash::support_enumeration(game);
    require(!found.empty(), "no equilibrium found on trial " + std::to_string(trial));
    for (const nash::MixedProfile& eq : found) {
      const nash::RegretReport regret = nash::verify_equilibrium(game, eq, 1e-8);
      require(regret.is_equilibrium,
              "regret above 1e-8 on trial " + std::to_string(trial));
      bool matched = false;
      for (const nash::MixedProfile& o : oracle)
        if (nash::profiles_close(o, eq, 1e-6)) {
          matched = true;
          break;
        }
      require(matched, "profile missing from the oracle on trial " + std::to_string(trial));
      ++profiles_checked;
    }
  }
  const double elapsed =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  require_runtime(elapsed, 30.0, "solver-oracle sweep");
  return std::to_string(profiles_checked) + " profiles matched over 500 games";
}

std::string regression_recovery() {
  const auto start = std::chrono::steady_clock::now();
  const games::Family family = games::Family::Bargaining;
  const std::vector<std::string> techs = sim::roster_names(13);
  Rng rng(777);

  regression::FeatureSpec spec;
  spec.situational_names = {"delta_a", "delta_b"};
  double beta0 = 0.45;
  std::map<int, double> beta_market;
  std::map<regression::TechPair, double> beta_pair;
  const double bs1 = 0.06, bs2 = -0.05;
  for (int m = 1; m <= 8; ++m) {
    spec.market_levels.push_back(m);
    beta_market[m] = m == 1 ? 0.0 : rng.uniform(-0.1, 0.1);
  }
  for (const std::string& a : techs)
    for (const std::string& b : techs) {
      const regression::TechPair pair{a, b};
      spec.pair_levels.push_back(pair);
      beta_pair[pair] = spec.pair_levels.size() == 1 ? 0.0 : rng.uniform(-0.1, 0.1);
    }

  std::vector<sim::GameRecord> corpus;
  double sum1 = 0.0, sum2 = 0.0;
  for (int m = 1; m <= 8; ++m)
    for (const std::string& a : techs)
      for (const std::string& b : techs)
        for (int k = 0; k < 10; ++k) {
          sim::GameRecord r;
          r.market = games::market_by_id(family, m);
          r.tech_a = a;
          r.tech_b = b;
          r.situation.delta_a = rng.uniform(0.5, 0.99);
          r.situation.delta_b = rng.uniform(0.5, 0.99);
          r.outcome = games::BargainingOutcome::agreement(1, 0.5);
          sum1 += r.situation.delta_a;
          sum2 += r.situation.delta_b;
          corpus.push_back(std::move(r));
        }
  const double rows = static_cast<double>(corpus.size());
  spec.situational_means = {sum1 / rows, sum2 / rows};

  const auto cell_mean = [&](const sim::GameRecord& r) {
    return beta0 + beta_market.at(r.market.market_id) +
           beta_pair.at(regression::TechPair{r.tech_a, r.tech_b});
  };
  for (sim::GameRecord& r : corpus)
    r.fairness = cell_mean(r) + bs1 * (r.situation.delta_a - spec.situational_means[0]) +
                 bs2 * (r.situation.delta_b - spec.situational_means[1]);

  const regression::CoefficientSet clean =
      regression::fit(corpus, family, regression::Target::Fairness, spec);
  require_close(clean.beta0, beta0, 1e-8, "beta0");
  for (const auto& [id, beta] : beta_market)
    require_close(clean.beta_market.at(id), beta, 1e-8, "beta_market " + std::to_string(id));
  for (const auto& [pair, beta] : beta_pair)
    require_close(clean.beta_pair.at(pair), beta, 1e-8,
                  "beta_pair " + pair.first + "|" + pair.second);
  require_close(clean.beta_situation.at("delta_a"), bs1, 1e-8, "beta delta_a");
  require_close(clean.beta_situation.at("delta_b"), bs2, 1e-8, "beta delta_b");

  // Gaussian noise: pairwise predictions stay close to the generating means
  Rng noise(778);
  for (sim::GameRecord& r : corpus) r.fairness += noise.normal(0.0, 0.01);
  const regression::CoefficientSet noisy =
      regression::fit(corpus, family, regression::Target::Fairness, spec);
  double sq_sum = 0.0;
  int cells = 0;
  for (int m = 1; m <= 8; ++m)
    for (const std::string& a : techs)
      for (const std::string& b : techs) {
        sim::GameRecord probe;
        probe.market = games::market_by_id(family, m);
        probe.tech_a = a;
        probe.tech_b = b;
        const double err = regression::predict_pair(noisy, m, a, b) - cell_mean(probe);
        sq_sum += err * err;
        ++cells;
      }
  const double rmse = std::sqrt(sq_sum / cells);
  require(rmse < 0.02, "noisy predict_pair RMSE " + std::to_string(rmse) + " >= 0.02");

  const double elapsed =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  require_runtime(elapsed, 30.0, "regression recovery");
  std::ostringstream detail;
  detail << corpus.size() << " rows, exact recovery at 1e-8, noisy RMSE " << rmse;
  return detail.str();
}

std::string metric_formula_suite() {
  games::SituationParams p;
  require_close(games::fairness(games::BargainingOutcome::agreement(1, 0.5), p,
                                games::Family::Bargaining),
                1.0, 0.0, "fairness(0.5)");
  require_close(games::fairness(games::BargainingOutcome::agreement(1, 1.0), p,
                                games::Family::Bargaining),
                0.0, 1e-15, "fairness(1.0)");
  const games::Outcome none = games::BargainingOutcome::no_agreement();
  require_close(games::efficiency(none, p, games::Family::Bargaining), 0.0, 0.0,
                "no-agreement efficiency");
  require_close(games::fairness(none, p, games::Family::Bargaining), 1.0, 0.0,
                "no-agreement fairness");
  p.delta_a = 0.8;
  p.delta_b = 0.6;
  for (double share : {0.0, 0.25, 0.5, 1.0})
    require_close(games::efficiency(games::BargainingOutcome::agreement(1, share), p,
                                    games::Family::Bargaining),
                  1.0, 1e-15, "round-one efficiency");
  require_close(
      games::efficiency(games::PersuasionOutcome{8, 4, 3, 2}, p, games::Family::Persuasion),
      0.75, 1e-15, "persuasion efficiency 3/4");
  require_close(
      games::fairness(games::PersuasionOutcome{8, 4, 3, 2}, p, games::Family::Persuasion), 0.5,
      1e-15, "persuasion fairness 2/4");
  const games::Payoffs pd = games::bargaining_payoffs(1, 0.5, games::SituationParams{});
  require_close(pd.alice, 0.5, 0.0, "round-one split payoff");
  return "all formula examples exact";
}

harness::SweepStats run_acceptance_sweep() {
  harness::SweepConfig config;
  config.families = {games::Family::Bargaining, games::Family::Negotiation,
                     games::Family::Persuasion};
  config.objectives = {engine::Objective::Fairness, engine::Objective::Efficiency};
  config.roster_size = 13;
  config.subset_sizes = {2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 12};
  config.experiments_per_cell = 170;  // 6 cells -> 1020 experiments
  config.seed = 424242;
  return harness::run_sweep(config);
}

std::string regulator_optimality(const harness::SweepStats& stats) {
  long long experiments = 0;
  long long violations = 0;
  for (const harness::CellStats& cell : stats.cells) {
    experiments += cell.experiments;
    violations += cell.optimality_violations;
  }
  require(experiments >= 1000,
          "sweep ran only " + std::to_string(experiments) + " experiments");
  require(violations == 0, std::to_string(violations) + " optimality violations");
  return std::to_string(experiments) + " experiments, 0 violations";
}

std::string existence_checks(const harness::SweepStats& stats) {
  long long poisoned = 0;
  long long fairness_decreases = 0;
  for (const harness::CellStats& cell : stats.cells) {
    poisoned += cell.panels[1].numerator;
    if (cell.objective == engine::Objective::Fairness)
      fairness_decreases += cell.panels[4].denominator;  // panel E denominator = harmed count
    for (std::size_t p = 0; p < harness::kPanelNames.size(); ++p) {
      const harness::PanelStat& panel = cell.panels[p];
      require(panel.denominator > 0, std::string("panel ") + harness::kPanelNames[p] +
                                         " empty for " + games::family_name(cell.family));
      require(panel.ci_lo >= 0.0 && panel.ci_hi <= 1.0 && panel.ci_lo <= panel.frequency &&
                  panel.frequency <= panel.ci_hi,
              "interval does not bracket the frequency");
    }
  }
  require(poisoned >= 1, "no poisoned-apple experiment in the sweep");
  require(fairness_decreases >= 1, "no fairness decrease in the sweep");

  // closed-form interval cross-check at the two pinned points
  const double z = 1.959964;
  for (const auto& [k, n] : std::vector<std::pair<long long, long long>>{{50, 100}, {100, 100}}) {
    const auto [lo, hi] = harness::wilson_interval(k, n);
    const double nn = static_cast<double>(n);
    const double phat = static_cast<double>(k) / nn;
    const double center = (phat + z * z / (2 * nn)) / (1 + z * z / nn);
    const double half =
        z * std::sqrt(phat * (1 - phat) / nn + z * z / (4 * nn * nn)) / (1 + z * z / nn);
    require_close(lo, std::max(0.0, center - half), 1e-12, "wilson lo closed form");
    require_close(hi, std::min(1.0, center + half), 1e-12, "wilson hi closed form");
  }
  std::ostringstream detail;
  detail << poisoned << " poisoned apples, " << fairness_decreases
         << " fairness decreases, all panels populated";
  return detail.str();
}

std::string cli_determinism(const std::string& cli, const std::filesystem::path& scratch) {
  require(!cli.empty(), "CLI path not supplied (argv[1])");
  std::filesystem::create_directories(scratch);
  const auto run = [&](const std::string& args) {
    const std::string command = cli + " " + args + " > /dev/null 2>&1";
    require(std::system(command.c_str()) == 0, "command failed: " + command);
  };

  const std::string corpus1 = (scratch / "corpus1.csv").string();
  const std::string corpus2 = (scratch / "corpus2.csv").string();
  const std::string sim_args =
      "simulate --families bargaining,negotiation,persuasion --roster-size 6 "
      "--games-per-cell 2 --seed 2718 --out ";
  run(sim_args + corpus1);
  run(sim_args + corpus2);
  require(slurp(corpus1) == slurp(corpus2), "corpus bytes differ between runs");

  const std::string json1 = (scratch / "stats1.json").string();
  const std::string json2 = (scratch / "stats2.json").string();
  const std::string csv1 = (scratch / "report1.csv").string();
  const std::string csv2 = (scratch / "report2.csv").string();
  const std::string sweep_args =
      "sweep --families bargaining --objectives fairness,efficiency --roster-size 8 "
      "--subset-sizes 2,3,4,5 --experiments-per-cell 40 --seed 3141 ";
  run(sweep_args + "--out " + json1 + " --out-csv " + csv1);
  run(sweep_args + "--out " + json2 + " --out-csv " + csv2);
  require(slurp(json1) == slurp(json2), "stats JSON bytes differ between runs");
  require(slurp(csv1) == slurp(csv2), "report CSV bytes differ between runs");
  return "corpus, stats JSON, and report CSV byte-identical across reruns";
}

std::string affine_invariance() {
  Rng rng(31415);
  const int n = 4;
  Eigen::MatrixXd a(n, n), b(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      a(i, j) = rng.uniform01();
      b(i, j) = rng.uniform01();
    }
  const nash::BimatrixGame game{a, b};
  nash::BimatrixGame shifted = game;
  shifted.payoff_a.array() += 10.0;
  shifted.payoff_b.array() += 10.0;

  const auto base = nash::enumerate_equilibria(game);
  const auto moved = nash::enumerate_equilibria(shifted);
  require(base.size() == moved.size(), "equilibrium counts differ after the shift");
  for (const nash::MixedProfile& eq : base) {
    bool matched = false;
    for (const nash::MixedProfile& o : moved)
      if (nash::profiles_close(o, eq, 1e-7)) {
        matched = true;
        break;
      }
    require(matched, "equilibrium missing after the shift");
  }
  return std::to_string(base.size()) + " equilibria unchanged under +10 shift";
}

}  // namespace

int main(int argc, char** argv) {
  const std::string cli = argc > 1 ? argv[1] : "";
  const std::filesystem::path scratch =
      argc > 2 ? std::filesystem::path(argv[2])
               : std::filesystem::temp_directory_path() / "metagame_acceptance";

  run_criterion("1 fixture replay", fixture_replay);
  run_criterion("2 solver-oracle equivalence", solver_oracle_equivalence);
  run_criterion("3 regression recovery", regression_recovery);
  run_criterion("4 metric formula suite", metric_formula_suite);

  harness::SweepStats sweep_stats;
  bool sweep_ok = false;
  std::string sweep_error;
  try {
    sweep_stats = run_acceptance_sweep();
    sweep_ok = true;
  } catch (const std::exception& e) {
    sweep_error = e.what();
  }
  run_criterion("5 regulator optimality", [&] {
    if (!sweep_ok) throw std::runtime_error("sweep failed: " + sweep_error);
    return regulator_optimality(sweep_stats);
  });
  run_criterion("6 existence checks", [&] {
    if (!sweep_ok) throw std::runtime_error("sweep failed: " + sweep_error);
    return existence_checks(sweep_stats);
  });
  run_criterion("7 end-to-end determinism", [&] { return cli_determinism(cli, scratch); });
  run_criterion("8 affine invariance", affine_invariance);

  bool all_passed = true;
  for (const Check& check : g_checks) {
    std::cout << (check.passed ? "PASS" : "FAIL") << " criterion " << check.label << " ["
              << check.seconds << " s] " << check.detail << '\n';
    all_passed = all_passed && check.passed;
  }
  std::cout << (all_passed ? "acceptance: all criteria passed" : "acceptance: FAILURES present")
            << '\n';
  return all_passed ? 0 : 1;
}
