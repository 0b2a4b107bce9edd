// Command-line front end for the meta-game pipeline: corpus generation and
// ingestion, payoff regression, equilibrium solving, regulator runs,
// technology-expansion experiments, and sweep aggregation.

#include <cstdint>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "metagame/engine.hpp"
#include "metagame/fixtures.hpp"
#include "metagame/harness.hpp"
#include "metagame/record_csv.hpp"

namespace {

using namespace metagame;

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitData = 2;

void write_json_file(const nlohmann::json& j, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open output file: " + path);
  out << j.dump(2) << '\n';
}

std::vector<games::Family> parse_families(const std::vector<std::string>& names) {
  std::vector<games::Family> families;
  for (const std::string& n : names) families.push_back(games::family_from_name(n));
  return families;
}

void print_metagame_summary(const engine::MetaGameResult& result, bool verbose) {
  std::cout << "objective " << engine::objective_name(result.objective) << ", techs";
  for (const std::string& t : result.techs) std::cout << ' ' << t;
  std::cout << '\n';
  for (const engine::MarketSolution& s : result.solutions) {
    std::cout << "  market " << s.market_id << ": objective "
              << s.avg_objective(result.objective) << " (payoffs " << s.avg_payoff_a << ", "
              << s.avg_payoff_b << "; " << s.equilibria.size() << " eq)";
    if (s.market_id == result.chosen_market) std::cout << "  <- selected";
    std::cout << '\n';
    if (verbose) {
      for (const nash::MixedProfile& eq : s.equilibria)
        std::cout << "    sigma_a [" << eq.sigma_a.transpose() << "]  sigma_b ["
                  << eq.sigma_b.transpose() << "]\n";
    }
  }
  std::cout << "selected market " << result.chosen_market << ": payoffs (" << result.payoff_a
            << ", " << result.payoff_b << "), objective " << result.objective_value << '\n';
}

struct CliOptions {
  std::uint64_t seed = 0;
  std::string out;
  bool verbose = false;
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Meta-game analysis over simulated economic games"};
  app.require_subcommand(1);
  app.fallthrough();
  app.set_config("--config", "", "Read options from an INI config file (one section per subcommand)");

  CliOptions opt;
  app.add_option("--seed", opt.seed, "Master RNG seed");
  app.add_option("--out", opt.out, "Primary output path");
  app.add_flag("--verbose", opt.verbose, "Print extra detail (equilibria, pivot traces)");

  const std::vector<std::string> family_names = {"bargaining", "negotiation", "persuasion"};
  const std::vector<std::string> objective_names = {"fairness", "efficiency"};

  // simulate
  auto* simulate = app.add_subcommand("simulate", "Generate a synthetic game corpus CSV");
  std::vector<std::string> sim_families = family_names;
  int sim_roster = 13;
  int sim_games_per_cell = 5;
  simulate->add_option("--families", sim_families, "Game families to simulate")
      ->delimiter(',')
      ->check(CLI::IsMember(family_names));
  simulate->add_option("--roster-size", sim_roster, "Number of synthetic techs")
      ->check(CLI::Range(2, 26));
  simulate->add_option("--games-per-cell", sim_games_per_cell,
                       "Games per (market, tech pair) cell")
      ->check(CLI::NonNegativeNumber);

  // ingest
  auto* ingest = app.add_subcommand("ingest", "Validate a game corpus CSV");
  std::string ingest_in;
  ingest->add_option("--in", ingest_in, "Corpus CSV path")->required();

  // fit
  auto* fit = app.add_subcommand("fit", "Fit the four per-target regressions for one family");
  std::string fit_in, fit_family;
  fit->add_option("--in", fit_in, "Corpus CSV path")->required();
  fit->add_option("--family", fit_family, "Game family")
      ->required()
      ->check(CLI::IsMember(family_names));

  // tables
  auto* tables_cmd = app.add_subcommand("tables", "Emit the four payoff tables for one market");
  std::string tables_coeffs;
  int tables_market = 1;
  std::vector<std::string> tables_techs;
  tables_cmd->add_option("--coeffs", tables_coeffs, "Coefficient bundle JSON")->required();
  tables_cmd->add_option("--market", tables_market, "Market id")->required();
  tables_cmd->add_option("--techs", tables_techs, "Tech ids")->delimiter(',')->required();

  // solve
  auto* solve_cmd = app.add_subcommand("solve", "Solve one market's technology game");
  std::string solve_coeffs;
  int solve_market_id = 1;
  std::vector<std::string> solve_techs;
  solve_cmd->add_option("--coeffs", solve_coeffs, "Coefficient bundle JSON")->required();
  solve_cmd->add_option("--market", solve_market_id, "Market id")->required();
  solve_cmd->add_option("--techs", solve_techs, "Tech ids")->delimiter(',')->required();

  // metagame
  auto* meta_cmd = app.add_subcommand("metagame", "Run the regulator's market selection");
  std::string meta_coeffs, meta_objective = "fairness";
  std::vector<std::string> meta_techs;
  meta_cmd->add_option("--coeffs", meta_coeffs, "Coefficient bundle JSON")->required();
  meta_cmd->add_option("--techs", meta_techs, "Tech ids")->delimiter(',')->required();
  meta_cmd->add_option("--objective", meta_objective, "Regulator objective")
      ->check(CLI::IsMember(objective_names));

  // expand
  auto* expand_cmd = app.add_subcommand("expand", "Run one technology-expansion experiment");
  std::string expand_coeffs, expand_add, expand_objective = "fairness";
  std::vector<std::string> expand_techs;
  bool expand_strict = false;
  expand_cmd->add_option("--coeffs", expand_coeffs, "Coefficient bundle JSON")->required();
  expand_cmd->add_option("--techs", expand_techs, "Baseline tech ids")->delimiter(',')->required();
  expand_cmd->add_option("--add", expand_add, "Released tech id")->required();
  expand_cmd->add_option("--objective", expand_objective, "Regulator objective")
      ->check(CLI::IsMember(objective_names));
  expand_cmd->add_flag("--strict-adoption", expand_strict,
                       "Adoption requires zero mass in every equilibrium");

  // sweep
  auto* sweep_cmd = app.add_subcommand("sweep", "Run many seeded expansion experiments");
  harness::SweepConfig sweep_config;
  std::vector<std::string> sweep_families = {"bargaining", "negotiation", "persuasion"};
  std::vector<std::string> sweep_objectives = objective_names;
  std::string sweep_out_csv;
  std::string sweep_coeffs_bargaining, sweep_coeffs_negotiation, sweep_coeffs_persuasion;
  sweep_cmd->add_option("--families", sweep_families, "Families to sweep")
      ->delimiter(',')
      ->check(CLI::IsMember(family_names));
  sweep_cmd->add_option("--objectives", sweep_objectives, "Objectives to sweep")
      ->delimiter(',')
      ->check(CLI::IsMember(objective_names));
  sweep_cmd->add_option("--roster-size", sweep_config.roster_size, "Roster size")
      ->check(CLI::Range(3, 26));
  sweep_cmd->add_option("--subset-sizes", sweep_config.subset_sizes,
                        "Baseline subset sizes N (2 <= N < roster)")
      ->delimiter(',');
  sweep_cmd
      ->add_option("--experiments-per-cell", sweep_config.experiments_per_cell,
                   "Experiments per (family, objective) cell")
      ->required()
      ->check(CLI::NonNegativeNumber);
  sweep_cmd->add_flag("--strict-adoption", sweep_config.strict_adoption,
                      "Adoption requires zero mass in every equilibrium");
  sweep_cmd->add_option("--coeffs-bargaining", sweep_coeffs_bargaining,
                        "Bundle JSON for bargaining (default: synthetic)");
  sweep_cmd->add_option("--coeffs-negotiation", sweep_coeffs_negotiation,
                        "Bundle JSON for negotiation (default: synthetic)");
  sweep_cmd->add_option("--coeffs-persuasion", sweep_coeffs_persuasion,
                        "Bundle JSON for persuasion (default: synthetic)");
  sweep_cmd->add_option("--out-csv", sweep_out_csv, "Plot-ready CSV output path");

  // report
  auto* report_cmd = app.add_subcommand("report", "Re-emit sweep stats as CSV or JSON");
  std::string report_in, report_format = "csv";
  report_cmd->add_option("--in", report_in, "Sweep stats JSON")->required();
  report_cmd->add_option("--format", report_format, "Output format")
      ->check(CLI::IsMember({"csv", "json"}));

  // fixture
  auto* fixture_cmd =
      app.add_subcommand("fixture", "Write the bundled demonstration coefficient bundle");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (simulate->parsed()) {
      if (opt.out.empty()) throw std::runtime_error("simulate requires --out");
      const auto roster = sim::make_roster(sim_roster, opt.seed);
      const auto corpus =
          sim::generate_corpus(roster, parse_families(sim_families), sim_games_per_cell, opt.seed);
      io::write_corpus_csv(corpus, opt.out);
      std::cout << "wrote " << corpus.size() << " records to " << opt.out << '\n';
    } else if (ingest->parsed()) {
      const auto corpus = sim::ingest_corpus(ingest_in);
      long per_family[3] = {0, 0, 0};
      for (const auto& r : corpus) ++per_family[static_cast<int>(r.market.family)];
      std::cout << "ok: " << corpus.size() << " records (bargaining " << per_family[0]
                << ", negotiation " << per_family[1] << ", persuasion " << per_family[2]
                << ")\n";
    } else if (fit->parsed()) {
      if (opt.out.empty()) throw std::runtime_error("fit requires --out");
      const auto corpus = sim::ingest_corpus(fit_in);
      const auto family = games::family_from_name(fit_family);
      const auto bundle = regression::fit_all_targets(corpus, family);
      regression::save_bundle(bundle, opt.out);
      for (regression::Target t : regression::kAllTargets) {
        const auto& d = bundle.at(t).diagnostics;
        std::cout << regression::target_name(t) << ": rmse " << d.rmse << ", r2 " << d.r2
                  << ", rows " << d.rows << '\n';
      }
      std::cout << "wrote bundle to " << opt.out << '\n';
    } else if (tables_cmd->parsed()) {
      const auto bundle = regression::load_bundle(tables_coeffs);
      const auto tables = regression::build_payoff_tables(bundle, tables_market, tables_techs);
      const auto matrix_json = [](const Eigen::MatrixXd& m) {
        nlohmann::json rows = nlohmann::json::array();
        for (Eigen::Index i = 0; i < m.rows(); ++i) {
          nlohmann::json row = nlohmann::json::array();
          for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
          rows.push_back(std::move(row));
        }
        return rows;
      };
      const nlohmann::json j = {{"market", tables.market.market_id},
                                {"techs", tables.techs},
                                {"u_a", matrix_json(tables.u_a)},
                                {"u_b", matrix_json(tables.u_b)},
                                {"d_f", matrix_json(tables.d_f)},
                                {"d_e", matrix_json(tables.d_e)}};
      if (!opt.out.empty()) {
        write_json_file(j, opt.out);
        std::cout << "wrote tables to " << opt.out << '\n';
      } else {
        std::cout << j.dump(2) << '\n';
      }
    } else if (solve_cmd->parsed()) {
      const auto bundle = regression::load_bundle(solve_coeffs);
      const auto tables = regression::build_payoff_tables(bundle, solve_market_id, solve_techs);
      if (opt.verbose) {
        std::cout << "pivot trace, label 0:\n";
        nash::lemke_howson({tables.u_a, tables.u_b}, 0, &std::cout);
      }
      const auto solution = engine::solve_market(tables);
      nlohmann::json eqs = nlohmann::json::array();
      for (const auto& eq : solution.equilibria) {
        eqs.push_back({{"sigma_a", std::vector<double>(eq.sigma_a.begin(), eq.sigma_a.end())},
                       {"sigma_b", std::vector<double>(eq.sigma_b.begin(), eq.sigma_b.end())}});
      }
      const nlohmann::json j = {{"market", solution.market_id},
                                {"equilibria", std::move(eqs)},
                                {"avg_payoff_a", solution.avg_payoff_a},
                                {"avg_payoff_b", solution.avg_payoff_b},
                                {"avg_fairness", solution.avg_fairness},
                                {"avg_efficiency", solution.avg_efficiency}};
      if (!opt.out.empty()) {
        write_json_file(j, opt.out);
        std::cout << "wrote solution to " << opt.out << '\n';
      } else {
        std::cout << j.dump(2) << '\n';
      }
    } else if (meta_cmd->parsed()) {
      const auto bundle = regression::load_bundle(meta_coeffs);
      const auto result = engine::run_metagame(bundle, meta_techs,
                                               engine::objective_from_name(meta_objective));
      print_metagame_summary(result, opt.verbose);
      if (!opt.out.empty()) write_json_file(engine::metagame_result_to_json(result), opt.out);
    } else if (expand_cmd->parsed()) {
      const auto bundle = regression::load_bundle(expand_coeffs);
      engine::ClassifyOptions options;
      options.strict_adoption = expand_strict;
      const auto report = engine::expand_technology(
          bundle, expand_techs, expand_add, engine::objective_from_name(expand_objective),
          options);
      std::cout << "baseline:\n";
      print_metagame_summary(report.baseline, opt.verbose);
      std::cout << "expanded (+" << report.added_tech << "):\n";
      print_metagame_summary(report.expanded, opt.verbose);
      std::cout << "inertia objective at market " << report.baseline.chosen_market << ": "
                << report.inertia_objective << '\n';
      std::cout << "flags: opposite_change=" << report.flags.opposite_change
                << " new_tech_adopted=" << report.flags.new_tech_adopted
                << " poisoned_apple=" << report.flags.poisoned_apple
                << " objective_improved=" << report.flags.objective_improved
                << " inertia_harm=" << report.flags.inertia_harm << '\n';
      if (!opt.out.empty()) write_json_file(engine::report_to_json(report), opt.out);
    } else if (sweep_cmd->parsed()) {
      sweep_config.seed = opt.seed;
      sweep_config.families = parse_families(sweep_families);
      sweep_config.objectives.clear();
      for (const std::string& o : sweep_objectives)
        sweep_config.objectives.push_back(engine::objective_from_name(o));
      if (!sweep_coeffs_bargaining.empty())
        sweep_config.bundle_paths[games::Family::Bargaining] = sweep_coeffs_bargaining;
      if (!sweep_coeffs_negotiation.empty())
        sweep_config.bundle_paths[games::Family::Negotiation] = sweep_coeffs_negotiation;
      if (!sweep_coeffs_persuasion.empty())
        sweep_config.bundle_paths[games::Family::Persuasion] = sweep_coeffs_persuasion;
      const auto stats = harness::run_sweep(sweep_config);
      if (!opt.out.empty()) {
        harness::save_stats(stats, opt.out);
        std::cout << "wrote stats to " << opt.out << '\n';
      }
      if (!sweep_out_csv.empty()) {
        harness::emit_report_csv(stats, sweep_out_csv);
        std::cout << "wrote report to " << sweep_out_csv << '\n';
      }
      if (opt.out.empty() && sweep_out_csv.empty()) harness::emit_report_csv(stats, std::cout);
    } else if (report_cmd->parsed()) {
      const auto stats = harness::load_stats(report_in);
      if (report_format == "csv") {
        if (!opt.out.empty()) {
          harness::emit_report_csv(stats, opt.out);
          std::cout << "wrote report to " << opt.out << '\n';
        } else {
          harness::emit_report_csv(stats, std::cout);
        }
      } else {
        if (!opt.out.empty()) {
          write_json_file(harness::stats_to_json(stats), opt.out);
          std::cout << "wrote report to " << opt.out << '\n';
        } else {
          std::cout << harness::stats_to_json(stats).dump(2) << '\n';
        }
      }
    } else if (fixture_cmd->parsed()) {
      if (opt.out.empty()) throw std::runtime_error("fixture requires --out");
      regression::save_bundle(fixtures::demo_bundle(), opt.out);
      std::cout << "wrote demo bundle to " << opt.out << '\n';
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitData;
  }
  return kExitOk;
}
