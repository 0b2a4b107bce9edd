#include "metagame/engine.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace metagame::engine {

const char* objective_name(Objective objective) {
  return objective == Objective::Fairness ? "fairness" : "efficiency";
}

Objective objective_from_name(const std::string& name) {
  if (name == "fairness") return Objective::Fairness;
  if (name == "efficiency") return Objective::Efficiency;
  throw std::invalid_argument("unknown objective name: " + name);
}

void PayoffTables::validate() const {
  const Eigen::Index n = static_cast<Eigen::Index>(techs.size());
  if (n < 1) throw std::invalid_argument("tables need at least one tech");
  for (const Eigen::MatrixXd* m : {&u_a, &u_b, &d_f, &d_e})
    if (m->rows() != n || m->cols() != n)
      throw std::invalid_argument("table dimensions disagree with the tech list");
  market.validate();
}

MarketSolution summarize_market(const PayoffTables& tables,
                                std::vector<nash::MixedProfile> equilibria) {
  if (equilibria.empty()) throw std::invalid_argument("need at least one equilibrium");
  MarketSolution solution;
  solution.market_id = tables.market.market_id;
  solution.equilibria = std::move(equilibria);
  const double count = static_cast<double>(solution.equilibria.size());
  for (const nash::MixedProfile& eq : solution.equilibria) {
    solution.avg_payoff_a += nash::expected_value(eq, tables.u_a);
    solution.avg_payoff_b += nash::expected_value(eq, tables.u_b);
    solution.avg_fairness += nash::expected_value(eq, tables.d_f);
    solution.avg_efficiency += nash::expected_value(eq, tables.d_e);
  }
  solution.avg_payoff_a /= count;
  solution.avg_payoff_b /= count;
  solution.avg_fairness /= count;
  solution.avg_efficiency /= count;
  return solution;
}

MarketSolution solve_market(const PayoffTables& tables) {
  tables.validate();
  return summarize_market(tables, nash::enumerate_equilibria({tables.u_a, tables.u_b}));
}

int regulator_select(const std::vector<MarketSolution>& solutions, Objective objective) {
  if (solutions.empty()) throw std::invalid_argument("no market solutions to select from");
  const MarketSolution* best = &solutions.front();
  for (const MarketSolution& s : solutions) {
    const bool better = s.avg_objective(objective) > best->avg_objective(objective);
    const bool tie_lower =
        s.avg_objective(objective) == best->avg_objective(objective) && s.market_id < best->market_id;
    if (better || tie_lower) best = &s;
  }
  return best->market_id;
}

const MarketSolution& MetaGameResult::solution_for(int market_id) const {
  for (const MarketSolution& s : solutions)
    if (s.market_id == market_id) return s;
  throw std::out_of_range("no solution for market " + std::to_string(market_id));
}

MetaGameResult run_metagame(const regression::CoefficientBundle& bundle,
                            const std::vector<std::string>& techs, Objective objective) {
  if (techs.size() < 2) throw std::invalid_argument("meta-game needs at least 2 techs");
  bundle.validate();

  MetaGameResult result;
  result.objective = objective;
  result.techs = techs;

  std::vector<int> market_ids = bundle.at(regression::Target::PayoffA).spec.market_levels;
  std::sort(market_ids.begin(), market_ids.end());
  for (const int market_id : market_ids)
    result.solutions.push_back(
        solve_market(regression::build_payoff_tables(bundle, market_id, techs)));

  result.chosen_market = regulator_select(result.solutions, objective);
  const MarketSolution& chosen = result.solution_for(result.chosen_market);
  result.payoff_a = chosen.avg_payoff_a;
  result.payoff_b = chosen.avg_payoff_b;
  result.objective_value = chosen.avg_objective(objective);

  const double count = static_cast<double>(chosen.equilibria.size());
  for (std::size_t k = 0; k < techs.size(); ++k) {
    double mass = 0.0;
    double mass_max = 0.0;
    for (const nash::MixedProfile& eq : chosen.equilibria) {
      const double m = eq.sigma_a(static_cast<Eigen::Index>(k)) +
                       eq.sigma_b(static_cast<Eigen::Index>(k));
      mass += m;
      mass_max = std::max(mass_max, m);
    }
    result.adoption[techs[k]] = mass / count;
    result.adoption_max[techs[k]] = mass_max;
  }
  return result;
}

ExpansionFlags classify(const ExpansionReport& report, const ClassifyOptions& options) {
  ExpansionFlags flags;
  const double delta_a = report.expanded.payoff_a - report.baseline.payoff_a;
  const double delta_b = report.expanded.payoff_b - report.baseline.payoff_b;
  flags.opposite_change = delta_a * delta_b < 0.0 && std::abs(delta_a) > options.eps_pay &&
                          std::abs(delta_b) > options.eps_pay;
  const auto& adoption =
      options.strict_adoption ? report.expanded.adoption_max : report.expanded.adoption;
  flags.new_tech_adopted = adoption.at(report.added_tech) > options.eps_adopt;
  flags.poisoned_apple = flags.opposite_change && !flags.new_tech_adopted;
  flags.objective_improved =
      report.expanded.objective_value > report.baseline.objective_value + options.eps_pay;
  flags.inertia_harm =
      report.inertia_objective < report.baseline.objective_value - options.eps_pay;
  return flags;
}

ExpansionReport expand_technology(const regression::CoefficientBundle& bundle,
                                  const std::vector<std::string>& baseline_techs,
                                  const std::string& new_tech, Objective objective,
                                  const ClassifyOptions& options) {
  if (std::find(baseline_techs.begin(), baseline_techs.end(), new_tech) != baseline_techs.end())
    throw std::invalid_argument("new tech is already in the baseline set: " + new_tech);

  ExpansionReport report;
  report.objective = objective;
  report.added_tech = new_tech;
  report.baseline = run_metagame(bundle, baseline_techs, objective);

  std::vector<std::string> expanded_techs = baseline_techs;
  expanded_techs.push_back(new_tech);
  report.expanded = run_metagame(bundle, expanded_techs, objective);

  report.inertia_objective =
      report.expanded.solution_for(report.baseline.chosen_market).avg_objective(objective);
  report.flags = classify(report, options);
  return report;
}

nlohmann::json metagame_result_to_json(const MetaGameResult& result) {
  nlohmann::json solutions = nlohmann::json::array();
  for (const MarketSolution& s : result.solutions) {
    solutions.push_back({{"market", s.market_id},
                         {"equilibria", s.equilibria.size()},
                         {"avg_payoff_a", s.avg_payoff_a},
                         {"avg_payoff_b", s.avg_payoff_b},
                         {"avg_fairness", s.avg_fairness},
                         {"avg_efficiency", s.avg_efficiency}});
  }
  return {{"techs", result.techs},
          {"market", result.chosen_market},
          {"payoffs", {result.payoff_a, result.payoff_b}},
          {"objective", result.objective_value},
          {"adoption", result.adoption},
          {"adoption_max", result.adoption_max},
          {"markets", std::move(solutions)}};
}

nlohmann::json report_to_json(const ExpansionReport& report) {
  nlohmann::json baseline = metagame_result_to_json(report.baseline);
  baseline.erase("adoption");
  baseline.erase("adoption_max");
  return {{"objective", objective_name(report.objective)},
          {"baseline", std::move(baseline)},
          {"expanded", metagame_result_to_json(report.expanded)},
          {"added_tech", report.added_tech},
          {"inertia_objective", report.inertia_objective},
          {"flags",
           {{"opposite_change", report.flags.opposite_change},
            {"new_tech_adopted", report.flags.new_tech_adopted},
            {"poisoned_apple", report.flags.poisoned_apple},
            {"objective_improved", report.flags.objective_improved},
            {"inertia_harm", report.flags.inertia_harm}}}};
}

}  // namespace metagame::engine
