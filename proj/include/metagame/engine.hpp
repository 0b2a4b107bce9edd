#pragma once

#include <map>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "metagame/nash.hpp"
#include "metagame/regression.hpp"
#include "metagame/tables.hpp"

namespace metagame::engine {

// Equilibria of one market's technology game plus the uniform averages of
// their expected values.
struct MarketSolution {
  int market_id = 0;
  std::vector<nash::MixedProfile> equilibria;
  double avg_payoff_a = 0.0;
  double avg_payoff_b = 0.0;
  double avg_fairness = 0.0;
  double avg_efficiency = 0.0;

  double avg_objective(Objective objective) const {
    return objective == Objective::Fairness ? avg_fairness : avg_efficiency;
  }
};

// Uniform mean of the expected values across the given equilibria.
MarketSolution summarize_market(const PayoffTables& tables,
                                std::vector<nash::MixedProfile> equilibria);

MarketSolution solve_market(const PayoffTables& tables);

// argmax of the averaged objective; ties break to the lowest market_id.
int regulator_select(const std::vector<MarketSolution>& solutions, Objective objective);

struct MetaGameResult {
  Objective objective = Objective::Fairness;
  std::vector<std::string> techs;
  int chosen_market = 0;
  std::vector<MarketSolution> solutions;       // ascending market_id
  double payoff_a = 0.0;                       // averaged payoffs at m*
  double payoff_b = 0.0;
  double objective_value = 0.0;                // averaged objective at m*
  std::map<std::string, double> adoption;      // mean equilibrium mass at m*
  std::map<std::string, double> adoption_max;  // max over equilibria at m*

  const MarketSolution& solution_for(int market_id) const;
};

// Builds tables for every market in the bundle's grid, solves each, and
// applies the regulator's argmax.
MetaGameResult run_metagame(const regression::CoefficientBundle& bundle,
                            const std::vector<std::string>& techs, Objective objective);

struct ClassifyOptions {
  double eps_pay = 1e-6;
  double eps_adopt = 1e-6;
  // Strict reading of non-adoption: the new tech must be unused in every
  // equilibrium (max mass), not merely in the equilibrium average.
  bool strict_adoption = false;
};

struct ExpansionFlags {
  bool opposite_change = false;
  bool new_tech_adopted = false;
  bool poisoned_apple = false;
  bool objective_improved = false;
  bool inertia_harm = false;

  bool operator==(const ExpansionFlags&) const = default;
};

// Before/after view of releasing one technology, including the objective the
// regulator would suffer by keeping the baseline market (inertia).
struct ExpansionReport {
  Objective objective = Objective::Fairness;
  MetaGameResult baseline;
  MetaGameResult expanded;
  std::string added_tech;
  double inertia_objective = 0.0;
  ExpansionFlags flags;
};

// Pure function of the stored report numbers.
ExpansionFlags classify(const ExpansionReport& report, const ClassifyOptions& options = {});

ExpansionReport expand_technology(const regression::CoefficientBundle& bundle,
                                  const std::vector<std::string>& baseline_techs,
                                  const std::string& new_tech, Objective objective,
                                  const ClassifyOptions& options = {});

nlohmann::json metagame_result_to_json(const MetaGameResult& result);
nlohmann::json report_to_json(const ExpansionReport& report);

}  // namespace metagame::engine
