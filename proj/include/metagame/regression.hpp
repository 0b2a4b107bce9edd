#pragma once

#include <Eigen/Dense>
#include <map>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "metagame/agent_sim.hpp"
#include "metagame/tables.hpp"

namespace metagame::regression {

using games::Family;

enum class Target { PayoffA, PayoffB, Fairness, Efficiency };
constexpr std::array<Target, 4> kAllTargets = {Target::PayoffA, Target::PayoffB,
                                               Target::Fairness, Target::Efficiency};

const char* target_name(Target target);
Target target_from_name(const std::string& name);

using TechPair = std::pair<std::string, std::string>;

// Design-matrix layout: intercept, drop-first market indicators, drop-first
// ordered-pair indicators, mean-centered situational covariates.
struct FeatureSpec {
  std::vector<int> market_levels;            // first entry is the reference
  std::vector<TechPair> pair_levels;         // first entry is the reference
  std::vector<std::string> situational_names;
  std::vector<double> situational_means;     // centering constants

  int dimension() const;
  void validate() const;
  int market_index(int market_id) const;     // throws on unknown level
  int pair_index(const TechPair& pair) const;
  std::vector<std::string> column_names() const;
  bool operator==(const FeatureSpec&) const = default;
};

struct Diagnostics {
  double rmse = 0.0;
  double r2 = 0.0;
  long rows = 0;
  bool operator==(const Diagnostics&) const = default;
};

// Fitted linear model for one (family, target). Reference levels carry an
// explicit zero. beta_pair_market holds per-market pair adjustments; fits
// leave it empty, hand-constructed table bundles may populate it so that
// different markets can host different equilibria.
struct CoefficientSet {
  Family family = Family::Bargaining;
  Target target = Target::PayoffA;
  double beta0 = 0.0;
  std::map<int, double> beta_market;
  std::map<TechPair, double> beta_pair;
  std::map<std::string, double> beta_situation;
  std::map<int, std::map<TechPair, double>> beta_pair_market;
  FeatureSpec spec;
  Diagnostics diagnostics;

  bool operator==(const CoefficientSet&) const = default;
};

// Situational covariates used per family (game length enters as the
// indicator t_long = [rounds_t == 10]).
std::vector<std::string> covariate_names(Family family);
double covariate_value(const sim::GameRecord& record, const std::string& name);

// Regression target on the reporting scale (bargaining payoffs / M).
double target_value(const sim::GameRecord& record, Target target);

FeatureSpec make_feature_spec(const std::vector<sim::GameRecord>& corpus, Family family);

Eigen::VectorXd encode(const sim::GameRecord& record, const FeatureSpec& spec);

class RankDeficiencyError : public std::runtime_error {
 public:
  explicit RankDeficiencyError(std::vector<std::string> columns);
  const std::vector<std::string>& columns() const { return columns_; }

 private:
  std::vector<std::string> columns_;
};

// Ordinary least squares via column-pivoted QR; rank detection at 1e-10
// relative to the largest column norm. Throws RankDeficiencyError naming
// the collinear columns, or std::invalid_argument when rows < columns.
CoefficientSet fit(const std::vector<sim::GameRecord>& corpus, Family family, Target target,
                   const FeatureSpec& spec);

// beta0 + beta_market + beta_pair (+ the per-market pair adjustment when one
// is present); situational terms are deliberately omitted — with centered
// covariates this is the prediction at corpus-mean conditions.
double predict_pair(const CoefficientSet& coeffs, int market_id, const std::string& tech_a,
                    const std::string& tech_b);

struct CoefficientBundle {
  Family family = Family::Bargaining;
  std::map<Target, CoefficientSet> sets;

  const CoefficientSet& at(Target target) const;
  void validate() const;  // all four targets, shared family and levels
};

CoefficientBundle fit_all_targets(const std::vector<sim::GameRecord>& corpus, Family family);

engine::PayoffTables build_payoff_tables(const CoefficientBundle& bundle, int market_id,
                                         const std::vector<std::string>& techs);

nlohmann::json coefficient_set_to_json(const CoefficientSet& set);
CoefficientSet coefficient_set_from_json(const nlohmann::json& j);
nlohmann::json bundle_to_json(const CoefficientBundle& bundle);
CoefficientBundle bundle_from_json(const nlohmann::json& j);
void save_bundle(const CoefficientBundle& bundle, const std::string& path);
CoefficientBundle load_bundle(const std::string& path);

}  // namespace metagame::regression
