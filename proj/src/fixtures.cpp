#include "metagame/fixtures.hpp"

#include <array>

#include "metagame/agent_sim.hpp"
#include "metagame/rng.hpp"

namespace metagame::fixtures {

using regression::CoefficientBundle;
using regression::CoefficientSet;
using regression::FeatureSpec;
using regression::Target;
using regression::TechPair;

namespace {

FeatureSpec grid_spec(games::Family family, const std::vector<std::string>& techs) {
  FeatureSpec spec;
  for (const games::MarketConfig& m : games::enumerate_markets(family))
    spec.market_levels.push_back(m.market_id);
  for (const std::string& a : techs)
    for (const std::string& b : techs) spec.pair_levels.emplace_back(a, b);
  spec.validate();
  return spec;
}

CoefficientSet zero_set(games::Family family, Target target, const FeatureSpec& spec) {
  CoefficientSet set;
  set.family = family;
  set.target = target;
  set.spec = spec;
  for (int id : spec.market_levels) set.beta_market[id] = 0.0;
  for (const TechPair& p : spec.pair_levels) set.beta_pair[p] = 0.0;
  return set;
}

}  // namespace

CoefficientBundle demo_bundle() {
  const games::Family family = games::Family::Bargaining;
  const std::vector<std::string> techs = {"A", "B", "C", "D", "E"};
  const FeatureSpec spec = grid_spec(family, techs);

  // Alice's payoff is separable as row score + column nudge and Bob's as
  // column score + row nudge, so each market has one strictly dominant pure
  // profile: (argmax row score, argmax column score). E tops Alice's scores
  // in markets 3/4/5/7 only; Bob never ranks E first.
  constexpr std::array<std::array<double, 5>, 8> kRowScore = {{
      {0.470, 0.493, 0.455, 0.480, 0.460},   // market 1: B leads
      {0.455, 0.470, 0.484, 0.460, 0.440},   // market 2: C
      {0.492, 0.470, 0.455, 0.462, 0.505},   // market 3: A, then E
      {0.460, 0.452, 0.445, 0.490, 0.510},   // market 4: D, then E
      {0.455, 0.488, 0.470, 0.462, 0.500},   // market 5: B, then E
      {0.455, 0.470, 0.460, 0.490, 0.440},   // market 6: D
      {0.462, 0.455, 0.490, 0.470, 0.502},   // market 7: C, then E
      {0.517, 0.470, 0.460, 0.480, 0.450},   // market 8: A
  }};
  constexpr std::array<std::array<double, 5>, 8> kColScore = {{
      {0.480, 0.470, 0.498, 0.460, 0.440},   // market 1: C leads
      {0.470, 0.480, 0.460, 0.502, 0.430},   // market 2: D
      {0.470, 0.455, 0.497, 0.460, 0.430},   // market 3: C
      {0.496, 0.470, 0.460, 0.450, 0.420},   // market 4: A
      {0.460, 0.470, 0.455, 0.500, 0.430},   // market 5: D
      {0.470, 0.496, 0.455, 0.460, 0.430},   // market 6: B
      {0.470, 0.498, 0.460, 0.455, 0.430},   // market 7: B
      {0.430, 0.460, 0.440, 0.435, 0.410},   // market 8: B
  }};
  constexpr std::array<double, 5> kColNudge = {0.000, 0.003, -0.003, 0.006, -0.006};
  constexpr std::array<double, 5> kRowNudge = {0.000, 0.002, -0.002, 0.004, -0.004};
  // Market 4 only: Bob is hit hard when Alice fields E (0.50 -> 0.40).
  constexpr std::array<double, 5> kRowNudgeMarket4 = {0.000, 0.002, -0.002, 0.004, -0.096};

  // Fairness pins: (market, row, col, value). Equilibrium cells carry the
  // headline values; the off-equilibrium fill below never binds.
  struct Pin { int market; int row; int col; double value; };
  constexpr std::array<Pin, 12> kFairnessPins = {{
      {1, 1, 2, 0.975},
      {2, 2, 3, 0.965},
      {3, 0, 2, 0.989}, {3, 4, 2, 0.988},
      {4, 3, 0, 1.000}, {4, 4, 0, 0.976},
      {5, 1, 3, 0.977}, {5, 4, 3, 0.967},
      {6, 3, 1, 0.962},
      {7, 2, 1, 0.974}, {7, 4, 1, 0.959},
      {8, 0, 1, 0.990},
  }};

  CoefficientBundle bundle;
  bundle.family = family;
  for (Target target : regression::kAllTargets)
    bundle.sets.emplace(target, zero_set(family, target, spec));

  for (int market = 1; market <= 8; ++market) {
    const auto& row_score = kRowScore[static_cast<std::size_t>(market - 1)];
    const auto& col_score = kColScore[static_cast<std::size_t>(market - 1)];
    const auto& row_nudge = market == 4 ? kRowNudgeMarket4 : kRowNudge;
    for (int i = 0; i < 5; ++i) {
      for (int j = 0; j < 5; ++j) {
        const TechPair pair{techs[static_cast<std::size_t>(i)], techs[static_cast<std::size_t>(j)]};
        bundle.sets.at(Target::PayoffA).beta_pair_market[market][pair] =
            row_score[static_cast<std::size_t>(i)] + kColNudge[static_cast<std::size_t>(j)];
        bundle.sets.at(Target::PayoffB).beta_pair_market[market][pair] =
            col_score[static_cast<std::size_t>(j)] + row_nudge[static_cast<std::size_t>(i)];
        bundle.sets.at(Target::Fairness).beta_pair_market[market][pair] =
            0.940 + 0.004 * ((i + 2 * j + market) % 5);
        bundle.sets.at(Target::Efficiency).beta_pair_market[market][pair] =
            0.820 + 0.006 * ((2 * i + j + market) % 5) + 0.01 * (market % 3);
      }
    }
  }
  for (const Pin& pin : kFairnessPins) {
    const TechPair pair{techs[static_cast<std::size_t>(pin.row)],
                        techs[static_cast<std::size_t>(pin.col)]};
    bundle.sets.at(Target::Fairness).beta_pair_market[pin.market][pair] = pin.value;
  }
  bundle.validate();
  return bundle;
}

CoefficientBundle synthetic_bundle(games::Family family, std::uint64_t seed, int roster_size) {
  const std::vector<std::string> techs = sim::roster_names(roster_size);
  const FeatureSpec spec = grid_spec(family, techs);

  CoefficientBundle bundle;
  bundle.family = family;
  int target_index = 0;
  for (Target target : regression::kAllTargets) {
    Rng rng = Rng::stream(seed, static_cast<std::uint64_t>(target_index++) +
                                    1000 * static_cast<std::uint64_t>(family));
    CoefficientSet set = zero_set(family, target, spec);
    const bool payoff = target == Target::PayoffA || target == Target::PayoffB;
    set.beta0 = payoff ? 0.5 : 0.9;
    const double market_span = 0.02;
    const double pair_span = payoff ? 0.08 : 0.04;
    const double interaction_span = payoff ? 0.05 : 0.03;
    for (std::size_t i = 1; i < spec.market_levels.size(); ++i)
      set.beta_market[spec.market_levels[i]] = rng.uniform(-market_span, market_span);
    for (std::size_t i = 1; i < spec.pair_levels.size(); ++i)
      set.beta_pair[spec.pair_levels[i]] = rng.uniform(-pair_span, pair_span);
    for (int market : spec.market_levels)
      for (const TechPair& pair : spec.pair_levels)
        set.beta_pair_market[market][pair] = rng.uniform(-interaction_span, interaction_span);
    bundle.sets.emplace(target, std::move(set));
  }
  bundle.validate();
  return bundle;
}

CoefficientBundle duplicate_tech_bundle(games::Family family, int roster_size) {
  const std::vector<std::string> techs = sim::roster_names(roster_size);
  const FeatureSpec spec = grid_spec(family, techs);
  CoefficientBundle bundle;
  bundle.family = family;
  for (Target target : regression::kAllTargets) {
    CoefficientSet set = zero_set(family, target, spec);
    const bool payoff = target == Target::PayoffA || target == Target::PayoffB;
    set.beta0 = payoff ? 0.5 : 0.9;
    int id = 0;
    for (int market : spec.market_levels)
      set.beta_market[market] = 0.001 * id++;  // distinct markets, identical techs
    bundle.sets.emplace(target, std::move(set));
  }
  bundle.validate();
  return bundle;
}

}  // namespace metagame::fixtures
