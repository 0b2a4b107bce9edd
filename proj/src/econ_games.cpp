#include "metagame/econ_games.hpp"

#include <array>
#include <cmath>
#include <stdexcept>

namespace metagame::games {

const char* family_name(Family family) {
  switch (family) {
    case Family::Bargaining: return "bargaining";
    case Family::Negotiation: return "negotiation";
    case Family::Persuasion: return "persuasion";
  }
  throw std::invalid_argument("unknown family value");
}

Family family_from_name(const std::string& name) {
  if (name == "bargaining") return Family::Bargaining;
  if (name == "negotiation") return Family::Negotiation;
  if (name == "persuasion") return Family::Persuasion;
  throw std::invalid_argument("unknown family name: " + name);
}

Horizon Horizon::finite(int rounds) {
  if (rounds < 1) throw std::invalid_argument("finite horizon requires rounds >= 1");
  return Horizon{false, rounds};
}

Horizon Horizon::infinite() { return Horizon{true, 0}; }

void MarketConfig::validate() const {
  if (family == Family::Persuasion) {
    if (horizon.has_value()) throw std::invalid_argument("persuasion market carries no horizon");
    if (!myopic_buyer.has_value()) throw std::invalid_argument("persuasion market requires myopic_buyer");
  } else {
    if (!horizon.has_value()) throw std::invalid_argument("market requires a horizon");
    if (myopic_buyer.has_value()) throw std::invalid_argument("myopic_buyer is persuasion-only");
  }
  if (market_id < 1) throw std::invalid_argument("market_id is 1-based");
}

namespace {

// (complete_info, messages_allowed) in the grid order markets 1-8 follow:
// incomplete-information rows first, with the messages flag folding back so
// ids match the canonical table (1..4 incomplete, 5..8 complete).
constexpr std::array<std::pair<bool, bool>, 4> kInfoCommOrder = {{
    {false, false}, {false, true}, {true, true}, {true, false}}};

}  // namespace

std::vector<MarketConfig> enumerate_markets(Family family) {
  std::vector<MarketConfig> markets;
  markets.reserve(8);
  int id = 1;
  if (family == Family::Persuasion) {
    for (bool ci : {false, true})
      for (bool ma : {false, true})
        for (bool myopic : {false, true})
          markets.push_back(MarketConfig{family, id++, ci, ma, std::nullopt, myopic});
    return markets;
  }
  for (const auto& [ci, ma] : kInfoCommOrder)
    for (bool infinite : {false, true})
      markets.push_back(MarketConfig{
          family, id++, ci, ma,
          infinite ? Horizon::infinite() : Horizon::finite(kFiniteGridRounds),
          std::nullopt});
  return markets;
}

MarketConfig market_by_id(Family family, int market_id) {
  const auto markets = enumerate_markets(family);
  if (market_id < 1 || market_id > static_cast<int>(markets.size()))
    throw std::invalid_argument("market_id out of range for family");
  return markets[static_cast<std::size_t>(market_id - 1)];
}

Family outcome_family(const Outcome& outcome) {
  if (std::holds_alternative<BargainingOutcome>(outcome)) return Family::Bargaining;
  if (std::holds_alternative<NegotiationOutcome>(outcome)) return Family::Negotiation;
  return Family::Persuasion;
}

void validate_outcome(const Outcome& outcome, Family family) {
  if (outcome_family(outcome) != family)
    throw std::invalid_argument("outcome does not match family");
  if (const auto* b = std::get_if<BargainingOutcome>(&outcome)) {
    if (b->agreed) {
      if (b->round < 1) throw std::invalid_argument("agreement round must be >= 1");
      if (b->share < 0.0 || b->share > 1.0)
        throw std::invalid_argument("agreed share must lie in [0,1]");
    }
  } else if (const auto* p = std::get_if<PersuasionOutcome>(&outcome)) {
    if (p->rounds < 1) throw std::invalid_argument("persuasion game length must be >= 1");
    if (p->bought_high < 0 || p->bought_high > p->high_rounds ||
        p->high_rounds > p->rounds)
      throw std::invalid_argument("persuasion counts must satisfy 0 <= k <= n <= T");
    if (p->rejected_low < 0 || p->rejected_low > p->rounds - p->high_rounds)
      throw std::invalid_argument("persuasion counts must satisfy 0 <= r <= T - n");
  }
}

BargainingOutcome BargainingOutcome::agreement(int round, double share) {
  BargainingOutcome out{true, round, share};
  validate_outcome(out, Family::Bargaining);
  return out;
}

Payoffs bargaining_payoffs(int round, double share, const SituationParams& params) {
  if (round < 1) throw std::invalid_argument("round must be >= 1");
  if (share < 0.0 || share > 1.0) throw std::invalid_argument("share must lie in [0,1]");
  const double disc_a = std::pow(params.delta_a, round - 1);
  const double disc_b = std::pow(params.delta_b, round - 1);
  return {disc_a * share * params.m_scale, disc_b * (1.0 - share) * params.m_scale};
}

Payoffs bargaining_payoffs(const BargainingOutcome& outcome, const SituationParams& params) {
  if (!outcome.agreed) return {0.0, 0.0};
  return bargaining_payoffs(outcome.round, outcome.share, params);
}

Payoffs negotiation_payoffs(const NegotiationOutcome& outcome, const SituationParams& params) {
  if (!outcome.traded) return {0.0, 0.0};
  return {outcome.price - params.valuation_a(), params.valuation_b() - outcome.price};
}

Payoffs persuasion_payoffs(const PersuasionOutcome& outcome, int buys_low,
                           const SituationParams& params) {
  validate_outcome(Outcome{outcome}, Family::Persuasion);
  if (buys_low != outcome.bought_low())
    throw std::invalid_argument("buys_low inconsistent with (T - n) - r");
  const double sales = outcome.bought_high + buys_low;
  const double buyer = outcome.bought_high * params.m_scale * (params.v_value - 1.0) -
                       buys_low * params.m_scale;
  return {sales, buyer};
}

Payoffs game_payoffs(const Outcome& outcome, const SituationParams& params) {
  if (const auto* b = std::get_if<BargainingOutcome>(&outcome))
    return bargaining_payoffs(*b, params);
  if (const auto* n = std::get_if<NegotiationOutcome>(&outcome))
    return negotiation_payoffs(*n, params);
  const auto& p = std::get<PersuasionOutcome>(outcome);
  return persuasion_payoffs(p, p.bought_low(), params);
}

double efficiency(const Outcome& outcome, const SituationParams& params, Family family) {
  validate_outcome(outcome, family);
  switch (family) {
    case Family::Bargaining: {
      const auto& b = std::get<BargainingOutcome>(outcome);
      if (!b.agreed) return 0.0;  // total deadweight loss
      const double disc_a = std::pow(params.delta_a, b.round - 1);
      const double disc_b = std::pow(params.delta_b, b.round - 1);
      return disc_a * b.share + disc_b * (1.0 - b.share);
    }
    case Family::Negotiation: {
      const auto& n = std::get<NegotiationOutcome>(outcome);
      const bool beneficial = params.valuation_b() >= params.valuation_a();
      return (n.traded == beneficial) ? 1.0 : 0.0;
    }
    case Family::Persuasion: {
      const auto& p = std::get<PersuasionOutcome>(outcome);
      if (p.high_rounds == 0) return 1.0;  // vacuously efficient
      return static_cast<double>(p.bought_high) / p.high_rounds;
    }
  }
  throw std::invalid_argument("unknown family value");
}

double fairness(const Outcome& outcome, const SituationParams& params, Family family) {
  validate_outcome(outcome, family);
  switch (family) {
    case Family::Bargaining: {
      const auto& b = std::get<BargainingOutcome>(outcome);
      if (!b.agreed) return 1.0;  // both sides receive 0: equal
      const double dev = b.share - 0.5;
      return 1.0 - 4.0 * dev * dev;
    }
    case Family::Negotiation: {
      const auto& n = std::get<NegotiationOutcome>(outcome);
      if (!n.traded) return 1.0;
      const double fair_price = 0.5 * (params.valuation_a() + params.valuation_b());
      const double dev = (n.price - fair_price) / params.m_scale;
      return 1.0 - 4.0 * dev * dev;
    }
    case Family::Persuasion: {
      const auto& p = std::get<PersuasionOutcome>(outcome);
      const int low_rounds = p.rounds - p.high_rounds;
      if (low_rounds == 0) return 1.0;  // no deception opportunity
      return static_cast<double>(p.rejected_low) / low_rounds;
    }
  }
  throw std::invalid_argument("unknown family value");
}

Payoffs normalized_payoffs(const Outcome& outcome, const SituationParams& params,
                           Family family) {
  Payoffs raw = game_payoffs(outcome, params);
  if (family == Family::Bargaining) {
    raw.alice /= params.m_scale;
    raw.bob /= params.m_scale;
  }
  return raw;
}

}  // namespace metagame::games
