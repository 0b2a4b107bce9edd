#include "metagame/agent_sim.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <stdexcept>

#include "metagame/record_csv.hpp"

#include <fstream>

namespace metagame::sim {

using games::Family;
using games::MarketConfig;
using games::Outcome;
using games::SituationParams;

namespace {

void require_range(double value, double lo, double hi, const char* name) {
  if (!(value >= lo && value <= hi))
    throw std::invalid_argument(std::string(name) + " outside its allowed range");
}

double clamp01(double v) { return std::clamp(v, 0.0, 1.0); }

// Proposer's demanded own share in a bargaining round. Messages speed up
// concession; complete information lets the proposer press an impatient
// opponent.
double bargaining_demand(const BargainingPolicy& pol, int round, bool complete_info,
                         bool messages, double delta_self, double delta_opp) {
  const double concession = pol.concession_rate * (messages ? 1.5 : 1.0);
  double demand = pol.initial_demand - concession * (round - 1);
  if (complete_info) demand += 0.3 * (delta_self - delta_opp);
  return clamp01(demand);
}

games::BargainingOutcome play_bargaining(const MarketConfig& market,
                                         const SituationParams& situation,
                                         const TechPolicy& alice, const TechPolicy& bob,
                                         Rng& rng) {
  const bool infinite = market.horizon->is_infinite;
  const int max_rounds = infinite ? kInfiniteRoundCap : situation.rounds_t;
  for (int t = 1; t <= max_rounds; ++t) {
    const bool alice_proposes = (t % 2 == 1);
    const BargainingPolicy& prop = alice_proposes ? alice.bargaining : bob.bargaining;
    const BargainingPolicy& resp = alice_proposes ? bob.bargaining : alice.bargaining;
    const double delta_prop = alice_proposes ? situation.delta_a : situation.delta_b;
    const double delta_resp = alice_proposes ? situation.delta_b : situation.delta_a;

    const double demand = bargaining_demand(prop, t, market.complete_info,
                                            market.messages_allowed, delta_prop, delta_resp);
    const double offered = 1.0 - demand;
    const double threshold = resp.accept_threshold * std::pow(delta_resp, t - 1);
    if (offered >= threshold - 1e-12) {
      const double alice_share = alice_proposes ? demand : 1.0 - demand;
      return games::BargainingOutcome::agreement(t, alice_share);
    }
    if (infinite && !rng.bernoulli(kContinueProb)) break;
  }
  return games::BargainingOutcome::no_agreement();
}

games::NegotiationOutcome play_negotiation(const MarketConfig& market,
                                           const SituationParams& situation,
                                           const TechPolicy& alice, const TechPolicy& bob,
                                           Rng& rng) {
  const double va = situation.valuation_a();
  const double vb = situation.valuation_b();
  const double scale = situation.m_scale;
  const bool infinite = market.horizon->is_infinite;
  const int max_rounds = infinite ? kInfiniteRoundCap : situation.rounds_t;
  const double comm_factor = market.messages_allowed ? 0.5 : 1.0;

  for (int t = 1; t <= max_rounds; ++t) {
    if (t % 2 == 1) {
      // Seller posts an ask decaying toward her valuation.
      const NegotiationPolicy& pol = alice.negotiation;
      const double decay = std::pow(std::max(0.0, 1.0 - std::min(pol.concession_rate, 1.0)), t - 1);
      double ask = va * (1.0 + pol.markup * decay);
      if (market.complete_info && vb > va) ask = std::max(ask, 0.5 * (va + vb));
      const double buyer_reserve =
          vb - bob.negotiation.reservation_slack * comm_factor * scale *
                   std::pow(situation.delta_b, t - 1);
      if (ask <= buyer_reserve + 1e-12) return games::NegotiationOutcome::trade(ask);
    } else {
      const NegotiationPolicy& pol = bob.negotiation;
      const double decay = std::pow(std::max(0.0, 1.0 - std::min(pol.concession_rate, 1.0)), t - 1);
      double bid = std::max(0.0, vb * (1.0 - pol.markup * decay));
      if (market.complete_info) bid = std::min(vb, std::max(bid, va));
      const double seller_reserve =
          va + alice.negotiation.reservation_slack * comm_factor * scale *
                   std::pow(situation.delta_a, t - 1);
      if (bid >= seller_reserve - 1e-12) return games::NegotiationOutcome::trade(bid);
    }
    if (infinite && !rng.bernoulli(kContinueProb)) break;
  }
  return games::NegotiationOutcome::no_trade();
}

games::PersuasionOutcome play_persuasion(const MarketConfig& market,
                                         const SituationParams& situation,
                                         const TechPolicy& alice, const TechPolicy& bob,
                                         Rng& rng) {
  const bool myopic = market.myopic_buyer.value();
  const int total_rounds = situation.rounds_t;
  double trust = bob.persuasion.trust_threshold;  // running honesty estimate

  games::PersuasionOutcome out;
  out.rounds = total_rounds;
  for (int round = 1; round <= total_rounds; ++round) {
    const bool high = rng.bernoulli(situation.prior_p);
    if (high) ++out.high_rounds;

    double lie_prob = 1.0 - alice.persuasion.honesty_prob;
    if (market.complete_info)  // seller tailors deception to the known buyer value
      lie_prob = std::min(1.0, lie_prob * std::clamp(situation.v_value - 1.0, 0.5, 2.0));
    const bool signal_high = high || rng.bernoulli(lie_prob);

    double believed = myopic ? bob.persuasion.trust_threshold : trust;
    if (market.messages_allowed) believed = std::min(1.0, believed + 0.1);

    bool buy = false;
    if (signal_high) {
      // Posterior P(High | High signal) under the believed honesty; buy iff
      // the expected value covers the price: post*v >= 1.
      const double p = situation.prior_p;
      const double denom = p + (1.0 - p) * (1.0 - believed);
      const double posterior = denom > 0.0 ? p / denom : 1.0;
      buy = posterior * situation.v_value >= 1.0;
    }

    if (buy) {
      if (high) {
        ++out.bought_high;
        if (!myopic) trust = std::min(1.0, trust + 0.05);
      } else if (!myopic) {
        trust = std::max(0.0, trust - 0.25);
      }
    } else if (!high) {
      ++out.rejected_low;
    }
  }
  return out;
}

SituationParams draw_situation(const MarketConfig& market, Rng& rng) {
  SituationParams s;
  const bool finite = market.family != Family::Persuasion && !market.horizon->is_infinite;
  switch (market.family) {
    case Family::Bargaining:
      s.delta_a = rng.uniform(0.8, 0.99);
      s.delta_b = rng.uniform(0.8, 0.99);
      s.m_scale = rng.bernoulli(0.5) ? 1.0 : 100.0;
      break;
    case Family::Negotiation:
      s.delta_a = rng.uniform(0.8, 0.99);
      s.delta_b = rng.uniform(0.8, 0.99);
      s.m_scale = rng.bernoulli(0.5) ? 1.0 : 100.0;
      s.f_a = rng.uniform(0.5, 1.5);
      s.f_b = rng.uniform(s.f_a, s.f_a + 1.0);
      break;
    case Family::Persuasion:
      s.m_scale = rng.bernoulli(0.5) ? 1.0 : 100.0;
      s.prior_p = rng.uniform(0.3, 0.8);
      s.v_value = rng.uniform(1.2, 3.0);
      break;
  }
  if (market.family == Family::Persuasion || finite)
    s.rounds_t = rng.bernoulli(0.5) ? 4 : 10;
  else
    s.rounds_t = 0;  // not applicable under an infinite horizon
  return s;
}

}  // namespace

void TechPolicy::validate() const {
  if (tech_id.empty()) throw std::invalid_argument("tech_id must be non-empty");
  for (char c : tech_id)
    if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-'))
      throw std::invalid_argument("tech_id may use only [A-Za-z0-9_-]: " + tech_id);
  require_range(bargaining.initial_demand, 0.5, 1.0, "bargaining.initial_demand");
  if (bargaining.concession_rate < 0.0)
    throw std::invalid_argument("bargaining.concession_rate must be >= 0");
  require_range(bargaining.accept_threshold, 0.0, 1.0, "bargaining.accept_threshold");
  if (negotiation.markup < 0.0) throw std::invalid_argument("negotiation.markup must be >= 0");
  if (negotiation.concession_rate < 0.0)
    throw std::invalid_argument("negotiation.concession_rate must be >= 0");
  if (negotiation.reservation_slack < 0.0)
    throw std::invalid_argument("negotiation.reservation_slack must be >= 0");
  require_range(persuasion.honesty_prob, 0.0, 1.0, "persuasion.honesty_prob");
  require_range(persuasion.trust_threshold, 0.0, 1.0, "persuasion.trust_threshold");
}

GameRecord play_game(const MarketConfig& market, const SituationParams& situation,
                     const TechPolicy& alice, const TechPolicy& bob, Rng& rng) {
  market.validate();
  GameRecord record;
  record.market = market;
  record.situation = situation;
  record.tech_a = alice.tech_id;
  record.tech_b = bob.tech_id;
  switch (market.family) {
    case Family::Bargaining:
      record.outcome = play_bargaining(market, situation, alice, bob, rng);
      break;
    case Family::Negotiation:
      record.outcome = play_negotiation(market, situation, alice, bob, rng);
      break;
    case Family::Persuasion:
      record.outcome = play_persuasion(market, situation, alice, bob, rng);
      break;
  }
  const games::Payoffs payoffs = games::game_payoffs(record.outcome, situation);
  record.payoff_a = payoffs.alice;
  record.payoff_b = payoffs.bob;
  record.fairness = games::fairness(record.outcome, situation, market.family);
  record.efficiency = games::efficiency(record.outcome, situation, market.family);
  return record;
}

std::vector<std::string> roster_names(int size) {
  std::vector<std::string> names;
  names.reserve(static_cast<std::size_t>(size));
  for (int i = 0; i < size; ++i) {
    if (i < 26)
      names.emplace_back(1, static_cast<char>('A' + i));
    else
      names.push_back("T" + std::to_string(i + 1));
  }
  return names;
}

std::vector<TechPolicy> make_roster(int size, std::uint64_t seed) {
  if (size < 1) throw std::invalid_argument("roster size must be >= 1");
  const std::vector<std::string> names = roster_names(size);
  std::vector<TechPolicy> roster;
  roster.reserve(static_cast<std::size_t>(size));
  for (int i = 0; i < size; ++i) {
    Rng rng = Rng::stream(seed, static_cast<std::uint64_t>(i));
    TechPolicy pol;
    pol.tech_id = names[static_cast<std::size_t>(i)];
    pol.bargaining.initial_demand = rng.uniform(0.55, 0.95);
    pol.bargaining.concession_rate = rng.uniform(0.01, 0.12);
    pol.bargaining.accept_threshold = rng.uniform(0.2, 0.45);
    pol.negotiation.markup = rng.uniform(0.1, 0.8);
    pol.negotiation.concession_rate = rng.uniform(0.05, 0.3);
    pol.negotiation.reservation_slack = rng.uniform(0.0, 0.2);
    pol.persuasion.honesty_prob = rng.uniform(0.2, 1.0);
    pol.persuasion.trust_threshold = rng.uniform(0.3, 0.9);
    pol.validate();
    roster.push_back(std::move(pol));
  }
  return roster;
}

std::vector<GameRecord> generate_corpus(const std::vector<TechPolicy>& roster,
                                        const std::vector<games::Family>& families,
                                        int games_per_cell, std::uint64_t seed) {
  if (roster.size() < 2) throw std::invalid_argument("roster must contain at least 2 techs");
  if (games_per_cell < 0) throw std::invalid_argument("games_per_cell must be >= 0");
  for (const TechPolicy& pol : roster) pol.validate();

  std::vector<GameRecord> records;
  std::uint64_t cell_index = 0;
  for (const Family family : families) {
    for (const MarketConfig& market : games::enumerate_markets(family)) {
      for (const TechPolicy& alice : roster) {
        for (const TechPolicy& bob : roster) {
          const std::uint64_t cell_seed = Rng::splitmix64(seed ^ Rng::splitmix64(cell_index + 1));
          for (int g = 0; g < games_per_cell; ++g) {
            const std::uint64_t game_seed =
                Rng::splitmix64(cell_seed ^ Rng::splitmix64(static_cast<std::uint64_t>(g) + 1));
            Rng rng(game_seed);
            const SituationParams situation = draw_situation(market, rng);
            GameRecord record = play_game(market, situation, alice, bob, rng);
            record.seed = game_seed;
            records.push_back(std::move(record));
          }
          ++cell_index;
        }
      }
    }
  }
  return records;
}

IngestError::IngestError(long row, const std::string& message)
    : std::runtime_error("row " + std::to_string(row) + ": " + message), row_(row) {}

std::vector<GameRecord> ingest_corpus(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IngestError(0, "cannot open corpus file: " + path);
  return io::read_corpus_csv(in);
}

}  // namespace metagame::sim
