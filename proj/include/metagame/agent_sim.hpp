#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "metagame/econ_games.hpp"
#include "metagame/rng.hpp"

namespace metagame::sim {

// Per-family behavioral parameters of one synthetic technology.
struct BargainingPolicy {
  double initial_demand = 0.7;   // own opening share, in [0.5, 1]
  double concession_rate = 0.05; // share conceded per round, >= 0
  double accept_threshold = 0.4; // minimum acceptable share, in [0, 1]
};

struct NegotiationPolicy {
  double markup = 0.5;            // relative opening margin over valuation, >= 0
  double concession_rate = 0.1;   // per-round decay of the margin, >= 0
  double reservation_slack = 0.1; // required surplus margin in M units, >= 0
};

struct PersuasionPolicy {
  double honesty_prob = 0.7;    // seller: P(truthful signal | Low quality)
  double trust_threshold = 0.5; // buyer: assumed seller honesty
};

struct TechPolicy {
  std::string tech_id;
  BargainingPolicy bargaining;
  NegotiationPolicy negotiation;
  PersuasionPolicy persuasion;

  void validate() const;  // parameter ranges and id charset
};

// One played (or ingested) game with its recomputable metrics. payoff_a and
// payoff_b are on the raw scale; the regression layer converts bargaining
// payoffs to the per-unit reporting scale.
struct GameRecord {
  games::MarketConfig market;
  games::SituationParams situation;
  std::string tech_a;
  std::string tech_b;
  games::Outcome outcome;
  double payoff_a = 0.0;
  double payoff_b = 0.0;
  double fairness = 0.0;
  double efficiency = 0.0;
  std::uint64_t seed = 0;

  bool operator==(const GameRecord&) const = default;
};

// Infinite horizons run as an extended game with stochastic termination:
// continuation probability 0.9 per round, hard cap of 50 rounds; hitting
// the cap counts as no agreement / no trade.
inline constexpr double kContinueProb = 0.9;
inline constexpr int kInfiniteRoundCap = 50;

// Plays one game under the market's protocol. Deterministic given the rng
// state; policy decisions themselves are deterministic, randomness enters
// through quality draws and infinite-horizon termination.
GameRecord play_game(const games::MarketConfig& market, const games::SituationParams& situation,
                     const TechPolicy& alice, const TechPolicy& bob, Rng& rng);

// Derives `size` heterogeneous policies from a seed; ids are "A", "B", ...
std::vector<TechPolicy> make_roster(int size, std::uint64_t seed);
std::vector<std::string> roster_names(int size);

// All markets x ordered tech pairs x games_per_cell, with situational
// parameters drawn per game. Each game's stream derives from (seed, cell,
// game index), so any parallel split reproduces the serial corpus.
std::vector<GameRecord> generate_corpus(const std::vector<TechPolicy>& roster,
                                        const std::vector<games::Family>& families,
                                        int games_per_cell, std::uint64_t seed);

// Thrown by ingest_corpus with the offending 1-based data row.
class IngestError : public std::runtime_error {
 public:
  IngestError(long row, const std::string& message);
  long row() const { return row_; }

 private:
  long row_;
};

// Reads a game-records CSV, validating outcome invariants and recomputing
// every metric (mismatch beyond 1e-9 is rejected).
std::vector<GameRecord> ingest_corpus(const std::string& path);

}  // namespace metagame::sim
