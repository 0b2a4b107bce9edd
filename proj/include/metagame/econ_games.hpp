#pragma once

#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace metagame::games {

enum class Family { Bargaining, Negotiation, Persuasion };

const char* family_name(Family family);
Family family_from_name(const std::string& name);  // throws std::invalid_argument

// Game horizon: a finite number of rounds or an open-ended game.
struct Horizon {
  bool is_infinite = false;
  int rounds = 0;  // meaningful only when finite; > 0

  static Horizon finite(int rounds);
  static Horizon infinite();
  bool operator==(const Horizon&) const = default;
};

// One structural market: the rule configuration the regulator chooses among.
// market_id is the 1-based position in the family's enumeration grid.
struct MarketConfig {
  Family family = Family::Bargaining;
  int market_id = 0;
  bool complete_info = false;    // CI: opponent parameter visible to policies
  bool messages_allowed = false; // MA: communication permitted
  std::optional<Horizon> horizon;     // bargaining/negotiation only
  std::optional<bool> myopic_buyer;   // persuasion only

  bool operator==(const MarketConfig&) const = default;
  void validate() const;  // field-presence invariants per family
};

// Representative horizon length used for the structural "Finite" grid cell.
inline constexpr int kFiniteGridRounds = 10;

// Markets in grid order. Bargaining and Negotiation use the
// incomplete-first 8-cell (CI, MA) x {finite, infinite} order; Persuasion
// uses (CI, MA, MYOPIC) lexicographic with the same incomplete-first
// convention.
std::vector<MarketConfig> enumerate_markets(Family family);
MarketConfig market_by_id(Family family, int market_id);

// Per-game economic parameters. Fields irrelevant to a record's family are
// ignored. rounds_t is the game length for finite-horizon and persuasion
// games (unused under an infinite horizon).
struct SituationParams {
  double delta_a = 0.9;   // discount factors, in (0,1)
  double delta_b = 0.9;
  double m_scale = 1.0;   // surplus / valuation scale M > 0
  double f_a = 1.0;       // valuation factors, V_i = M * F_i (negotiation)
  double f_b = 1.0;
  double prior_p = 0.5;   // P(High quality) prior (persuasion)
  double v_value = 2.0;   // buyer's High-quality valuation v > 1 (persuasion)
  int rounds_t = kFiniteGridRounds;

  double valuation_a() const { return m_scale * f_a; }
  double valuation_b() const { return m_scale * f_b; }
  bool operator==(const SituationParams&) const = default;
};

// Persuasion price and Low-quality value are fixed by normalization.
inline constexpr double kPersuasionPrice = 1.0;
inline constexpr double kLowQualityValue = 0.0;

struct BargainingOutcome {
  bool agreed = false;
  int round = 0;      // agreement round t_ev >= 1, valid when agreed
  double share = 0.0; // Alice's share p_ev in [0,1], valid when agreed

  static BargainingOutcome agreement(int round, double share);
  static BargainingOutcome no_agreement() { return {}; }
  bool operator==(const BargainingOutcome&) const = default;
};

struct NegotiationOutcome {
  bool traded = false;
  double price = 0.0;  // p_ev, valid when traded

  static NegotiationOutcome trade(double price) { return {true, price}; }
  static NegotiationOutcome no_trade() { return {}; }
  bool operator==(const NegotiationOutcome&) const = default;
};

struct PersuasionOutcome {
  int rounds = 0;        // T
  int high_rounds = 0;   // n_ev: rounds with a High-quality product
  int bought_high = 0;   // k_ev: purchased High
  int rejected_low = 0;  // r_ev: rejected Low

  int bought_low() const { return rounds - high_rounds - rejected_low; }
  bool operator==(const PersuasionOutcome&) const = default;
};

using Outcome = std::variant<BargainingOutcome, NegotiationOutcome, PersuasionOutcome>;

Family outcome_family(const Outcome& outcome);
// Throws std::invalid_argument on family mismatch or count/range violations.
void validate_outcome(const Outcome& outcome, Family family);

struct Payoffs {
  double alice = 0.0;
  double bob = 0.0;
  bool operator==(const Payoffs&) const = default;
};

// u_a = delta_a^(t-1) * p * M, u_b = delta_b^(t-1) * (1-p) * M.
Payoffs bargaining_payoffs(int round, double share, const SituationParams& params);
Payoffs bargaining_payoffs(const BargainingOutcome& outcome, const SituationParams& params);

// Trade at price p: (p - V_A, V_B - p); no trade: (0, 0).
Payoffs negotiation_payoffs(const NegotiationOutcome& outcome, const SituationParams& params);

// Seller earns one unit per sale; buyer gains M(v-1) per High purchase and
// loses M per Low purchase. buys_low must equal (T - n) - r.
Payoffs persuasion_payoffs(const PersuasionOutcome& outcome, int buys_low,
                           const SituationParams& params);

Payoffs game_payoffs(const Outcome& outcome, const SituationParams& params);

// Regulatory metrics. Vacuous persuasion cases (no High rounds for
// efficiency, no Low rounds for fairness) are defined as 1, matching the
// no-agreement / no-trade conventions of the other families.
double efficiency(const Outcome& outcome, const SituationParams& params, Family family);
double fairness(const Outcome& outcome, const SituationParams& params, Family family);

// Payoffs on the reporting scale: bargaining divides by M so values live on
// the per-unit [0,1] scale; other families are unchanged.
Payoffs normalized_payoffs(const Outcome& outcome, const SituationParams& params, Family family);

}  // namespace metagame::games
