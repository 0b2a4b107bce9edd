#include "metagame/record_csv.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <ostream>
#include <sstream>

namespace metagame::io {

using games::Family;
using sim::GameRecord;
using sim::IngestError;

const char* const kRecordCsvHeader =
    "family,market_id,ci,ma,horizon,myopic,delta_a,delta_b,m_scale,f_a,f_b,"
    "prior_p,v_value,rounds_t,tech_a,tech_b,t_ev,p_ev,traded,n_ev,k_ev,r_ev,"
    "payoff_a,payoff_b,fairness,efficiency,seed";

namespace {

constexpr int kColumnCount = 27;
constexpr double kMetricTol = 1e-9;

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> fields;
  std::string current;
  for (char c : line) {
    if (c == ',') {
      fields.push_back(std::move(current));
      current.clear();
    } else if (c != '\r') {
      current.push_back(c);
    }
  }
  fields.push_back(std::move(current));
  return fields;
}

double parse_double(const std::string& s, long row, const char* name) {
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (s.empty() || end != s.c_str() + s.size() || !std::isfinite(v))
    throw IngestError(row, std::string("malformed numeric field ") + name + ": '" + s + "'");
  return v;
}

long parse_long(const std::string& s, long row, const char* name) {
  char* end = nullptr;
  const long v = std::strtol(s.c_str(), &end, 10);
  if (s.empty() || end != s.c_str() + s.size())
    throw IngestError(row, std::string("malformed integer field ") + name + ": '" + s + "'");
  return v;
}

std::uint64_t parse_u64(const std::string& s, long row, const char* name) {
  char* end = nullptr;
  const unsigned long long v = std::strtoull(s.c_str(), &end, 10);
  if (s.empty() || end != s.c_str() + s.size())
    throw IngestError(row, std::string("malformed integer field ") + name + ": '" + s + "'");
  return v;
}

bool parse_bool(const std::string& s, long row, const char* name) {
  if (s == "0") return false;
  if (s == "1") return true;
  throw IngestError(row, std::string("boolean field ") + name + " must be 0 or 1: '" + s + "'");
}

void require_empty(const std::string& s, long row, const char* name) {
  if (!s.empty())
    throw IngestError(row, std::string("field ") + name + " must be empty for this family");
}

void require_present(const std::string& s, long row, const char* name) {
  if (s.empty())
    throw IngestError(row, std::string("field ") + name + " is required for this family");
}

}  // namespace

std::string record_to_csv_row(const GameRecord& r) {
  const Family family = r.market.family;
  const bool persuasion = family == Family::Persuasion;
  const bool negotiation = family == Family::Negotiation;
  const bool bargaining = family == Family::Bargaining;
  const bool finite = !persuasion && !r.market.horizon->is_infinite;

  std::ostringstream out;
  out << games::family_name(family) << ',' << r.market.market_id << ','
      << (r.market.complete_info ? '1' : '0') << ',' << (r.market.messages_allowed ? '1' : '0')
      << ',';
  if (!persuasion) out << (r.market.horizon->is_infinite ? "infinite" : "finite");
  out << ',';
  if (persuasion) out << (*r.market.myopic_buyer ? '1' : '0');
  out << ',';
  out << (persuasion ? "" : fmt(r.situation.delta_a)) << ','
      << (persuasion ? "" : fmt(r.situation.delta_b)) << ',' << fmt(r.situation.m_scale) << ','
      << (negotiation ? fmt(r.situation.f_a) : "") << ','
      << (negotiation ? fmt(r.situation.f_b) : "") << ','
      << (persuasion ? fmt(r.situation.prior_p) : "") << ','
      << (persuasion ? fmt(r.situation.v_value) : "") << ','
      << ((persuasion || finite) ? std::to_string(r.situation.rounds_t) : "") << ','
      << r.tech_a << ',' << r.tech_b << ',';

  if (bargaining) {
    const auto& b = std::get<games::BargainingOutcome>(r.outcome);
    if (b.agreed) out << b.round;
    out << ',';
    if (b.agreed) out << fmt(b.share);
    out << ",,,,";
  } else if (negotiation) {
    const auto& n = std::get<games::NegotiationOutcome>(r.outcome);
    out << ',';
    if (n.traded) out << fmt(n.price);
    out << ',' << (n.traded ? '1' : '0') << ",,,";
  } else {
    const auto& p = std::get<games::PersuasionOutcome>(r.outcome);
    out << ",,," << p.high_rounds << ',' << p.bought_high << ',' << p.rejected_low;
  }
  out << ',' << fmt(r.payoff_a) << ',' << fmt(r.payoff_b) << ',' << fmt(r.fairness) << ','
      << fmt(r.efficiency) << ',' << r.seed;
  return out.str();
}

void write_corpus_csv(const std::vector<GameRecord>& records, std::ostream& out) {
  out << kRecordCsvHeader << '\n';
  for (const GameRecord& r : records) out << record_to_csv_row(r) << '\n';
}

void write_corpus_csv(const std::vector<GameRecord>& records, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open output file: " + path);
  write_corpus_csv(records, out);
}

GameRecord record_from_csv_row(const std::string& line, long row) {
  const std::vector<std::string> f = split_fields(line);
  if (static_cast<int>(f.size()) != kColumnCount)
    throw IngestError(row, "expected " + std::to_string(kColumnCount) + " fields, got " +
                               std::to_string(f.size()));

  GameRecord r;
  Family family;
  try {
    family = games::family_from_name(f[0]);
  } catch (const std::invalid_argument& e) {
    throw IngestError(row, e.what());
  }
  const bool persuasion = family == Family::Persuasion;
  const bool negotiation = family == Family::Negotiation;
  const bool bargaining = family == Family::Bargaining;

  const int market_id = static_cast<int>(parse_long(f[1], row, "market_id"));
  games::MarketConfig market;
  try {
    market = games::market_by_id(family, market_id);
  } catch (const std::invalid_argument& e) {
    throw IngestError(row, e.what());
  }
  // The structural columns are redundant with market_id; they must agree.
  if (parse_bool(f[2], row, "ci") != market.complete_info ||
      parse_bool(f[3], row, "ma") != market.messages_allowed)
    throw IngestError(row, "ci/ma columns disagree with market_id " + std::to_string(market_id));
  if (persuasion) {
    require_empty(f[4], row, "horizon");
    if (parse_bool(f[5], row, "myopic") != *market.myopic_buyer)
      throw IngestError(row, "myopic column disagrees with market_id");
  } else {
    require_empty(f[5], row, "myopic");
    const bool infinite = f[4] == "infinite";
    if (!infinite && f[4] != "finite")
      throw IngestError(row, "horizon must be 'finite' or 'infinite': '" + f[4] + "'");
    if (infinite != market.horizon->is_infinite)
      throw IngestError(row, "horizon column disagrees with market_id");
  }
  r.market = market;

  const bool finite = !persuasion && !market.horizon->is_infinite;
  if (persuasion) {
    require_empty(f[6], row, "delta_a");
    require_empty(f[7], row, "delta_b");
    require_empty(f[9], row, "f_a");
    require_empty(f[10], row, "f_b");
    require_present(f[11], row, "prior_p");
    require_present(f[12], row, "v_value");
    r.situation.prior_p = parse_double(f[11], row, "prior_p");
    r.situation.v_value = parse_double(f[12], row, "v_value");
  } else {
    require_present(f[6], row, "delta_a");
    require_present(f[7], row, "delta_b");
    r.situation.delta_a = parse_double(f[6], row, "delta_a");
    r.situation.delta_b = parse_double(f[7], row, "delta_b");
    require_empty(f[11], row, "prior_p");
    require_empty(f[12], row, "v_value");
    if (negotiation) {
      require_present(f[9], row, "f_a");
      require_present(f[10], row, "f_b");
      r.situation.f_a = parse_double(f[9], row, "f_a");
      r.situation.f_b = parse_double(f[10], row, "f_b");
    } else {
      require_empty(f[9], row, "f_a");
      require_empty(f[10], row, "f_b");
    }
  }
  require_present(f[8], row, "m_scale");
  r.situation.m_scale = parse_double(f[8], row, "m_scale");
  if (persuasion || finite) {
    require_present(f[13], row, "rounds_t");
    r.situation.rounds_t = static_cast<int>(parse_long(f[13], row, "rounds_t"));
    if (r.situation.rounds_t < 1) throw IngestError(row, "rounds_t must be >= 1");
  } else {
    require_empty(f[13], row, "rounds_t");
    r.situation.rounds_t = 0;
  }

  if (f[14].empty() || f[15].empty()) throw IngestError(row, "tech ids must be non-empty");
  r.tech_a = f[14];
  r.tech_b = f[15];

  if (bargaining) {
    require_empty(f[18], row, "traded");
    require_empty(f[19], row, "n_ev");
    require_empty(f[20], row, "k_ev");
    require_empty(f[21], row, "r_ev");
    if (f[16].empty() != f[17].empty())
      throw IngestError(row, "t_ev and p_ev must be both present or both empty");
    if (f[16].empty()) {
      r.outcome = games::BargainingOutcome::no_agreement();
    } else {
      const int t_ev = static_cast<int>(parse_long(f[16], row, "t_ev"));
      const double p_ev = parse_double(f[17], row, "p_ev");
      try {
        r.outcome = games::BargainingOutcome::agreement(t_ev, p_ev);
      } catch (const std::invalid_argument& e) {
        throw IngestError(row, e.what());
      }
      const int round_cap = finite ? r.situation.rounds_t : sim::kInfiniteRoundCap;
      if (t_ev > round_cap) throw IngestError(row, "t_ev exceeds the horizon");
    }
  } else if (negotiation) {
    require_empty(f[16], row, "t_ev");
    require_empty(f[19], row, "n_ev");
    require_empty(f[20], row, "k_ev");
    require_empty(f[21], row, "r_ev");
    const bool traded = parse_bool(f[18], row, "traded");
    if (traded != !f[17].empty())
      throw IngestError(row, "p_ev presence must match the traded flag");
    r.outcome = traded ? games::NegotiationOutcome::trade(parse_double(f[17], row, "p_ev"))
                       : games::NegotiationOutcome::no_trade();
  } else {
    require_empty(f[16], row, "t_ev");
    require_empty(f[17], row, "p_ev");
    require_empty(f[18], row, "traded");
    games::PersuasionOutcome p;
    p.rounds = r.situation.rounds_t;
    p.high_rounds = static_cast<int>(parse_long(f[19], row, "n_ev"));
    p.bought_high = static_cast<int>(parse_long(f[20], row, "k_ev"));
    p.rejected_low = static_cast<int>(parse_long(f[21], row, "r_ev"));
    r.outcome = p;
  }
  try {
    games::validate_outcome(r.outcome, family);
  } catch (const std::invalid_argument& e) {
    throw IngestError(row, e.what());
  }

  r.payoff_a = parse_double(f[22], row, "payoff_a");
  r.payoff_b = parse_double(f[23], row, "payoff_b");
  r.fairness = parse_double(f[24], row, "fairness");
  r.efficiency = parse_double(f[25], row, "efficiency");
  r.seed = parse_u64(f[26], row, "seed");

  const games::Payoffs payoffs = games::game_payoffs(r.outcome, r.situation);
  const double fair = games::fairness(r.outcome, r.situation, family);
  const double eff = games::efficiency(r.outcome, r.situation, family);
  if (std::abs(payoffs.alice - r.payoff_a) > kMetricTol ||
      std::abs(payoffs.bob - r.payoff_b) > kMetricTol)
    throw IngestError(row, "stored payoffs disagree with recomputation");
  if (std::abs(fair - r.fairness) > kMetricTol)
    throw IngestError(row, "stored fairness disagrees with recomputation");
  if (std::abs(eff - r.efficiency) > kMetricTol)
    throw IngestError(row, "stored efficiency disagrees with recomputation");
  return r;
}

std::vector<GameRecord> read_corpus_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw IngestError(0, "empty file: missing header");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != kRecordCsvHeader) throw IngestError(0, "header does not match the corpus schema");

  std::vector<GameRecord> records;
  long row = 0;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    ++row;
    records.push_back(record_from_csv_row(line, row));
  }
  return records;
}

}  // namespace metagame::io
