#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "metagame/engine.hpp"
#include "metagame/fixtures.hpp"

namespace metagame::harness {

struct SweepConfig {
  std::vector<games::Family> families = {games::Family::Bargaining};
  std::vector<engine::Objective> objectives = {engine::Objective::Fairness,
                                               engine::Objective::Efficiency};
  int roster_size = 13;
  std::vector<int> subset_sizes = {2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 12};
  int experiments_per_cell = 0;
  std::uint64_t seed = 0;
  bool strict_adoption = false;
  std::map<games::Family, std::string> bundle_paths;  // else synthetic from seed

  void validate() const;  // 2 <= N < roster_size for every subset size
};

// The six frequencies reported per (family, objective) cell:
//   A opposite payoff changes            (of all experiments)
//   B poisoned apples                    (of opposite changes)
//   C objective improvements             (of all experiments)
//   D adoption given improvement         (of improvements)
//   E non-adoption given harm            (of objective decreases)
//   F inertia harm                       (of all experiments)
inline constexpr std::array<const char*, 6> kPanelNames = {"A", "B", "C", "D", "E", "F"};

struct PanelStat {
  long long numerator = 0;
  long long denominator = 0;
  double frequency = 0.0;  // NaN when the denominator is empty
  double ci_lo = 0.0;
  double ci_hi = 1.0;
};

struct CellStats {
  games::Family family = games::Family::Bargaining;
  engine::Objective objective = engine::Objective::Fairness;
  long long experiments = 0;
  long long optimality_violations = 0;  // expanded objective below inertia
  std::array<PanelStat, 6> panels;
};

struct SweepStats {
  std::vector<CellStats> cells;
};

// Per-experiment classification results; integer counting keeps aggregation
// order-independent bit for bit.
struct ExperimentFlags {
  bool opposite_change = false;
  bool poisoned_apple = false;
  bool improved = false;
  bool harmed = false;
  bool adopted = false;
  bool inertia_harm = false;
  bool optimality_ok = true;
};

CellStats aggregate_cell(games::Family family, engine::Objective objective,
                         const std::vector<ExperimentFlags>& outcomes);

ExperimentFlags classify_experiment(const engine::ExpansionReport& report,
                                    const engine::ClassifyOptions& options = {});

SweepStats run_sweep(const SweepConfig& config);
SweepStats run_sweep(const SweepConfig& config,
                     const std::map<games::Family, regression::CoefficientBundle>& bundles);

// Wilson score interval; (0, 0) yields (0, 1) by convention.
std::pair<double, double> wilson_interval(long long successes, long long trials,
                                          double confidence = 0.95);

void emit_report_csv(const SweepStats& stats, std::ostream& out);
void emit_report_csv(const SweepStats& stats, const std::string& path);
nlohmann::json stats_to_json(const SweepStats& stats);
SweepStats stats_from_json(const nlohmann::json& j);
void save_stats(const SweepStats& stats, const std::string& path);
SweepStats load_stats(const std::string& path);

// Worker count: METAGAME_THREADS when set, else the hardware concurrency.
int default_thread_count();

}  // namespace metagame::harness
