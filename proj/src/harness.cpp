#include "metagame/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <limits>
#include <mutex>
#include <ostream>
#include <stdexcept>
#include <thread>
#include <tuple>

#include "metagame/rng.hpp"

namespace metagame::harness {

namespace {

constexpr double kObjectiveEps = 1e-6;
constexpr double kOptimalityTol = 1e-9;

// Inverse standard-normal CDF (Acklam's rational approximation); only used
// for confidences other than the pinned 0.95.
double normal_quantile(double p) {
  static const double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                             -2.759285104469687e+02, 1.383577518672690e+02,
                             -3.066479806614716e+01, 2.506628277459239e+00};
  static const double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                             -1.556989798598866e+02, 6.680131188771972e+01,
                             -1.328068155288572e+01};
  static const double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                             -2.400758277161838e+00, -2.549732539343734e+00,
                             4.374664141464968e+00,  2.938163982698783e+00};
  static const double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                             2.445134137142996e+00, 3.754408661907416e+00};
  if (!(p > 0.0 && p < 1.0)) throw std::invalid_argument("quantile needs p in (0,1)");
  const double plow = 0.02425;
  if (p < plow) {
    const double q = std::sqrt(-2.0 * std::log(p));
    return (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
           ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }
  if (p > 1.0 - plow) {
    const double q = std::sqrt(-2.0 * std::log(1.0 - p));
    return -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
           ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }
  const double q = p - 0.5;
  const double r = q * q;
  return (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
         (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
}

void parallel_for(int count, int threads, const std::function<void(int)>& body) {
  threads = std::max(1, std::min(threads, count));
  if (threads <= 1) {
    for (int i = 0; i < count; ++i) body(i);
    return;
  }
  std::atomic<int> next{0};
  std::atomic<bool> failed{false};
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(threads));
  for (int t = 0; t < threads; ++t) {
    pool.emplace_back([&] {
      for (;;) {
        const int i = next.fetch_add(1);
        if (i >= count || failed.load()) return;
        try {
          body(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(error_mutex);
          if (!error) error = std::current_exception();
          failed.store(true);
          return;
        }
      }
    });
  }
  for (std::thread& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

PanelStat make_panel(long long numerator, long long denominator) {
  PanelStat p;
  p.numerator = numerator;
  p.denominator = denominator;
  if (denominator > 0) {
    p.frequency = static_cast<double>(numerator) / static_cast<double>(denominator);
    std::tie(p.ci_lo, p.ci_hi) = wilson_interval(numerator, denominator);
  } else {
    p.frequency = std::numeric_limits<double>::quiet_NaN();
    p.ci_lo = std::numeric_limits<double>::quiet_NaN();
    p.ci_hi = std::numeric_limits<double>::quiet_NaN();
  }
  return p;
}

std::string fmt(double v) {
  if (std::isnan(v)) return "nan";
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.9g", v);
  return buf;
}

}  // namespace

int default_thread_count() {
  if (const char* env = std::getenv("METAGAME_THREADS")) {
    const int n = std::atoi(env);
    if (n >= 1) return std::min(n, 256);
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(std::min(hw, 64u));
}

void SweepConfig::validate() const {
  if (families.empty() || objectives.empty())
    throw std::invalid_argument("sweep needs at least one family and one objective");
  if (roster_size < 3) throw std::invalid_argument("sweep roster must have at least 3 techs");
  if (subset_sizes.empty()) throw std::invalid_argument("sweep needs at least one subset size");
  for (int n : subset_sizes)
    if (n < 2 || n >= roster_size)
      throw std::invalid_argument("subset sizes must satisfy 2 <= N < roster_size");
  if (experiments_per_cell < 0)
    throw std::invalid_argument("experiments_per_cell must be >= 0");
}

ExperimentFlags classify_experiment(const engine::ExpansionReport& report,
                                    const engine::ClassifyOptions& options) {
  ExperimentFlags f;
  f.opposite_change = report.flags.opposite_change;
  f.poisoned_apple = report.flags.poisoned_apple;
  f.improved = report.flags.objective_improved;
  f.harmed = report.expanded.objective_value <
             report.baseline.objective_value - options.eps_pay;
  f.adopted = report.flags.new_tech_adopted;
  f.inertia_harm = report.flags.inertia_harm;
  f.optimality_ok = report.expanded.objective_value >= report.inertia_objective - kOptimalityTol;
  return f;
}

CellStats aggregate_cell(games::Family family, engine::Objective objective,
                         const std::vector<ExperimentFlags>& outcomes) {
  long long opposite = 0, poisoned = 0, improved = 0, harmed = 0;
  long long improved_adopted = 0, harmed_unadopted = 0, inertia = 0, violations = 0;
  for (const ExperimentFlags& f : outcomes) {
    opposite += f.opposite_change;
    poisoned += f.poisoned_apple;
    improved += f.improved;
    harmed += f.harmed;
    improved_adopted += f.improved && f.adopted;
    harmed_unadopted += f.harmed && !f.adopted;
    inertia += f.inertia_harm;
    violations += !f.optimality_ok;
  }
  const long long n = static_cast<long long>(outcomes.size());
  CellStats cell;
  cell.family = family;
  cell.objective = objective;
  cell.experiments = n;
  cell.optimality_violations = violations;
  cell.panels[0] = make_panel(opposite, n);
  cell.panels[1] = make_panel(poisoned, opposite);
  cell.panels[2] = make_panel(improved, n);
  cell.panels[3] = make_panel(improved_adopted, improved);
  cell.panels[4] = make_panel(harmed_unadopted, harmed);
  cell.panels[5] = make_panel(inertia, n);
  return cell;
}

SweepStats run_sweep(const SweepConfig& config,
                     const std::map<games::Family, regression::CoefficientBundle>& bundles) {
  config.validate();
  const std::vector<std::string> roster = sim::roster_names(config.roster_size);
  const int threads = default_thread_count();
  const engine::ClassifyOptions options{1e-6, 1e-6, config.strict_adoption};

  SweepStats stats;
  std::uint64_t cell_ordinal = 0;
  for (const games::Family family : config.families) {
    const auto found = bundles.find(family);
    if (found == bundles.end())
      throw std::invalid_argument(std::string("no bundle provided for family ") +
                                  games::family_name(family));
    const regression::CoefficientBundle& bundle = found->second;
    for (const engine::Objective objective : config.objectives) {
      std::vector<ExperimentFlags> outcomes(
          static_cast<std::size_t>(config.experiments_per_cell));
      const std::uint64_t base = cell_ordinal * static_cast<std::uint64_t>(
                                                    std::max(config.experiments_per_cell, 1));
      parallel_for(config.experiments_per_cell, threads, [&](int i) {
        Rng rng = Rng::stream(config.seed, base + static_cast<std::uint64_t>(i));
        const int subset_size =
            config.subset_sizes[static_cast<std::size_t>(rng.uniform_int(
                static_cast<int>(config.subset_sizes.size())))];
        // Partial Fisher-Yates: first subset_size draws form the baseline
        // set, the next one is the released tech.
        std::vector<std::string> deck = roster;
        for (int k = 0; k <= subset_size; ++k) {
          const int pick = k + rng.uniform_int(static_cast<int>(deck.size()) - k);
          std::swap(deck[static_cast<std::size_t>(k)], deck[static_cast<std::size_t>(pick)]);
        }
        const std::vector<std::string> baseline(deck.begin(), deck.begin() + subset_size);
        const std::string& added = deck[static_cast<std::size_t>(subset_size)];
        const engine::ExpansionReport report =
            engine::expand_technology(bundle, baseline, added, objective, options);
        outcomes[static_cast<std::size_t>(i)] = classify_experiment(report, options);
      });
      stats.cells.push_back(aggregate_cell(family, objective, outcomes));
      ++cell_ordinal;
    }
  }
  return stats;
}

SweepStats run_sweep(const SweepConfig& config) {
  config.validate();
  std::map<games::Family, regression::CoefficientBundle> bundles;
  for (const games::Family family : config.families) {
    const auto path = config.bundle_paths.find(family);
    if (path != config.bundle_paths.end())
      bundles.emplace(family, regression::load_bundle(path->second));
    else
      bundles.emplace(family,
                      fixtures::synthetic_bundle(family, config.seed, config.roster_size));
  }
  return run_sweep(config, bundles);
}

std::pair<double, double> wilson_interval(long long successes, long long trials,
                                          double confidence) {
  if (successes < 0 || trials < 0 || successes > trials)
    throw std::invalid_argument("wilson_interval requires 0 <= k <= n");
  if (trials == 0) return {0.0, 1.0};
  const double z =
      std::abs(confidence - 0.95) < 1e-12 ? 1.959964 : normal_quantile(0.5 + confidence / 2.0);
  const double n = static_cast<double>(trials);
  const double phat = static_cast<double>(successes) / n;
  const double z2 = z * z;
  const double center = (phat + z2 / (2.0 * n)) / (1.0 + z2 / n);
  const double half = z * std::sqrt(phat * (1.0 - phat) / n + z2 / (4.0 * n * n)) / (1.0 + z2 / n);
  return {std::max(0.0, center - half), std::min(1.0, center + half)};
}

void emit_report_csv(const SweepStats& stats, std::ostream& out) {
  out << "panel,family,objective,frequency,ci_lo,ci_hi,n\n";
  for (const CellStats& cell : stats.cells) {
    for (std::size_t p = 0; p < kPanelNames.size(); ++p) {
      const PanelStat& panel = cell.panels[p];
      out << kPanelNames[p] << ',' << games::family_name(cell.family) << ','
          << engine::objective_name(cell.objective) << ',' << fmt(panel.frequency) << ','
          << fmt(panel.ci_lo) << ',' << fmt(panel.ci_hi) << ',' << panel.denominator << '\n';
    }
  }
}

void emit_report_csv(const SweepStats& stats, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open output file: " + path);
  emit_report_csv(stats, out);
}

nlohmann::json stats_to_json(const SweepStats& stats) {
  nlohmann::json cells = nlohmann::json::array();
  for (const CellStats& cell : stats.cells) {
    nlohmann::json panels = nlohmann::json::object();
    for (std::size_t p = 0; p < kPanelNames.size(); ++p) {
      const PanelStat& panel = cell.panels[p];
      nlohmann::json entry = {{"numerator", panel.numerator},
                              {"denominator", panel.denominator}};
      if (panel.denominator > 0) {
        entry["frequency"] = panel.frequency;
        entry["ci_lo"] = panel.ci_lo;
        entry["ci_hi"] = panel.ci_hi;
      } else {
        entry["frequency"] = nullptr;
        entry["ci_lo"] = nullptr;
        entry["ci_hi"] = nullptr;
      }
      panels[kPanelNames[p]] = std::move(entry);
    }
    cells.push_back({{"family", games::family_name(cell.family)},
                     {"objective", engine::objective_name(cell.objective)},
                     {"experiments", cell.experiments},
                     {"optimality_violations", cell.optimality_violations},
                     {"panels", std::move(panels)}});
  }
  return {{"cells", std::move(cells)}};
}

SweepStats stats_from_json(const nlohmann::json& j) {
  SweepStats stats;
  for (const auto& item : j.at("cells")) {
    CellStats cell;
    cell.family = games::family_from_name(item.at("family").get<std::string>());
    cell.objective = engine::objective_from_name(item.at("objective").get<std::string>());
    cell.experiments = item.at("experiments").get<long long>();
    cell.optimality_violations = item.at("optimality_violations").get<long long>();
    const nlohmann::json& panels = item.at("panels");
    for (std::size_t p = 0; p < kPanelNames.size(); ++p) {
      const nlohmann::json& entry = panels.at(kPanelNames[p]);
      cell.panels[p] = make_panel(entry.at("numerator").get<long long>(),
                                  entry.at("denominator").get<long long>());
    }
    stats.cells.push_back(std::move(cell));
  }
  return stats;
}

void save_stats(const SweepStats& stats, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open output file: " + path);
  out << stats_to_json(stats).dump(2) << '\n';
}

SweepStats load_stats(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open stats file: " + path);
  nlohmann::json j;
  in >> j;
  return stats_from_json(j);
}

}  // namespace metagame::harness
