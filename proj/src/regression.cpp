#include "metagame/regression.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>

namespace metagame::regression {

const char* target_name(Target target) {
  switch (target) {
    case Target::PayoffA: return "payoff_a";
    case Target::PayoffB: return "payoff_b";
    case Target::Fairness: return "fairness";
    case Target::Efficiency: return "efficiency";
  }
  throw std::invalid_argument("unknown target value");
}

Target target_from_name(const std::string& name) {
  for (Target t : kAllTargets)
    if (name == target_name(t)) return t;
  throw std::invalid_argument("unknown target name: " + name);
}

int FeatureSpec::dimension() const {
  return 1 + static_cast<int>(market_levels.size()) - 1 +
         static_cast<int>(pair_levels.size()) - 1 +
         static_cast<int>(situational_names.size());
}

void FeatureSpec::validate() const {
  if (market_levels.empty() || pair_levels.empty())
    throw std::invalid_argument("feature spec needs at least one market and one pair level");
  if (std::set<int>(market_levels.begin(), market_levels.end()).size() != market_levels.size())
    throw std::invalid_argument("duplicate market levels");
  if (std::set<TechPair>(pair_levels.begin(), pair_levels.end()).size() != pair_levels.size())
    throw std::invalid_argument("duplicate pair levels");
  if (situational_names.size() != situational_means.size())
    throw std::invalid_argument("covariate names and means differ in length");
  for (double m : situational_means)
    if (!std::isfinite(m)) throw std::invalid_argument("covariate means must be finite");
}

int FeatureSpec::market_index(int market_id) const {
  const auto it = std::find(market_levels.begin(), market_levels.end(), market_id);
  if (it == market_levels.end())
    throw std::out_of_range("unknown market level: " + std::to_string(market_id));
  return static_cast<int>(it - market_levels.begin());
}

int FeatureSpec::pair_index(const TechPair& pair) const {
  const auto it = std::find(pair_levels.begin(), pair_levels.end(), pair);
  if (it == pair_levels.end())
    throw std::out_of_range("unknown pair level: " + pair.first + "|" + pair.second);
  return static_cast<int>(it - pair_levels.begin());
}

std::vector<std::string> FeatureSpec::column_names() const {
  std::vector<std::string> names;
  names.reserve(static_cast<std::size_t>(dimension()));
  names.push_back("intercept");
  for (std::size_t i = 1; i < market_levels.size(); ++i)
    names.push_back("market=" + std::to_string(market_levels[i]));
  for (std::size_t i = 1; i < pair_levels.size(); ++i)
    names.push_back("pair=" + pair_levels[i].first + "|" + pair_levels[i].second);
  for (const std::string& n : situational_names) names.push_back(n);
  return names;
}

std::vector<std::string> covariate_names(Family family) {
  switch (family) {
    case Family::Bargaining: return {"delta_a", "delta_b", "t_long"};
    case Family::Negotiation: return {"f_a", "f_b", "m_scale", "t_long"};
    case Family::Persuasion: return {"prior_p", "v_value", "m_scale", "t_long"};
  }
  throw std::invalid_argument("unknown family value");
}

double covariate_value(const sim::GameRecord& record, const std::string& name) {
  const games::SituationParams& s = record.situation;
  if (name == "delta_a") return s.delta_a;
  if (name == "delta_b") return s.delta_b;
  if (name == "m_scale") return s.m_scale;
  if (name == "f_a") return s.f_a;
  if (name == "f_b") return s.f_b;
  if (name == "prior_p") return s.prior_p;
  if (name == "v_value") return s.v_value;
  if (name == "t_long") return s.rounds_t == 10 ? 1.0 : 0.0;
  throw std::out_of_range("unknown covariate: " + name);
}

double target_value(const sim::GameRecord& record, Target target) {
  switch (target) {
    case Target::Fairness: return record.fairness;
    case Target::Efficiency: return record.efficiency;
    case Target::PayoffA:
    case Target::PayoffB: {
      const games::Payoffs p =
          games::normalized_payoffs(record.outcome, record.situation, record.market.family);
      return target == Target::PayoffA ? p.alice : p.bob;
    }
  }
  throw std::invalid_argument("unknown target value");
}

FeatureSpec make_feature_spec(const std::vector<sim::GameRecord>& corpus, Family family) {
  std::set<int> markets;
  std::set<TechPair> pairs;
  const std::vector<std::string> names = covariate_names(family);
  std::vector<double> sums(names.size(), 0.0);
  long rows = 0;
  for (const sim::GameRecord& r : corpus) {
    if (r.market.family != family) continue;
    markets.insert(r.market.market_id);
    pairs.insert(TechPair{r.tech_a, r.tech_b});
    for (std::size_t i = 0; i < names.size(); ++i) sums[i] += covariate_value(r, names[i]);
    ++rows;
  }
  if (rows == 0) throw std::invalid_argument("corpus holds no records for the family");
  FeatureSpec spec;
  spec.market_levels.assign(markets.begin(), markets.end());
  spec.pair_levels.assign(pairs.begin(), pairs.end());
  spec.situational_names = names;
  spec.situational_means.resize(names.size());
  for (std::size_t i = 0; i < names.size(); ++i)
    spec.situational_means[i] = sums[i] / static_cast<double>(rows);
  spec.validate();
  return spec;
}

Eigen::VectorXd encode(const sim::GameRecord& record, const FeatureSpec& spec) {
  Eigen::VectorXd x = Eigen::VectorXd::Zero(spec.dimension());
  x(0) = 1.0;
  const int m_idx = spec.market_index(record.market.market_id);
  if (m_idx > 0) x(m_idx) = 1.0;  // column offset equals level index here
  const int p_idx = spec.pair_index(TechPair{record.tech_a, record.tech_b});
  const int pair_base = static_cast<int>(spec.market_levels.size());  // 1 + (markets-1)
  if (p_idx > 0) x(pair_base + p_idx - 1) = 1.0;
  const int cov_base = pair_base + static_cast<int>(spec.pair_levels.size()) - 1;
  for (std::size_t i = 0; i < spec.situational_names.size(); ++i)
    x(cov_base + static_cast<int>(i)) =
        covariate_value(record, spec.situational_names[i]) - spec.situational_means[i];
  return x;
}

RankDeficiencyError::RankDeficiencyError(std::vector<std::string> columns)
    : std::runtime_error([&columns] {
        std::string msg = "design matrix is rank deficient; collinear columns:";
        for (const std::string& c : columns) msg += " " + c;
        return msg;
      }()),
      columns_(std::move(columns)) {}

CoefficientSet fit(const std::vector<sim::GameRecord>& corpus, Family family, Target target,
                   const FeatureSpec& spec) {
  spec.validate();
  std::vector<const sim::GameRecord*> rows;
  for (const sim::GameRecord& r : corpus)
    if (r.market.family == family) rows.push_back(&r);

  const int dim = spec.dimension();
  if (static_cast<int>(rows.size()) < dim)
    throw std::invalid_argument("too few rows (" + std::to_string(rows.size()) +
                                ") for " + std::to_string(dim) + " columns");

  Eigen::MatrixXd design(static_cast<Eigen::Index>(rows.size()), dim);
  Eigen::VectorXd y(static_cast<Eigen::Index>(rows.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    design.row(static_cast<Eigen::Index>(i)) = encode(*rows[i], spec).transpose();
    y(static_cast<Eigen::Index>(i)) = target_value(*rows[i], target);
  }

  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(design);
  qr.setThreshold(1e-10);
  if (qr.rank() < dim) {
    const auto perm = qr.colsPermutation().indices();
    const std::vector<std::string> names = spec.column_names();
    std::vector<std::string> collinear;
    for (int k = static_cast<int>(qr.rank()); k < dim; ++k)
      collinear.push_back(names[static_cast<std::size_t>(perm(k))]);
    std::sort(collinear.begin(), collinear.end());
    throw RankDeficiencyError(std::move(collinear));
  }
  const Eigen::VectorXd beta = qr.solve(y);

  CoefficientSet set;
  set.family = family;
  set.target = target;
  set.spec = spec;
  set.beta0 = beta(0);
  set.beta_market[spec.market_levels[0]] = 0.0;
  for (std::size_t i = 1; i < spec.market_levels.size(); ++i)
    set.beta_market[spec.market_levels[i]] = beta(static_cast<Eigen::Index>(i));
  const int pair_base = static_cast<int>(spec.market_levels.size());
  set.beta_pair[spec.pair_levels[0]] = 0.0;
  for (std::size_t i = 1; i < spec.pair_levels.size(); ++i)
    set.beta_pair[spec.pair_levels[i]] = beta(pair_base + static_cast<Eigen::Index>(i) - 1);
  const int cov_base = pair_base + static_cast<int>(spec.pair_levels.size()) - 1;
  for (std::size_t i = 0; i < spec.situational_names.size(); ++i)
    set.beta_situation[spec.situational_names[i]] = beta(cov_base + static_cast<Eigen::Index>(i));

  const Eigen::VectorXd residuals = y - design * beta;
  const double ssr = residuals.squaredNorm();
  const double mean = y.mean();
  const double sst = (y.array() - mean).matrix().squaredNorm();
  set.diagnostics.rows = static_cast<long>(rows.size());
  set.diagnostics.rmse = std::sqrt(ssr / static_cast<double>(rows.size()));
  set.diagnostics.r2 = sst > 0.0 ? 1.0 - ssr / sst : 1.0;
  return set;
}

double predict_pair(const CoefficientSet& coeffs, int market_id, const std::string& tech_a,
                    const std::string& tech_b) {
  const auto m = coeffs.beta_market.find(market_id);
  if (m == coeffs.beta_market.end())
    throw std::out_of_range("unknown market level: " + std::to_string(market_id));
  const TechPair pair{tech_a, tech_b};
  const auto p = coeffs.beta_pair.find(pair);
  if (p == coeffs.beta_pair.end())
    throw std::out_of_range("unknown pair level: " + tech_a + "|" + tech_b);
  double value = coeffs.beta0 + m->second + p->second;
  const auto mk = coeffs.beta_pair_market.find(market_id);
  if (mk != coeffs.beta_pair_market.end()) {
    const auto mp = mk->second.find(pair);
    if (mp != mk->second.end()) value += mp->second;
  }
  return value;
}

const CoefficientSet& CoefficientBundle::at(Target target) const {
  const auto it = sets.find(target);
  if (it == sets.end())
    throw std::out_of_range(std::string("bundle is missing target ") + target_name(target));
  return it->second;
}

void CoefficientBundle::validate() const {
  for (Target t : kAllTargets) {
    const CoefficientSet& set = at(t);
    if (set.family != family) throw std::invalid_argument("bundle mixes families");
    if (set.spec.market_levels != at(Target::PayoffA).spec.market_levels ||
        set.spec.pair_levels != at(Target::PayoffA).spec.pair_levels)
      throw std::invalid_argument("bundle targets disagree on feature levels");
  }
}

CoefficientBundle fit_all_targets(const std::vector<sim::GameRecord>& corpus, Family family) {
  const FeatureSpec spec = make_feature_spec(corpus, family);
  CoefficientBundle bundle;
  bundle.family = family;
  for (Target t : kAllTargets) bundle.sets.emplace(t, fit(corpus, family, t, spec));
  return bundle;
}

engine::PayoffTables build_payoff_tables(const CoefficientBundle& bundle, int market_id,
                                         const std::vector<std::string>& techs) {
  bundle.validate();
  const int n = static_cast<int>(techs.size());
  if (n < 1) throw std::invalid_argument("tech list must be non-empty");

  engine::PayoffTables tables;
  tables.market = games::market_by_id(bundle.family, market_id);
  tables.techs = techs;
  for (Eigen::MatrixXd* m : {&tables.u_a, &tables.u_b, &tables.d_f, &tables.d_e})
    m->resize(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      tables.u_a(i, j) = predict_pair(bundle.at(Target::PayoffA), market_id, techs[i], techs[j]);
      tables.u_b(i, j) = predict_pair(bundle.at(Target::PayoffB), market_id, techs[i], techs[j]);
      tables.d_f(i, j) = predict_pair(bundle.at(Target::Fairness), market_id, techs[i], techs[j]);
      tables.d_e(i, j) = predict_pair(bundle.at(Target::Efficiency), market_id, techs[i], techs[j]);
    }
  }
  return tables;
}

namespace {

std::string pair_key(const TechPair& pair) { return pair.first + "|" + pair.second; }

TechPair pair_from_key(const std::string& key) {
  const auto bar = key.find('|');
  if (bar == std::string::npos || key.find('|', bar + 1) != std::string::npos)
    throw std::invalid_argument("pair key must be 'a|b': " + key);
  return {key.substr(0, bar), key.substr(bar + 1)};
}

}  // namespace

nlohmann::json coefficient_set_to_json(const CoefficientSet& set) {
  nlohmann::json j;
  j["family"] = games::family_name(set.family);
  j["target"] = target_name(set.target);
  j["beta0"] = set.beta0;
  nlohmann::json markets = nlohmann::json::object();
  for (const auto& [id, v] : set.beta_market) markets[std::to_string(id)] = v;
  j["beta_market"] = std::move(markets);
  nlohmann::json pairs = nlohmann::json::object();
  for (const auto& [pair, v] : set.beta_pair) pairs[pair_key(pair)] = v;
  j["beta_pair"] = std::move(pairs);
  nlohmann::json situation = nlohmann::json::object();
  for (const auto& [name, v] : set.beta_situation) situation[name] = v;
  j["beta_situation"] = std::move(situation);
  if (!set.beta_pair_market.empty()) {
    nlohmann::json interactions = nlohmann::json::object();
    for (const auto& [id, per_pair] : set.beta_pair_market) {
      nlohmann::json inner = nlohmann::json::object();
      for (const auto& [pair, v] : per_pair) inner[pair_key(pair)] = v;
      interactions[std::to_string(id)] = std::move(inner);
    }
    j["beta_pair_market"] = std::move(interactions);
  }
  nlohmann::json spec;
  spec["market_levels"] = set.spec.market_levels;
  std::vector<std::string> pair_keys;
  for (const TechPair& p : set.spec.pair_levels) pair_keys.push_back(pair_key(p));
  spec["pair_levels"] = std::move(pair_keys);
  spec["situational_names"] = set.spec.situational_names;
  spec["situational_means"] = set.spec.situational_means;
  j["spec"] = std::move(spec);
  j["diagnostics"] = {{"rmse", set.diagnostics.rmse},
                      {"r2", set.diagnostics.r2},
                      {"rows", set.diagnostics.rows}};
  return j;
}

CoefficientSet coefficient_set_from_json(const nlohmann::json& j) {
  CoefficientSet set;
  set.family = games::family_from_name(j.at("family").get<std::string>());
  set.target = target_from_name(j.at("target").get<std::string>());
  set.beta0 = j.at("beta0").get<double>();
  for (const auto& [key, v] : j.at("beta_market").items())
    set.beta_market[std::stoi(key)] = v.get<double>();
  for (const auto& [key, v] : j.at("beta_pair").items())
    set.beta_pair[pair_from_key(key)] = v.get<double>();
  for (const auto& [key, v] : j.at("beta_situation").items())
    set.beta_situation[key] = v.get<double>();
  if (j.contains("beta_pair_market")) {
    for (const auto& [mkey, inner] : j.at("beta_pair_market").items()) {
      auto& per_pair = set.beta_pair_market[std::stoi(mkey)];
      for (const auto& [pkey, v] : inner.items()) per_pair[pair_from_key(pkey)] = v.get<double>();
    }
  }
  const nlohmann::json& spec = j.at("spec");
  set.spec.market_levels = spec.at("market_levels").get<std::vector<int>>();
  for (const auto& key : spec.at("pair_levels"))
    set.spec.pair_levels.push_back(pair_from_key(key.get<std::string>()));
  set.spec.situational_names = spec.at("situational_names").get<std::vector<std::string>>();
  set.spec.situational_means = spec.at("situational_means").get<std::vector<double>>();
  const nlohmann::json& diag = j.at("diagnostics");
  set.diagnostics.rmse = diag.at("rmse").get<double>();
  set.diagnostics.r2 = diag.at("r2").get<double>();
  set.diagnostics.rows = diag.at("rows").get<long>();
  set.spec.validate();
  return set;
}

nlohmann::json bundle_to_json(const CoefficientBundle& bundle) {
  bundle.validate();
  nlohmann::json sets = nlohmann::json::array();
  for (Target t : kAllTargets) sets.push_back(coefficient_set_to_json(bundle.at(t)));
  return sets;
}

CoefficientBundle bundle_from_json(const nlohmann::json& j) {
  if (!j.is_array() || j.empty())
    throw std::invalid_argument("bundle JSON must be a non-empty array of coefficient sets");
  CoefficientBundle bundle;
  for (const auto& item : j) {
    CoefficientSet set = coefficient_set_from_json(item);
    bundle.family = set.family;
    bundle.sets.emplace(set.target, std::move(set));
  }
  bundle.validate();
  return bundle;
}

void save_bundle(const CoefficientBundle& bundle, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open output file: " + path);
  out << bundle_to_json(bundle).dump(2) << '\n';
}

CoefficientBundle load_bundle(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open bundle file: " + path);
  nlohmann::json j;
  in >> j;
  return bundle_from_json(j);
}

}  // namespace metagame::regression
