#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "metagame/fixtures.hpp"
#include "metagame/regression.hpp"
#include "metagame/rng.hpp"

using namespace metagame;
using namespace metagame::regression;

namespace {

// Minimal bargaining record carrier for design-matrix tests; the regression
// layer reads only the market id, the tech pair, the covariates, and the
// stored target column.
sim::GameRecord make_record(int market_id, const std::string& tech_a, const std::string& tech_b,
                            double delta_a, double delta_b, double fairness_value) {
  sim::GameRecord r;
  r.market = games::market_by_id(games::Family::Bargaining, market_id);
  r.tech_a = tech_a;
  r.tech_b = tech_b;
  r.situation.delta_a = delta_a;
  r.situation.delta_b = delta_b;
  r.outcome = games::BargainingOutcome::agreement(1, 0.5);
  r.fairness = fairness_value;
  r.efficiency = fairness_value;
  return r;
}

struct SyntheticModel {
  FeatureSpec spec;
  double beta0 = 0.45;
  std::map<int, double> beta_market;
  std::map<TechPair, double> beta_pair;
  std::vector<double> beta_situation = {0.05, -0.04};
};

// Corpus sampled from a known linear model; covariates are pre-centered at
// their realized corpus means so the fit recovers the generator exactly.
std::pair<SyntheticModel, std::vector<sim::GameRecord>> synthetic_corpus(
    int techs, int rows_per_cell, double noise_sigma, std::uint64_t seed) {
  SyntheticModel model;
  const std::vector<std::string> names = sim::roster_names(techs);
  Rng rng(seed);

  model.spec.situational_names = {"delta_a", "delta_b"};
  for (int m = 1; m <= 8; ++m) {
    model.spec.market_levels.push_back(m);
    model.beta_market[m] = m == 1 ? 0.0 : rng.uniform(-0.08, 0.08);
  }
  for (const std::string& a : names)
    for (const std::string& b : names) {
      const TechPair pair{a, b};
      model.spec.pair_levels.push_back(pair);
      model.beta_pair[pair] = pair == model.spec.pair_levels.front()
                                  ? 0.0
                                  : rng.uniform(-0.08, 0.08);
    }

  std::vector<sim::GameRecord> corpus;
  double sum_a = 0.0, sum_b = 0.0;
  for (int m = 1; m <= 8; ++m)
    for (const std::string& a : names)
      for (const std::string& b : names)
        for (int k = 0; k < rows_per_cell; ++k) {
          sim::GameRecord r = make_record(m, a, b, rng.uniform(0.5, 0.99),
                                          rng.uniform(0.5, 0.99), 0.0);
          sum_a += r.situation.delta_a;
          sum_b += r.situation.delta_b;
          corpus.push_back(std::move(r));
        }
  const double rows = static_cast<double>(corpus.size());
  model.spec.situational_means = {sum_a / rows, sum_b / rows};

  for (sim::GameRecord& r : corpus) {
    double y = model.beta0 + model.beta_market.at(r.market.market_id) +
               model.beta_pair.at(TechPair{r.tech_a, r.tech_b}) +
               model.beta_situation[0] * (r.situation.delta_a - model.spec.situational_means[0]) +
               model.beta_situation[1] * (r.situation.delta_b - model.spec.situational_means[1]);
    if (noise_sigma > 0.0) y += rng.normal(0.0, noise_sigma);
    r.fairness = y;
  }
  return {std::move(model), std::move(corpus)};
}

}  // namespace

TEST_CASE("encode lays out intercept, indicators, and centered covariates") {
  const auto [model, corpus] = synthetic_corpus(5, 1, 0.0, 3);
  const FeatureSpec& spec = model.spec;
  CHECK(spec.dimension() == 1 + 7 + 24 + 2);

  sim::GameRecord reference = make_record(spec.market_levels[0], spec.pair_levels[0].first,
                                          spec.pair_levels[0].second,
                                          spec.situational_means[0], spec.situational_means[1],
                                          0.5);
  const Eigen::VectorXd x0 = encode(reference, spec);
  CHECK(x0(0) == 1.0);
  CHECK(x0.tail(x0.size() - 1).cwiseAbs().maxCoeff() == doctest::Approx(0.0));

  sim::GameRecord market4 = reference;
  market4.market = games::market_by_id(games::Family::Bargaining, 4);
  const Eigen::VectorXd x4 = encode(market4, spec);
  CHECK(x4.segment(1, 7).sum() == doctest::Approx(1.0));
  CHECK(x4(spec.market_index(4)) == 1.0);

  sim::GameRecord unknown = reference;
  unknown.tech_a = "ZZ";
  CHECK_THROWS_AS(encode(unknown, spec), std::out_of_range);
}

TEST_CASE("zero-noise corpus is recovered coefficient for coefficient") {
  const auto [model, corpus] = synthetic_corpus(5, 2, 0.0, 11);
  const CoefficientSet fitted =
      fit(corpus, games::Family::Bargaining, Target::Fairness, model.spec);

  CHECK(fitted.beta0 == doctest::Approx(model.beta0).epsilon(1e-10));
  for (const auto& [id, beta] : model.beta_market)
    CHECK(fitted.beta_market.at(id) == doctest::Approx(beta).epsilon(1e-10));
  for (const auto& [pair, beta] : model.beta_pair)
    CHECK(fitted.beta_pair.at(pair) == doctest::Approx(beta).epsilon(1e-10));
  CHECK(fitted.beta_situation.at("delta_a") ==
        doctest::Approx(model.beta_situation[0]).epsilon(1e-10));
  CHECK(fitted.beta_situation.at("delta_b") ==
        doctest::Approx(model.beta_situation[1]).epsilon(1e-10));
  CHECK(fitted.diagnostics.rmse == doctest::Approx(0.0).epsilon(1e-10));
  CHECK(fitted.diagnostics.r2 == doctest::Approx(1.0));
  CHECK(fitted.diagnostics.rows == static_cast<long>(corpus.size()));

  // normal-equation residual orthogonality
  Eigen::VectorXd beta_vec(model.spec.dimension());
  Eigen::MatrixXd design(corpus.size(), model.spec.dimension());
  Eigen::VectorXd y(corpus.size());
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    design.row(static_cast<Eigen::Index>(i)) = encode(corpus[i], model.spec).transpose();
    y(static_cast<Eigen::Index>(i)) = corpus[i].fairness;
  }
  // rebuild the coefficient vector in design order
  beta_vec(0) = fitted.beta0;
  for (std::size_t i = 1; i < model.spec.market_levels.size(); ++i)
    beta_vec(static_cast<Eigen::Index>(i)) =
        fitted.beta_market.at(model.spec.market_levels[i]);
  const int pair_base = static_cast<int>(model.spec.market_levels.size());
  for (std::size_t i = 1; i < model.spec.pair_levels.size(); ++i)
    beta_vec(pair_base + static_cast<Eigen::Index>(i) - 1) =
        fitted.beta_pair.at(model.spec.pair_levels[i]);
  beta_vec(beta_vec.size() - 2) = fitted.beta_situation.at("delta_a");
  beta_vec(beta_vec.size() - 1) = fitted.beta_situation.at("delta_b");
  const Eigen::VectorXd gradient = design.transpose() * (y - design * beta_vec);
  CHECK(gradient.cwiseAbs().maxCoeff() / std::max(1.0, y.norm()) <= 1e-6);

  // Eq.-8-style truncation: the pairwise prediction equals the cell mean
  for (int m : {1, 4, 8})
    for (const TechPair& pair : {model.spec.pair_levels[0], model.spec.pair_levels[7]}) {
      const double expected =
          model.beta0 + model.beta_market.at(m) + model.beta_pair.at(pair);
      CHECK(predict_pair(fitted, m, pair.first, pair.second) ==
            doctest::Approx(expected).epsilon(1e-8));
    }
}

TEST_CASE("constant target collapses onto the intercept") {
  auto [model, corpus] = synthetic_corpus(3, 2, 0.0, 17);
  for (sim::GameRecord& r : corpus) r.fairness = 0.625;
  const CoefficientSet fitted =
      fit(corpus, games::Family::Bargaining, Target::Fairness, model.spec);
  CHECK(fitted.beta0 == doctest::Approx(0.625).epsilon(1e-12));
  for (const auto& [id, beta] : fitted.beta_market) CHECK(beta == doctest::Approx(0.0));
  for (const auto& [pair, beta] : fitted.beta_pair) CHECK(beta == doctest::Approx(0.0));
  CHECK(fitted.diagnostics.r2 == doctest::Approx(1.0));  // zero-variance convention
}

TEST_CASE("duplicate covariate columns raise a named rank error") {
  auto [model, corpus] = synthetic_corpus(3, 2, 0.0, 23);
  FeatureSpec broken = model.spec;
  broken.situational_names = {"delta_a", "delta_a"};
  broken.situational_means = {model.spec.situational_means[0], model.spec.situational_means[0]};
  try {
    fit(corpus, games::Family::Bargaining, Target::Fairness, broken);
    FAIL("expected RankDeficiencyError");
  } catch (const RankDeficiencyError& e) {
    REQUIRE_FALSE(e.columns().empty());
    CHECK(e.columns().front() == "delta_a");
  }
}

TEST_CASE("too few rows is rejected up front") {
  auto [model, corpus] = synthetic_corpus(5, 2, 0.0, 29);
  corpus.resize(10);
  CHECK_THROWS_AS(fit(corpus, games::Family::Bargaining, Target::Fairness, model.spec),
                  std::invalid_argument);
}

TEST_CASE("predict_pair sums the three terms and rejects unknown levels") {
  CoefficientSet set;
  set.family = games::Family::Bargaining;
  set.target = Target::Fairness;
  set.beta0 = 0.2;
  set.beta_market = {{1, 0.0}, {4, 0.1}};
  set.beta_pair = {{{"A", "A"}, 0.0}, {{"A", "B"}, 0.05}};
  CHECK(predict_pair(set, 4, "A", "B") == doctest::Approx(0.35));
  CHECK(predict_pair(set, 1, "A", "A") == doctest::Approx(0.2));
  CHECK_THROWS_AS(predict_pair(set, 2, "A", "A"), std::out_of_range);
  CHECK_THROWS_AS(predict_pair(set, 1, "A", "C"), std::out_of_range);

  set.beta_pair_market[4][{"A", "B"}] = 0.01;  // per-market adjustment
  CHECK(predict_pair(set, 4, "A", "B") == doctest::Approx(0.36));
  CHECK(predict_pair(set, 1, "A", "B") == doctest::Approx(0.25));
}

TEST_CASE("payoff tables are pointwise predictions") {
  const auto spec = [] {
    FeatureSpec s;
    s.market_levels = {1, 2};
    s.pair_levels = {{"A", "A"}, {"A", "B"}, {"B", "A"}, {"B", "B"}};
    return s;
  }();
  CoefficientBundle bundle;
  bundle.family = games::Family::Bargaining;
  for (Target t : kAllTargets) {
    CoefficientSet set;
    set.family = games::Family::Bargaining;
    set.target = t;
    set.spec = spec;
    set.beta0 = 0.5;
    for (int id : spec.market_levels) set.beta_market[id] = 0.0;
    for (const TechPair& p : spec.pair_levels) set.beta_pair[p] = 0.0;
    bundle.sets.emplace(t, std::move(set));
  }
  const engine::PayoffTables tables = build_payoff_tables(bundle, 1, {"A", "B"});
  for (const Eigen::MatrixXd* m : {&tables.u_a, &tables.u_b, &tables.d_f, &tables.d_e}) {
    CHECK(m->rows() == 2);
    CHECK(m->cols() == 2);
    CHECK((m->array() == 0.5).all());
  }
  CHECK_THROWS_AS(build_payoff_tables(bundle, 1, {"A", "Z"}), std::out_of_range);

  CoefficientBundle missing = bundle;
  missing.sets.erase(Target::Efficiency);
  CHECK_THROWS_AS(build_payoff_tables(missing, 1, {"A", "B"}), std::out_of_range);
}

TEST_CASE("tech-subset tables equal the full-roster submatrix") {
  const auto bundle = fixtures::synthetic_bundle(games::Family::Bargaining, 99, 6);
  const std::vector<std::string> all = sim::roster_names(6);
  const engine::PayoffTables full = build_payoff_tables(bundle, 3, all);
  const std::vector<std::string> subset = {all[1], all[4]};
  const engine::PayoffTables small = build_payoff_tables(bundle, 3, subset);
  CHECK(small.u_a(0, 0) == full.u_a(1, 1));
  CHECK(small.u_a(0, 1) == full.u_a(1, 4));
  CHECK(small.u_b(1, 0) == full.u_b(4, 1));
  CHECK(small.d_f(1, 1) == full.d_f(4, 4));
  CHECK(small.d_e(0, 1) == full.d_e(1, 4));
}

TEST_CASE("bundle JSON round-trips including per-market adjustments") {
  const CoefficientBundle demo = fixtures::demo_bundle();
  const nlohmann::json j = bundle_to_json(demo);
  const CoefficientBundle back = bundle_from_json(j);
  CHECK(back.family == demo.family);
  for (Target t : kAllTargets) {
    CHECK(back.at(t) == demo.at(t));
    CHECK(back.at(t).beta_pair_market == demo.at(t).beta_pair_market);
  }
  // fitted bundles serialize without the interaction block
  const auto [model, corpus] = synthetic_corpus(3, 2, 0.0, 31);
  CoefficientBundle fitted;
  fitted.family = games::Family::Bargaining;
  for (Target t : kAllTargets)
    fitted.sets.emplace(t, fit(corpus, games::Family::Bargaining, t, model.spec));
  for (const auto& set_json : bundle_to_json(fitted))
    CHECK_FALSE(set_json.contains("beta_pair_market"));
}

TEST_CASE("make_feature_spec gathers levels and means from the corpus") {
  auto [model, corpus] = synthetic_corpus(3, 1, 0.0, 37);
  for (sim::GameRecord& r : corpus) r.situation.rounds_t = 10;
  const FeatureSpec spec = make_feature_spec(corpus, games::Family::Bargaining);
  CHECK(spec.market_levels == std::vector<int>{1, 2, 3, 4, 5, 6, 7, 8});
  CHECK(spec.pair_levels.size() == 9);
  CHECK(spec.situational_names == std::vector<std::string>{"delta_a", "delta_b", "t_long"});
  CHECK(spec.situational_means[2] == doctest::Approx(1.0));
  CHECK_THROWS_AS(make_feature_spec(corpus, games::Family::Persuasion), std::invalid_argument);
}
