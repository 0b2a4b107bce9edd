#pragma once

#include <cstdint>

#include "metagame/regression.hpp"

namespace metagame::fixtures {

// Hand-built bargaining bundle over techs A..E whose per-market tables have
// strictly dominant pure profiles. Releasing E flips the regulator's
// fairness choice from market 4 to market 8 while E stays unused: the
// bundled demonstration of a poisoned-apple release. Ships with the CLI
// (`fixture` subcommand) and anchors the integration tests.
regression::CoefficientBundle demo_bundle();

// Random per-market tables for sweep experiments: market, pair, and
// per-market pair coefficients drawn from the seed. Without the per-market
// noise every market would host the same equilibrium and the regulator's
// choice could never move.
regression::CoefficientBundle synthetic_bundle(games::Family family, std::uint64_t seed,
                                               int roster_size = 13);

// All-identical techs: any release is a behavioral duplicate, so expansions
// never move payoffs. Used to pin the no-change path.
regression::CoefficientBundle duplicate_tech_bundle(games::Family family, int roster_size = 13);

}  // namespace metagame::fixtures
