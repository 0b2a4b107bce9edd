#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "metagame/econ_games.hpp"

namespace metagame::engine {

enum class Objective { Fairness, Efficiency };

const char* objective_name(Objective objective);
Objective objective_from_name(const std::string& name);

// The four technology-indexed matrices for one market: agent payoffs plus
// the regulator's fairness and efficiency views. Rows index Alice's tech,
// columns Bob's, in the shared `techs` order.
struct PayoffTables {
  games::MarketConfig market;
  std::vector<std::string> techs;
  Eigen::MatrixXd u_a;
  Eigen::MatrixXd u_b;
  Eigen::MatrixXd d_f;
  Eigen::MatrixXd d_e;

  const Eigen::MatrixXd& objective_matrix(Objective objective) const {
    return objective == Objective::Fairness ? d_f : d_e;
  }
  void validate() const;
};

}  // namespace metagame::engine
