#pragma once

#include <Eigen/Dense>
#include <iosfwd>
#include <optional>
#include <vector>

namespace metagame::nash {

// Two-player normal-form game; Alice indexes rows, Bob columns.
struct BimatrixGame {
  Eigen::MatrixXd payoff_a;
  Eigen::MatrixXd payoff_b;

  Eigen::Index rows() const { return payoff_a.rows(); }
  Eigen::Index cols() const { return payoff_a.cols(); }
  void validate() const;  // matching dimensions, finite entries
};

struct MixedProfile {
  Eigen::VectorXd sigma_a;
  Eigen::VectorXd sigma_b;
};

inline constexpr double kVerifyTol = 1e-8;
inline constexpr double kDedupTol = 1e-7;

struct RegretReport {
  bool is_equilibrium = false;
  double regret_a = 0.0;  // best pure deviation gain for Alice
  double regret_b = 0.0;
};

struct LemkeHowsonResult {
  std::optional<MixedProfile> profile;  // empty: degeneracy failure
  int pivots = 0;
  bool cycled = false;
  bool perturbed = false;  // solved only after the deterministic perturbation
};

// Complementary pivoting from one initial label in [0, rows+cols).
// Payoffs are shifted to strictly positive internally (the shift leaves the
// equilibrium set unchanged). Lexicographic ratio test; on cycling or a
// blown pivot budget the game is re-solved under a deterministic 1e-9-scale
// perturbation and the result is kept only if it verifies on the original
// game at kVerifyTol. `trace`, when given, receives a dump of every pivot
// and the intermediate tableau states.
LemkeHowsonResult lemke_howson(const BimatrixGame& game, int initial_label,
                               std::ostream* trace = nullptr);

// All starting labels, deduplicated at kDedupTol (max-norm). Falls back to
// support enumeration if every start fails, so the result is non-empty for
// any finite game of the sizes this pipeline builds.
std::vector<MixedProfile> enumerate_equilibria(const BimatrixGame& game);

// Independent oracle: solves the indifference systems over all equal-size
// support pairs. Guarded to games with at most 8 actions per side.
std::vector<MixedProfile> support_enumeration(const BimatrixGame& game);

RegretReport verify_equilibrium(const BimatrixGame& game, const MixedProfile& profile,
                                double tol = kVerifyTol);

// sigma_a' * matrix * sigma_b.
double expected_value(const MixedProfile& profile, const Eigen::MatrixXd& matrix);

bool profiles_close(const MixedProfile& lhs, const MixedProfile& rhs, double tol = kDedupTol);

}  // namespace metagame::nash
