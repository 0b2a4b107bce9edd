#include "metagame/nash.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <set>
#include <stdexcept>

namespace metagame::nash {

namespace {

constexpr double kPivotEps = 1e-11;

// One best-response polytope in dictionary form: `constraints` rows of
// [original vars | slacks | rhs], with the slack columns starting as the
// identity. Variable v < num_vars is an original variable, otherwise a
// slack; basic[row] names the variable owning each row.
struct Tableau {
  Eigen::MatrixXd t;          // rows x (num_vars + rows + 1)
  std::vector<int> basic;     // size rows
  int num_vars = 0;

  int slack_begin() const { return num_vars; }
  int rhs_col() const { return num_vars + static_cast<int>(basic.size()); }

  static Tableau from_constraints(const Eigen::MatrixXd& coeffs) {
    Tableau tab;
    const Eigen::Index rows = coeffs.rows();
    tab.num_vars = static_cast<int>(coeffs.cols());
    tab.t.resize(rows, coeffs.cols() + rows + 1);
    tab.t.leftCols(coeffs.cols()) = coeffs;
    tab.t.middleCols(coeffs.cols(), rows) = Eigen::MatrixXd::Identity(rows, rows);
    tab.t.col(tab.t.cols() - 1) = Eigen::VectorXd::Ones(rows);
    tab.basic.resize(static_cast<std::size_t>(rows));
    for (Eigen::Index r = 0; r < rows; ++r)
      tab.basic[static_cast<std::size_t>(r)] = tab.num_vars + static_cast<int>(r);
    return tab;
  }

  // Lexicographic minimum-ratio row for the entering column, or -1 when the
  // column is nonpositive (unbounded; cannot happen for positive payoffs).
  int choose_leaving(int entering) const {
    int best = -1;
    for (Eigen::Index r = 0; r < t.rows(); ++r) {
      const double d = t(r, entering);
      if (d <= kPivotEps) continue;
      if (best < 0) {
        best = static_cast<int>(r);
        continue;
      }
      if (lex_less(static_cast<int>(r), best, entering)) best = static_cast<int>(r);
    }
    return best;
  }

  void pivot(int row, int entering) {
    t.row(row) /= t(row, entering);
    for (Eigen::Index r = 0; r < t.rows(); ++r) {
      if (r == row) continue;
      const double f = t(r, entering);
      if (f != 0.0) t.row(r) -= f * t.row(row);
    }
    basic[static_cast<std::size_t>(row)] = entering;
  }

  double basic_value(int var) const {
    for (std::size_t r = 0; r < basic.size(); ++r)
      if (basic[r] == var) return t(static_cast<Eigen::Index>(r), rhs_col());
    return 0.0;
  }

 private:
  // Compare rows a and b by (rhs, slack columns) / pivot-column entry.
  bool lex_less(int a, int b, int entering) const {
    const double da = t(a, entering);
    const double db = t(b, entering);
    const double ra = t(a, rhs_col()) / da;
    const double rb = t(b, rhs_col()) / db;
    if (std::abs(ra - rb) > kPivotEps) return ra < rb;
    for (int c = slack_begin(); c < rhs_col(); ++c) {
      const double va = t(a, c) / da;
      const double vb = t(b, c) / db;
      if (std::abs(va - vb) > kPivotEps) return va < vb;
    }
    return a < b;  // identical rows cannot occur with lexicographic bases
  }
};

Eigen::MatrixXd positive_scaled(const Eigen::MatrixXd& m) {
  const double shift = 1.0 - m.minCoeff();
  Eigen::MatrixXd out = m.array() + shift;
  out /= out.maxCoeff();
  return out;
}

Eigen::VectorXd clamp_normalize(Eigen::VectorXd v) {
  for (Eigen::Index i = 0; i < v.size(); ++i)
    if (v(i) < 0.0) v(i) = 0.0;
  const double total = v.sum();
  if (total <= 0.0) throw std::runtime_error("cannot normalize a zero strategy vector");
  return v / total;
}

// Core pivoting pass on a fixed game; no retries.
LemkeHowsonResult lemke_howson_once(const BimatrixGame& game, int initial_label,
                                    std::ostream* trace = nullptr) {
  const int m = static_cast<int>(game.rows());
  const int n = static_cast<int>(game.cols());

  const Eigen::MatrixXd a = positive_scaled(game.payoff_a);
  const Eigen::MatrixXd b = positive_scaled(game.payoff_b);

  // Tableau X: B' x <= 1 over Alice's strategy weights (n constraints),
  // tableau Y: A y <= 1 over Bob's (m constraints). Labels: Alice's action
  // i tags x_i and Y's slack i; Bob's action j tags y_j and X's slack j.
  Tableau tx = Tableau::from_constraints(b.transpose());
  Tableau ty = Tableau::from_constraints(a);

  const auto label_of = [&](bool in_x, int var) {
    if (in_x) return var < m ? var : m + (var - m);  // x_i -> i, s_j -> m+j
    return var < n ? m + var : var - n;              // y_j -> m+j, r_i -> i
  };
  const auto var_with_label = [&](bool in_x, int label) {
    if (in_x) return label < m ? label : m + (label - m);
    return label < m ? n + label : label - m;
  };

  LemkeHowsonResult result;
  const double budget_d = std::min(10.0 * std::pow(4.0, std::max(m, n)), 5.0e7);
  const long budget = static_cast<long>(budget_d);

  bool in_x = initial_label < m;
  int entering = var_with_label(in_x, initial_label);

  std::set<std::vector<int>> seen;
  for (;;) {
    if (result.pivots >= budget) return result;  // budget exceeded

    std::vector<int> state;
    state.push_back(in_x ? entering : -entering - 1);
    state.insert(state.end(), tx.basic.begin(), tx.basic.end());
    state.insert(state.end(), ty.basic.begin(), ty.basic.end());
    if (!seen.insert(std::move(state)).second) {
      result.cycled = true;
      return result;
    }

    Tableau& tab = in_x ? tx : ty;
    const int row = tab.choose_leaving(entering);
    if (row < 0) return result;  // unbounded ray: degenerate input
    const int leaving = tab.basic[static_cast<std::size_t>(row)];
    tab.pivot(row, entering);
    ++result.pivots;
    if (trace) {
      *trace << "pivot " << result.pivots << " tableau=" << (in_x ? 'X' : 'Y')
             << " enter=" << entering << " leave=" << leaving << '\n'
             << tab.t << '\n';
    }

    const int out_label = label_of(in_x, leaving);
    if (out_label == initial_label) break;
    in_x = !in_x;
    entering = var_with_label(in_x, out_label);
  }

  Eigen::VectorXd x = Eigen::VectorXd::Zero(m);
  for (int i = 0; i < m; ++i) x(i) = tx.basic_value(i);
  Eigen::VectorXd y = Eigen::VectorXd::Zero(n);
  for (int j = 0; j < n; ++j) y(j) = ty.basic_value(j);
  if (x.sum() <= 0.0 || y.sum() <= 0.0) return result;  // artificial endpoint

  result.profile = MixedProfile{clamp_normalize(std::move(x)), clamp_normalize(std::move(y))};
  return result;
}

BimatrixGame perturbed_copy(const BimatrixGame& game) {
  BimatrixGame out = game;
  const Eigen::Index n = game.cols();
  for (Eigen::Index i = 0; i < game.rows(); ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      out.payoff_a(i, j) += 1e-9 * (1.0 + static_cast<double>(i * n + j));
      out.payoff_b(i, j) += 1e-9 * (1.0 + static_cast<double>(j * game.rows() + i));
    }
  }
  return out;
}

std::vector<int> first_combination(int k) {
  std::vector<int> c(static_cast<std::size_t>(k));
  for (int i = 0; i < k; ++i) c[static_cast<std::size_t>(i)] = i;
  return c;
}

bool next_combination(std::vector<int>& c, int n) {
  const int k = static_cast<int>(c.size());
  for (int i = k - 1; i >= 0; --i) {
    if (c[static_cast<std::size_t>(i)] < n - k + i) {
      ++c[static_cast<std::size_t>(i)];
      for (int j = i + 1; j < k; ++j)
        c[static_cast<std::size_t>(j)] = c[static_cast<std::size_t>(j - 1)] + 1;
      return true;
    }
  }
  return false;
}

}  // namespace

void BimatrixGame::validate() const {
  if (payoff_a.rows() != payoff_b.rows() || payoff_a.cols() != payoff_b.cols())
    throw std::invalid_argument("payoff matrices must share dimensions");
  if (payoff_a.rows() < 1 || payoff_a.cols() < 1)
    throw std::invalid_argument("game must have at least one action per player");
  if (!payoff_a.allFinite() || !payoff_b.allFinite())
    throw std::invalid_argument("payoff entries must be finite");
}

LemkeHowsonResult lemke_howson(const BimatrixGame& game, int initial_label,
                               std::ostream* trace) {
  game.validate();
  const int labels = static_cast<int>(game.rows() + game.cols());
  if (initial_label < 0 || initial_label >= labels)
    throw std::out_of_range("initial_label outside [0, rows+cols)");

  LemkeHowsonResult result = lemke_howson_once(game, initial_label, trace);
  if (result.profile &&
      verify_equilibrium(game, *result.profile, kVerifyTol).is_equilibrium)
    return result;

  // Degeneracy path: deterministic perturbation, accepted only when the
  // solution still verifies on the unperturbed game.
  LemkeHowsonResult retry = lemke_howson_once(perturbed_copy(game), initial_label);
  retry.cycled = retry.cycled || result.cycled;
  retry.pivots += result.pivots;
  retry.perturbed = true;
  if (retry.profile &&
      verify_equilibrium(game, *retry.profile, kVerifyTol).is_equilibrium)
    return retry;
  retry.profile.reset();
  return retry;
}

std::vector<MixedProfile> enumerate_equilibria(const BimatrixGame& game) {
  game.validate();
  std::vector<MixedProfile> found;
  const int labels = static_cast<int>(game.rows() + game.cols());
  for (int label = 0; label < labels; ++label) {
    LemkeHowsonResult result = lemke_howson(game, label);
    if (!result.profile) continue;
    const bool dup = std::any_of(found.begin(), found.end(), [&](const MixedProfile& p) {
      return profiles_close(p, *result.profile);
    });
    if (!dup) found.push_back(std::move(*result.profile));
  }
  if (found.empty() && game.rows() <= 8 && game.cols() <= 8)
    found = support_enumeration(game);
  if (found.empty())
    throw std::runtime_error("no equilibrium found; game too degenerate and too large for the oracle");
  return found;
}

std::vector<MixedProfile> support_enumeration(const BimatrixGame& game) {
  game.validate();
  const int m = static_cast<int>(game.rows());
  const int n = static_cast<int>(game.cols());
  if (m > 8 || n > 8)
    throw std::invalid_argument("support enumeration is guarded to games of size <= 8");

  constexpr double kFeasTol = 1e-9;
  std::vector<MixedProfile> found;

  for (int k = 1; k <= std::min(m, n); ++k) {
    std::vector<int> rows_support = first_combination(k);
    do {
      std::vector<int> cols_support = first_combination(k);
      do {
        // Bob's mix makes Alice indifferent across her support; the extra
        // row pins the probabilities to a simplex point. Unknowns: y on the
        // column support plus Alice's common payoff v.
        Eigen::MatrixXd sys_y = Eigen::MatrixXd::Zero(k + 1, k + 1);
        Eigen::VectorXd rhs_y = Eigen::VectorXd::Zero(k + 1);
        for (int i = 0; i < k; ++i) {
          for (int j = 0; j < k; ++j)
            sys_y(i, j) = game.payoff_a(rows_support[static_cast<std::size_t>(i)],
                                        cols_support[static_cast<std::size_t>(j)]);
          sys_y(i, k) = -1.0;
        }
        sys_y.row(k).head(k).setOnes();
        rhs_y(k) = 1.0;

        Eigen::FullPivLU<Eigen::MatrixXd> lu_y(sys_y);
        if (!lu_y.isInvertible()) continue;
        const Eigen::VectorXd sol_y = lu_y.solve(rhs_y);

        Eigen::MatrixXd sys_x = Eigen::MatrixXd::Zero(k + 1, k + 1);
        Eigen::VectorXd rhs_x = Eigen::VectorXd::Zero(k + 1);
        for (int j = 0; j < k; ++j) {
          for (int i = 0; i < k; ++i)
            sys_x(j, i) = game.payoff_b(rows_support[static_cast<std::size_t>(i)],
                                        cols_support[static_cast<std::size_t>(j)]);
          sys_x(j, k) = -1.0;
        }
        sys_x.row(k).head(k).setOnes();
        rhs_x(k) = 1.0;

        Eigen::FullPivLU<Eigen::MatrixXd> lu_x(sys_x);
        if (!lu_x.isInvertible()) continue;
        const Eigen::VectorXd sol_x = lu_x.solve(rhs_x);

        bool feasible = true;
        for (int i = 0; i < k && feasible; ++i)
          feasible = sol_x(i) >= -kFeasTol && sol_y(i) >= -kFeasTol;
        if (!feasible) continue;

        Eigen::VectorXd x = Eigen::VectorXd::Zero(m);
        Eigen::VectorXd y = Eigen::VectorXd::Zero(n);
        for (int i = 0; i < k; ++i) {
          x(rows_support[static_cast<std::size_t>(i)]) = std::max(0.0, sol_x(i));
          y(cols_support[static_cast<std::size_t>(i)]) = std::max(0.0, sol_y(i));
        }
        MixedProfile profile{clamp_normalize(std::move(x)), clamp_normalize(std::move(y))};
        if (!verify_equilibrium(game, profile, kVerifyTol).is_equilibrium) continue;
        const bool dup = std::any_of(found.begin(), found.end(), [&](const MixedProfile& p) {
          return profiles_close(p, profile);
        });
        if (!dup) found.push_back(std::move(profile));
      } while (next_combination(cols_support, n));
    } while (next_combination(rows_support, m));
  }
  return found;
}

RegretReport verify_equilibrium(const BimatrixGame& game, const MixedProfile& profile,
                                double tol) {
  if (profile.sigma_a.size() != game.rows() || profile.sigma_b.size() != game.cols())
    throw std::invalid_argument("profile dimensions do not match the game");
  const Eigen::VectorXd row_values = game.payoff_a * profile.sigma_b;
  const Eigen::RowVectorXd col_values = profile.sigma_a.transpose() * game.payoff_b;
  const double value_a = profile.sigma_a.dot(row_values);
  const double value_b = col_values * profile.sigma_b;
  RegretReport report;
  report.regret_a = row_values.maxCoeff() - value_a;
  report.regret_b = col_values.maxCoeff() - value_b;
  report.is_equilibrium = report.regret_a <= tol && report.regret_b <= tol;
  return report;
}

double expected_value(const MixedProfile& profile, const Eigen::MatrixXd& matrix) {
  if (profile.sigma_a.size() != matrix.rows() || profile.sigma_b.size() != matrix.cols())
    throw std::invalid_argument("profile dimensions do not match the matrix");
  return profile.sigma_a.transpose() * matrix * profile.sigma_b;
}

bool profiles_close(const MixedProfile& lhs, const MixedProfile& rhs, double tol) {
  if (lhs.sigma_a.size() != rhs.sigma_a.size() || lhs.sigma_b.size() != rhs.sigma_b.size())
    return false;
  return (lhs.sigma_a - rhs.sigma_a).cwiseAbs().maxCoeff() < tol &&
         (lhs.sigma_b - rhs.sigma_b).cwiseAbs().maxCoeff() < tol;
}

}  // namespace metagame::nash
