#include "shapeboost/lp_solver.hpp"

#include <algorithm>
#include <atomic>
#include <filesystem>
#include <fstream>
#include <cmath>
#include <iomanip>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <vector>

#include "shapeboost/error.hpp"

#include <unistd.h>

namespace shapeboost {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

enum class VarState : unsigned char { kBasic, kAtLower, kAtUpper, kFreeZero };

// Working form: every row is an equality. Column layout is
//   [0, n)               structural
//   [n, n + m_ub)        slack of <= row i (coefficient +1)
//   [n + m_ub, ...)      phase-one artificials (coefficient +/-1)
class Simplex {
 public:
  Simplex(const LinearProgram& lp, const LpOptions& options)
      : options_(options),
        n_(lp.num_variables()),
        m_ub_(lp.b_ub.size()),
        m_(lp.b_ub.size() + lp.b_eq.size()) {
    a_.resize(m_, n_);
    if (m_ub_ > 0) a_.topRows(m_ub_) = lp.a_ub;
    if (m_ > m_ub_) a_.bottomRows(m_ - m_ub_) = lp.a_eq;
    b_.resize(m_);
    b_ << lp.b_ub, lp.b_eq;

    const Eigen::Index base = n_ + m_ub_;
    lower_.assign(base, 0.0);
    upper_.assign(base, kInf);
    for (Eigen::Index j = 0; j < n_; ++j) {
      lower_[j] = lp.lower[j];
      upper_[j] = lp.upper[j];
    }
    cost_.assign(base, 0.0);
    structural_cost_ = lp.objective;
    state_.assign(base, VarState::kAtLower);
    x_.assign(base, 0.0);

    for (Eigen::Index j = 0; j < n_; ++j) {
      if (std::isfinite(lower_[j])) {
        state_[j] = VarState::kAtLower;
        x_[j] = lower_[j];
      } else if (std::isfinite(upper_[j])) {
        state_[j] = VarState::kAtUpper;
        x_[j] = upper_[j];
      } else {
        state_[j] = VarState::kFreeZero;
        x_[j] = 0.0;
      }
    }

    // Choose a starting basis of slacks where the residual allows it and
    // artificials elsewhere.
    Eigen::VectorXd x_struct(n_);
    for (Eigen::Index j = 0; j < n_; ++j) x_struct[j] = x_[j];
    const Eigen::VectorXd residual = b_ - a_ * x_struct;
    basis_.assign(m_, 0);
    for (Eigen::Index r = 0; r < m_; ++r) {
      if (r < m_ub_ && residual[r] >= 0.0) {
        const Eigen::Index slack = n_ + r;
        basis_[r] = slack;
        state_[slack] = VarState::kBasic;
        x_[slack] = residual[r];
      } else {
        const Eigen::Index art = static_cast<Eigen::Index>(lower_.size());
        artificial_row_.push_back(r);
        artificial_sign_.push_back(residual[r] >= 0.0 ? 1.0 : -1.0);
        lower_.push_back(0.0);
        upper_.push_back(kInf);
        cost_.push_back(0.0);
        state_.push_back(VarState::kBasic);
        x_.push_back(std::abs(residual[r]));
        basis_[r] = art;
      }
    }
    num_columns_ = static_cast<Eigen::Index>(lower_.size());
    scale_b_ = 1.0 + (m_ > 0 ? b_.cwiseAbs().maxCoeff() : 0.0);
  }

  LpSolution run() {
    LpSolution sol;
    max_iterations_ = options_.max_iterations > 0
                          ? options_.max_iterations
                          : 50 * (m_ + num_columns_) + 1000;
    refactor();

    const bool has_artificials = num_columns_ > n_ + m_ub_;
    if (has_artificials) {
      std::fill(cost_.begin(), cost_.end(), 0.0);
      for (Eigen::Index j = n_ + m_ub_; j < num_columns_; ++j) cost_[j] = 1.0;
      const LpStatus phase_one = iterate();
      if (phase_one == LpStatus::kIterationLimit) {
        return finish(sol, phase_one);
      }
      double infeasibility = 0.0;
      for (Eigen::Index j = n_ + m_ub_; j < num_columns_; ++j) {
        infeasibility += std::max(0.0, x_[j]);
      }
      if (infeasibility > options_.feasibility_tol * scale_b_) {
        return finish(sol, LpStatus::kInfeasible);
      }
      for (Eigen::Index j = n_ + m_ub_; j < num_columns_; ++j) {
        upper_[j] = 0.0;
        if (state_[j] != VarState::kBasic) {
          state_[j] = VarState::kAtLower;
          x_[j] = 0.0;
        }
      }
      refactor();
    }

    std::fill(cost_.begin(), cost_.end(), 0.0);
    for (Eigen::Index j = 0; j < n_; ++j) cost_[j] = structural_cost_[j];
    return finish(sol, iterate());
  }

 private:
  // B^{-1} a_j
  Eigen::VectorXd ftran(Eigen::Index j) const {
    if (j < n_) return binv_ * a_.col(j);
    if (j < n_ + m_ub_) return binv_.col(j - n_);
    const std::size_t k = static_cast<std::size_t>(j - n_ - m_ub_);
    return artificial_sign_[k] * binv_.col(artificial_row_[k]);
  }

  void column_into(Eigen::Index j, Eigen::Ref<Eigen::VectorXd> out) const {
    if (j < n_) {
      out = a_.col(j);
      return;
    }
    out.setZero();
    if (j < n_ + m_ub_) {
      out[j - n_] = 1.0;
      return;
    }
    const std::size_t k = static_cast<std::size_t>(j - n_ - m_ub_);
    out[artificial_row_[k]] = artificial_sign_[k];
  }

  void refactor() {
    since_refactor_ = 0;
    if (m_ == 0) {
      binv_.resize(0, 0);
      return;
    }
    Eigen::MatrixXd basis_matrix(m_, m_);
    for (Eigen::Index r = 0; r < m_; ++r) {
      column_into(basis_[r], basis_matrix.col(r));
    }
    Eigen::PartialPivLU<Eigen::MatrixXd> lu(basis_matrix);
    binv_ = lu.inverse();

    Eigen::VectorXd rhs = b_;
    for (Eigen::Index j = 0; j < num_columns_; ++j) {
      if (state_[j] == VarState::kBasic || x_[j] == 0.0) continue;
      if (j < n_) {
        rhs.noalias() -= a_.col(j) * x_[j];
      } else if (j < n_ + m_ub_) {
        rhs[j - n_] -= x_[j];
      } else {
        const std::size_t k = static_cast<std::size_t>(j - n_ - m_ub_);
        rhs[artificial_row_[k]] -= artificial_sign_[k] * x_[j];
      }
    }
    // Solving through the factors plus one refinement step keeps basic
    // values accurate when the basis is ill-conditioned.
    Eigen::VectorXd xb = lu.solve(rhs);
    xb += lu.solve(rhs - basis_matrix * xb);
    for (Eigen::Index r = 0; r < m_; ++r) x_[basis_[r]] = xb[r];
  }

  void price() {
    Eigen::VectorXd cb(m_);
    for (Eigen::Index r = 0; r < m_; ++r) cb[r] = cost_[basis_[r]];
    y_ = binv_.transpose() * cb;
    reduced_.resize(num_columns_);
    Eigen::VectorXd c_struct(n_);
    for (Eigen::Index j = 0; j < n_; ++j) c_struct[j] = cost_[j];
    const Eigen::VectorXd d_struct = c_struct - a_.transpose() * y_;
    for (Eigen::Index j = 0; j < n_; ++j) reduced_[j] = d_struct[j];
    for (Eigen::Index i = 0; i < m_ub_; ++i) {
      reduced_[n_ + i] = cost_[n_ + i] - y_[i];
    }
    for (Eigen::Index j = n_ + m_ub_; j < num_columns_; ++j) {
      const std::size_t k = static_cast<std::size_t>(j - n_ - m_ub_);
      reduced_[j] =
          cost_[j] - artificial_sign_[k] * y_[artificial_row_[k]];
    }
  }

  // Direction +1 (increase) or -1 (decrease) if column j may enter, else 0.
  int entering_direction(Eigen::Index j) const {
    const double tol = options_.optimality_tol;
    const double d = reduced_[j];
    switch (state_[j]) {
      case VarState::kBasic:
        return 0;
      case VarState::kAtLower:
        if (upper_[j] - lower_[j] <= 0.0) return 0;
        return d < -tol ? +1 : 0;
      case VarState::kAtUpper:
        if (upper_[j] - lower_[j] <= 0.0) return 0;
        return d > tol ? -1 : 0;
      case VarState::kFreeZero:
        if (d < -tol) return +1;
        if (d > tol) return -1;
        return 0;
    }
    return 0;
  }

  Eigen::Index choose_entering(bool bland, const std::vector<char>& rejected,
                               int* direction) const {
    Eigen::Index best = -1;
    double best_score = 0.0;
    for (Eigen::Index j = 0; j < num_columns_; ++j) {
      if (rejected[static_cast<std::size_t>(j)]) continue;
      const int dir = entering_direction(j);
      if (dir == 0) continue;
      if (bland) {
        *direction = dir;
        return j;
      }
      const double score = std::abs(reduced_[j]);
      if (score > best_score) {
        best_score = score;
        best = j;
        *direction = dir;
      }
    }
    return best;
  }

  LpStatus iterate() {
    int degenerate_run = 0;
    // Columns whose only blocking pivots were too small to be stable; they
    // are skipped until the next basis change.
    std::vector<char> rejected(static_cast<std::size_t>(num_columns_), 0);
    bool any_rejected = false;
    bool force = false;
    bool priced = false;
    for (;;) {
      if (iterations_ >= max_iterations_) return LpStatus::kIterationLimit;
      if (!priced) {
        if (since_refactor_ >= options_.refactor_interval) refactor();
        price();
        priced = true;
      }

      const bool bland = options_.pivot_rule == PivotRule::kBland ||
                         degenerate_run >= options_.degenerate_switch;
      int dir = 0;
      const Eigen::Index q = choose_entering(bland, rejected, &dir);
      if (q < 0) {
        if (any_rejected) {
          // Retry the rejected columns on a fresh factorization, accepting
          // small pivots if nothing else remains.
          force = since_refactor_ == 0;
          std::fill(rejected.begin(), rejected.end(), 0);
          any_rejected = false;
          if (!force) refactor();
          priced = false;
          continue;
        }
        // Confirm on a fresh factorization before declaring optimality.
        if (since_refactor_ == 0) return LpStatus::kOptimal;
        refactor();
        priced = false;
        continue;
      }

      const Eigen::VectorXd alpha = ftran(q);
      const double pivot_floor =
          options_.pivot_tol * std::max(1.0, alpha.cwiseAbs().maxCoeff());
      // Distance basic row r may move before hitting the bound it approaches
      // as the entering variable moves by one unit; inf when unblocked.
      const auto room = [&](Eigen::Index r, double g) {
        const Eigen::Index bj = basis_[r];
        if (g < 0.0 && std::isfinite(lower_[bj])) return x_[bj] - lower_[bj];
        if (g > 0.0 && std::isfinite(upper_[bj])) return upper_[bj] - x_[bj];
        return kInf;
      };

      // Pass one: the largest step allowed with bounds relaxed by the
      // Harris relaxation; Bland mode uses the exact minimum.
      const double relax = bland ? 0.0 : options_.harris_relax;
      double t_max = kInf;
      for (Eigen::Index r = 0; r < m_; ++r) {
        const double g = -dir * alpha[r];
        if (std::abs(g) <= pivot_floor) continue;
        const double w = room(r, g);
        if (!std::isfinite(w)) continue;
        t_max = std::min(t_max, std::max(w + relax, 0.0) / std::abs(g));
      }
      const double flip = upper_[q] - lower_[q];  // inf when unbounded
      if (!std::isfinite(t_max) && !std::isfinite(flip)) {
        return LpStatus::kUnbounded;
      }

      // Pass two: among rows blocking within t_max, the largest pivot
      // (lowest basic index in Bland mode or on exact ties).
      Eigen::Index leave = -1;
      double theta = 0.0;
      if (flip <= t_max) {
        theta = flip;
      } else {
        const double tie = bland ? 1e-12 * std::max(1.0, t_max) : 0.0;
        double best_g = 0.0;
        for (Eigen::Index r = 0; r < m_; ++r) {
          const double g = -dir * alpha[r];
          if (std::abs(g) <= pivot_floor) continue;
          const double w = room(r, g);
          if (!std::isfinite(w)) continue;
          const double t = std::max(w, 0.0) / std::abs(g);
          if (t > t_max + tie) continue;
          bool better;
          if (leave < 0) {
            better = true;
          } else if (bland) {
            better = basis_[r] < basis_[leave];
          } else {
            better = std::abs(g) > best_g ||
                     (std::abs(g) == best_g && basis_[r] < basis_[leave]);
          }
          if (better) {
            leave = r;
            best_g = std::abs(g);
            theta = t;
          }
        }
      }

      if (leave >= 0 && !force &&
          std::abs(alpha[leave]) < options_.stable_pivot) {
        rejected[static_cast<std::size_t>(q)] = 1;
        any_rejected = true;
        continue;
      }
      force = false;
      priced = false;
      if (any_rejected) {
        std::fill(rejected.begin(), rejected.end(), 0);
        any_rejected = false;
      }

      ++iterations_;
      degenerate_run = theta <= 1e-12 ? degenerate_run + 1 : 0;

      if (theta != 0.0) {
        for (Eigen::Index r = 0; r < m_; ++r) {
          x_[basis_[r]] -= dir * theta * alpha[r];
        }
      }
      x_[q] += dir * theta;

      if (leave < 0) {
        // Bound flip, basis unchanged.
        if (dir > 0) {
          state_[q] = VarState::kAtUpper;
          x_[q] = upper_[q];
        } else {
          state_[q] = VarState::kAtLower;
          x_[q] = lower_[q];
        }
        continue;
      }

      const Eigen::Index out = basis_[leave];
      const double g_out = -dir * alpha[leave];
      if (g_out < 0.0) {
        state_[out] = VarState::kAtLower;
        x_[out] = lower_[out];
      } else {
        state_[out] = VarState::kAtUpper;
        x_[out] = upper_[out];
      }
      state_[q] = VarState::kBasic;
      basis_[leave] = q;

      // Product-form update of the explicit inverse.
      const double pivot = alpha[leave];
      const Eigen::RowVectorXd pivot_row = binv_.row(leave) / pivot;
      Eigen::VectorXd eta = alpha;
      eta[leave] = 0.0;
      binv_.noalias() -= eta * pivot_row;
      binv_.row(leave) = pivot_row;
      ++since_refactor_;
    }
  }

  LpSolution& finish(LpSolution& sol, LpStatus status) {
    sol.status = status;
    sol.iterations = iterations_;
    sol.x.resize(n_);
    for (Eigen::Index j = 0; j < n_; ++j) sol.x[j] = x_[j];
    sol.dual_ineq = Eigen::VectorXd::Zero(m_ub_);
    sol.dual_eq = Eigen::VectorXd::Zero(m_ - m_ub_);
    sol.reduced_costs = Eigen::VectorXd::Zero(n_);
    sol.objective = structural_cost_.dot(sol.x);
    if (status != LpStatus::kOptimal) return sol;

    refactor();
    price();
    for (Eigen::Index j = 0; j < n_; ++j) sol.x[j] = x_[j];
    for (Eigen::Index i = 0; i < m_ub_; ++i) {
      double mu = -y_[i];
      if (mu < 0.0 && mu > -options_.optimality_tol) mu = 0.0;
      sol.dual_ineq[i] = mu;
    }
    for (Eigen::Index i = m_ub_; i < m_; ++i) sol.dual_eq[i - m_ub_] = y_[i];
    for (Eigen::Index j = 0; j < n_; ++j) sol.reduced_costs[j] = reduced_[j];
    sol.objective = structural_cost_.dot(sol.x);
    return sol;
  }

  LpOptions options_;
  Eigen::Index n_;
  Eigen::Index m_ub_;
  Eigen::Index m_;
  Eigen::Index num_columns_ = 0;
  Eigen::MatrixXd a_;
  Eigen::VectorXd b_;
  Eigen::VectorXd structural_cost_;
  std::vector<double> lower_, upper_, cost_, x_;
  std::vector<VarState> state_;
  std::vector<Eigen::Index> artificial_row_;
  std::vector<double> artificial_sign_;
  std::vector<Eigen::Index> basis_;
  Eigen::MatrixXd binv_;
  Eigen::VectorXd y_;
  Eigen::VectorXd reduced_;
  double scale_b_ = 1.0;
  long iterations_ = 0;
  long max_iterations_ = 0;
  int since_refactor_ = 0;
};

bool all_finite(const Eigen::MatrixXd& m) { return m.allFinite(); }

std::string format_number(double v) {
  if (v == kInf) return "inf";
  if (v == -kInf) return "-inf";
  std::ostringstream os;
  os << std::setprecision(17) << v;
  return os.str();
}

double parse_number(const std::string& token) {
  if (token == "inf") return kInf;
  if (token == "-inf") return -kInf;
  try {
    std::size_t used = 0;
    const double v = std::stod(token, &used);
    if (used != token.size()) throw std::invalid_argument(token);
    return v;
  } catch (const std::exception&) {
    fail(ErrorCode::kParseError, "bad number '" + token + "' in LP dump");
  }
}

}  // namespace

LinearProgram LinearProgram::with_variables(Eigen::Index n) {
  LinearProgram lp;
  lp.objective = Eigen::VectorXd::Zero(n);
  lp.a_ub.resize(0, n);
  lp.b_ub.resize(0);
  lp.a_eq.resize(0, n);
  lp.b_eq.resize(0);
  lp.lower = Eigen::VectorXd::Zero(n);
  lp.upper = Eigen::VectorXd::Constant(n, kInf);
  return lp;
}

void validate(const LinearProgram& lp) {
  const Eigen::Index n = lp.objective.size();
  if (lp.a_ub.cols() != n || lp.a_eq.cols() != n) {
    fail(ErrorCode::kInvalidInput, "constraint matrix column count differs "
                                   "from objective length");
  }
  if (lp.a_ub.rows() != lp.b_ub.size() || lp.a_eq.rows() != lp.b_eq.size()) {
    fail(ErrorCode::kInvalidInput, "constraint rows and rhs length differ");
  }
  if (lp.lower.size() != n || lp.upper.size() != n) {
    fail(ErrorCode::kInvalidInput, "bound vectors must have one entry per "
                                   "variable");
  }
  if (!lp.objective.allFinite() || !all_finite(lp.a_ub) ||
      !all_finite(lp.a_eq) || !lp.b_ub.allFinite() || !lp.b_eq.allFinite()) {
    fail(ErrorCode::kInvalidInput, "LP data must be finite");
  }
  for (Eigen::Index j = 0; j < n; ++j) {
    if (std::isnan(lp.lower[j]) || std::isnan(lp.upper[j]) ||
        lp.lower[j] == kInf || lp.upper[j] == -kInf) {
      fail(ErrorCode::kInvalidInput, "invalid bound on variable " +
                                         std::to_string(j));
    }
  }
}

std::string to_string(LpStatus status) {
  switch (status) {
    case LpStatus::kOptimal:
      return "optimal";
    case LpStatus::kInfeasible:
      return "infeasible";
    case LpStatus::kUnbounded:
      return "unbounded";
    case LpStatus::kIterationLimit:
      return "iteration-limit";
    case LpStatus::kNumericalFailure:
      return "numerical-failure";
  }
  return "unknown";
}

LpSolution solve_lp(const LinearProgram& lp, const LpOptions& options) {
  validate(lp);
  for (Eigen::Index j = 0; j < lp.num_variables(); ++j) {
    if (lp.lower[j] > lp.upper[j]) {
      LpSolution sol;
      sol.status = LpStatus::kInfeasible;
      sol.x = Eigen::VectorXd::Zero(lp.num_variables());
      sol.dual_ineq = Eigen::VectorXd::Zero(lp.b_ub.size());
      sol.dual_eq = Eigen::VectorXd::Zero(lp.b_eq.size());
      sol.reduced_costs = Eigen::VectorXd::Zero(lp.num_variables());
      return sol;
    }
  }

  // An optimal answer is accepted only if it survives an independent
  // residual check. Anything else is retried with progressively more
  // conservative pivoting; the last attempt's answer stands.
  double scale = 1.0;
  if (lp.b_ub.size() > 0) scale = std::max(scale, lp.b_ub.cwiseAbs().maxCoeff());
  if (lp.b_eq.size() > 0) scale = std::max(scale, lp.b_eq.cwiseAbs().maxCoeff());
  const double accept = options.acceptance_tol * scale;

  LpSolution sol;
  long total_iterations = 0;
  for (int round = 0; round <= options.max_retries; ++round) {
    LpOptions attempt = options;
    if (round >= 1) {
      attempt.stable_pivot = std::max(options.stable_pivot, 1e-5);
      attempt.harris_relax = std::min(options.harris_relax, 1e-11);
    }
    if (round >= 2) {
      attempt.stable_pivot = std::max(options.stable_pivot, 1e-3);
      attempt.harris_relax = 0.0;
      attempt.refactor_interval = std::min(options.refactor_interval, 16);
    }
    if (round >= 3) attempt.pivot_rule = PivotRule::kBland;
    Simplex simplex(lp, attempt);
    sol = simplex.run();
    total_iterations += sol.iterations;
    if (sol.optimal()) {
      const LpResiduals res = check_solution(lp, sol);
      // Written so that NaN residuals fail.
      const bool accepted = std::isfinite(sol.objective) &&
                            res.primal_infeasibility <= accept &&
                            res.dual_infeasibility <= accept;
      if (accepted) break;
      if (round == options.max_retries) sol.status = LpStatus::kNumericalFailure;
    }
  }
  sol.iterations = total_iterations;
  return sol;
}

double LpResiduals::duality_gap() const {
  return std::abs(primal_objective - dual_objective) /
         (1.0 + std::abs(primal_objective));
}

LpResiduals check_solution(const LinearProgram& lp, const LpSolution& sol) {
  LpResiduals res;
  const Eigen::Index n = lp.num_variables();
  const double tol = 1e-9;
  const Eigen::VectorXd ub_slack = lp.b_ub - lp.a_ub * sol.x;
  const Eigen::VectorXd eq_resid = lp.a_eq * sol.x - lp.b_eq;
  for (Eigen::Index i = 0; i < ub_slack.size(); ++i) {
    res.primal_infeasibility =
        std::max(res.primal_infeasibility, -ub_slack[i]);
    res.dual_infeasibility =
        std::max(res.dual_infeasibility, -sol.dual_ineq[i]);
    res.complementarity = std::max(
        res.complementarity, std::abs(ub_slack[i] * sol.dual_ineq[i]));
  }
  for (Eigen::Index i = 0; i < eq_resid.size(); ++i) {
    res.primal_infeasibility =
        std::max(res.primal_infeasibility, std::abs(eq_resid[i]));
  }

  const Eigen::VectorXd r = lp.objective + lp.a_ub.transpose() * sol.dual_ineq -
                            lp.a_eq.transpose() * sol.dual_eq;
  double dual = lp.b_eq.dot(sol.dual_eq) - lp.b_ub.dot(sol.dual_ineq);
  for (Eigen::Index j = 0; j < n; ++j) {
    const double lo = lp.lower[j];
    const double hi = lp.upper[j];
    const double xj = sol.x[j];
    res.primal_infeasibility =
        std::max({res.primal_infeasibility, lo - xj, xj - hi});
    const bool at_lower = std::isfinite(lo) && xj <= lo + tol * (1 + std::abs(lo));
    const bool at_upper = std::isfinite(hi) && xj >= hi - tol * (1 + std::abs(hi));
    double violation = 0.0;
    if (!at_lower) violation = std::max(violation, r[j]);
    if (!at_upper) violation = std::max(violation, -r[j]);
    res.dual_infeasibility = std::max(res.dual_infeasibility, violation);
    if (r[j] > 0.0) {
      dual += (std::isfinite(lo) ? lo : xj) * r[j];
      if (std::isfinite(lo)) {
        res.complementarity =
            std::max(res.complementarity, std::abs((xj - lo) * r[j]));
      }
    } else if (r[j] < 0.0) {
      dual += (std::isfinite(hi) ? hi : xj) * r[j];
      if (std::isfinite(hi)) {
        res.complementarity =
            std::max(res.complementarity, std::abs((hi - xj) * r[j]));
      }
    }
  }
  res.primal_objective = lp.objective.dot(sol.x);
  res.dual_objective = dual;
  return res;
}

void write_lp_text(std::ostream& out, const LinearProgram& lp) {
  const Eigen::Index n = lp.num_variables();
  out << "lp " << n << ' ' << lp.b_ub.size() << ' ' << lp.b_eq.size() << '\n';
  out << 'c';
  for (Eigen::Index j = 0; j < n; ++j) out << ' ' << format_number(lp.objective[j]);
  out << '\n';
  const auto rows = [&](const char* tag, const Eigen::MatrixXd& a,
                        const Eigen::VectorXd& b) {
    for (Eigen::Index i = 0; i < b.size(); ++i) {
      out << tag << ' ' << format_number(b[i]) << " :";
      for (Eigen::Index j = 0; j < n; ++j) out << ' ' << format_number(a(i, j));
      out << '\n';
    }
  };
  rows("ub", lp.a_ub, lp.b_ub);
  rows("eq", lp.a_eq, lp.b_eq);
  for (Eigen::Index j = 0; j < n; ++j) {
    out << "bounds " << j << ' ' << format_number(lp.lower[j]) << ' '
        << format_number(lp.upper[j]) << '\n';
  }
  out << "end\n";
}

LinearProgram read_lp_text(std::istream& in) {
  std::string tag;
  Eigen::Index n = 0, m_ub = 0, m_eq = 0;
  if (!(in >> tag >> n >> m_ub >> m_eq) || tag != "lp" || n < 0 || m_ub < 0 ||
      m_eq < 0) {
    fail(ErrorCode::kParseError, "LP dump must start with 'lp <n> <m_ub> <m_eq>'");
  }
  LinearProgram lp = LinearProgram::with_variables(n);
  lp.a_ub.setZero(m_ub, n);
  lp.b_ub.setZero(m_ub);
  lp.a_eq.setZero(m_eq, n);
  lp.b_eq.setZero(m_eq);
  std::string token;
  const auto expect = [&](const std::string& want) {
    if (!(in >> token) || token != want) {
      fail(ErrorCode::kParseError, "expected '" + want + "' in LP dump");
    }
  };
  const auto number = [&]() {
    if (!(in >> token)) fail(ErrorCode::kParseError, "truncated LP dump");
    return parse_number(token);
  };
  expect("c");
  for (Eigen::Index j = 0; j < n; ++j) lp.objective[j] = number();
  const auto rows = [&](const char* tag_name, Eigen::MatrixXd& a,
                        Eigen::VectorXd& b) {
    for (Eigen::Index i = 0; i < b.size(); ++i) {
      expect(tag_name);
      b[i] = number();
      expect(":");
      for (Eigen::Index j = 0; j < n; ++j) a(i, j) = number();
    }
  };
  rows("ub", lp.a_ub, lp.b_ub);
  rows("eq", lp.a_eq, lp.b_eq);
  for (Eigen::Index j = 0; j < n; ++j) {
    expect("bounds");
    Eigen::Index idx = 0;
    if (!(in >> idx) || idx != j) fail(ErrorCode::kParseError, "bad bounds index");
    lp.lower[j] = number();
    lp.upper[j] = number();
  }
  expect("end");
  return lp;
}

std::string dump_lp_to_temp(const LinearProgram& lp, const std::string& tag) {
  static std::atomic<int> counter{0};
  std::ostringstream name;
  name << "shapeboost-" << tag << '-' << ::getpid() << '-' << counter++ << ".lp";
  const auto path = std::filesystem::temp_directory_path() / name.str();
  std::ofstream out(path);
  write_lp_text(out, lp);
  return path.string();
}

}  // namespace shapeboost
