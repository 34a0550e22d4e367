#pragma once

// Dense bounded-variable revised simplex.
//
//   minimize    c.x
//   subject to  A_ub x <= b_ub
//               A_eq x  = b_eq
//               lower <= x <= upper      (entries may be +/-infinity)
//
// Multiplier conventions: dual_ineq >= 0 for every <= row and the reduced
// costs satisfy  r = c + A_ub' dual_ineq - A_eq' dual_eq.  At an optimum the
// dual objective  b_eq.dual_eq - b_ub.dual_ineq + sum_j bound_j r_j  equals
// c.x, where bound_j is the bound a nonbasic variable sits at.

#include <Eigen/Dense>
#include <cstddef>
#include <iosfwd>
#include <string>

namespace shapeboost {

struct LinearProgram {
  Eigen::VectorXd objective;
  Eigen::MatrixXd a_ub;
  Eigen::VectorXd b_ub;
  Eigen::MatrixXd a_eq;
  Eigen::VectorXd b_eq;
  Eigen::VectorXd lower;
  Eigen::VectorXd upper;

  // n variables, all bounds [0, +inf), no rows.
  static LinearProgram with_variables(Eigen::Index n);

  Eigen::Index num_variables() const { return objective.size(); }
};

// Throws kInvalidInput on inconsistent dimensions or non-finite data.
void validate(const LinearProgram& lp);

enum class LpStatus {
  kOptimal,
  kInfeasible,
  kUnbounded,
  kIterationLimit,
  // Every attempt reached a basis whose solution failed the residual check.
  kNumericalFailure,
};

std::string to_string(LpStatus status);

enum class PivotRule {
  // Most negative reduced cost, lowest index on ties; falls back to Bland's
  // rule during runs of degenerate pivots.
  kDantzig,
  // Lowest eligible index always.
  kBland,
};

struct LpOptions {
  double feasibility_tol = 1e-9;
  double optimality_tol = 1e-9;
  double pivot_tol = 1e-9;
  // Bound relaxation of the Harris ratio test. Basic variables may drift
  // outside their bounds by about this much per pivot.
  double harris_relax = 1e-9;
  // Smallest pivot taken while another entering column is available.
  double stable_pivot = 1e-7;
  int refactor_interval = 64;
  int degenerate_switch = 300;
  long max_iterations = 0;  // 0: 50 * (rows + columns) + 1000
  PivotRule pivot_rule = PivotRule::kDantzig;
  // Re-solves after a non-optimal status or an optimum whose primal or dual
  // residual exceeds acceptance_tol * max(1, |b|_inf). Retries raise
  // stable_pivot to 1e-5 and cut harris_relax to 1e-11, then use 1e-3 with
  // no relaxation and refactoring every 16 pivots, then switch to Bland's
  // rule.
  int max_retries = 3;
  double acceptance_tol = 1e-8;
};

struct LpSolution {
  LpStatus status = LpStatus::kInfeasible;
  Eigen::VectorXd x;
  Eigen::VectorXd dual_ineq;
  Eigen::VectorXd dual_eq;
  Eigen::VectorXd reduced_costs;
  double objective = 0.0;
  long iterations = 0;

  bool optimal() const { return status == LpStatus::kOptimal; }
};

LpSolution solve_lp(const LinearProgram& lp, const LpOptions& options = {});

struct LpResiduals {
  double primal_infeasibility = 0.0;  // max row / bound violation
  double dual_infeasibility = 0.0;    // sign violations of multipliers
  double complementarity = 0.0;       // max |slack * multiplier|
  double primal_objective = 0.0;
  double dual_objective = 0.0;

  double duality_gap() const;  // |primal - dual| / (1 + |primal|)
};

// Recomputes all optimality residuals of `sol` directly from `lp`.
LpResiduals check_solution(const LinearProgram& lp, const LpSolution& sol);

// Text dump, one record per line:
//   lp <n> <m_ub> <m_eq>
//   c <c_1> ... <c_n>
//   ub <b_i> : <a_i1> ... <a_in>          (m_ub lines)
//   eq <b_i> : <a_i1> ... <a_in>          (m_eq lines)
//   bounds <j> <lower_j> <upper_j>        (n lines, "inf"/"-inf" allowed)
//   end
// Numbers use 17 significant digits.
void write_lp_text(std::ostream& out, const LinearProgram& lp);
LinearProgram read_lp_text(std::istream& in);

// Writes the LP to a fresh file under the system temp directory and returns
// its path. Used to attach failing problems to internal errors.
std::string dump_lp_to_temp(const LinearProgram& lp, const std::string& tag);

}  // namespace shapeboost
