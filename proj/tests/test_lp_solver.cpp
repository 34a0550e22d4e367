#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "doctest.h"
#include "lp_suite.hpp"
#include "shapeboost/error.hpp"
#include "shapeboost/lp_solver.hpp"

using namespace shapeboost;

namespace {

// Minimum of c.x over all vertices of a small bounded polyhedron, found by
// solving every n x n system of active constraints.
double vertex_enumeration_min(const LinearProgram& lp) {
  const Eigen::Index n = lp.num_variables();
  std::vector<Eigen::RowVectorXd> rows;
  std::vector<double> rhs;
  for (Eigen::Index i = 0; i < lp.b_ub.size(); ++i) {
    rows.push_back(lp.a_ub.row(i));
    rhs.push_back(lp.b_ub[i]);
  }
  for (Eigen::Index i = 0; i < lp.b_eq.size(); ++i) {
    rows.push_back(lp.a_eq.row(i));
    rhs.push_back(lp.b_eq[i]);
  }
  for (Eigen::Index j = 0; j < n; ++j) {
    Eigen::RowVectorXd e = Eigen::RowVectorXd::Zero(n);
    e[j] = 1.0;
    if (std::isfinite(lp.lower[j])) {
      rows.push_back(e);
      rhs.push_back(lp.lower[j]);
    }
    if (std::isfinite(lp.upper[j])) {
      rows.push_back(e);
      rhs.push_back(lp.upper[j]);
    }
  }
  const auto feasible = [&](const Eigen::VectorXd& x) {
    const double tol = 1e-9;
    for (Eigen::Index i = 0; i < lp.b_ub.size(); ++i) {
      if (lp.a_ub.row(i).dot(x) > lp.b_ub[i] + tol) return false;
    }
    for (Eigen::Index i = 0; i < lp.b_eq.size(); ++i) {
      if (std::abs(lp.a_eq.row(i).dot(x) - lp.b_eq[i]) > tol) return false;
    }
    for (Eigen::Index j = 0; j < n; ++j) {
      if (x[j] < lp.lower[j] - tol || x[j] > lp.upper[j] + tol) return false;
    }
    return true;
  };
  double best = INFINITY;
  const std::size_t k = rows.size();
  std::vector<int> pick(static_cast<std::size_t>(n));
  // Lexicographic n-subsets of the k constraints.
  for (Eigen::Index j = 0; j < n; ++j) pick[static_cast<std::size_t>(j)] = static_cast<int>(j);
  while (true) {
    Eigen::MatrixXd a(n, n);
    Eigen::VectorXd b(n);
    for (Eigen::Index j = 0; j < n; ++j) {
      a.row(j) = rows[static_cast<std::size_t>(pick[static_cast<std::size_t>(j)])];
      b[j] = rhs[static_cast<std::size_t>(pick[static_cast<std::size_t>(j)])];
    }
    Eigen::FullPivLU<Eigen::MatrixXd> lu(a);
    if (lu.rank() == n) {
      const Eigen::VectorXd x = lu.solve(b);
      if (feasible(x)) best = std::min(best, lp.objective.dot(x));
    }
    int t = static_cast<int>(n) - 1;
    while (t >= 0 && pick[static_cast<std::size_t>(t)] ==
                         static_cast<int>(k) - static_cast<int>(n) + t) {
      --t;
    }
    if (t < 0) break;
    ++pick[static_cast<std::size_t>(t)];
    for (std::size_t u = static_cast<std::size_t>(t) + 1; u < pick.size(); ++u) {
      pick[u] = pick[u - 1] + 1;
    }
  }
  return best;
}

}  // namespace

TEST_CASE("one-variable LP and its active multiplier") {
  const auto lp = testutil::hand_lp_one_variable();
  const auto sol = solve_lp(lp);
  REQUIRE(sol.optimal());
  CHECK(sol.x[0] == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(sol.dual_ineq[0] == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(sol.objective == doctest::Approx(1.0));
}

TEST_CASE("restricted dual with two examples") {
  const auto lp = testutil::hand_lp_restricted_dual();
  const auto sol = solve_lp(lp);
  REQUIRE(sol.optimal());
  CHECK(sol.x[0] == doctest::Approx(0.5));
  CHECK(sol.x[1] == doctest::Approx(0.5));
  CHECK(sol.x[2] == doctest::Approx(0.0));
  // Weight of the only hypothesis row is 1 at optimum.
  CHECK(sol.dual_ineq[0] == doctest::Approx(1.0));
}

TEST_CASE("linear objective over the l1 ball picks the largest coordinate") {
  std::mt19937_64 rng(21);
  std::normal_distribution<double> normal;
  for (int trial = 0; trial < 30; ++trial) {
    Eigen::VectorXd c(1 + static_cast<Eigen::Index>(rng() % 6));
    for (Eigen::Index j = 0; j < c.size(); ++j) c[j] = normal(rng);
    const auto sol = solve_lp(testutil::hand_lp_l1_ball(c));
    REQUIRE(sol.optimal());
    Eigen::Index arg;
    const double best = c.cwiseAbs().maxCoeff(&arg);
    CHECK(-sol.objective == doctest::Approx(best).epsilon(1e-12));
    const Eigen::Index n = c.size();
    const double alpha = sol.x[arg] - sol.x[n + arg];
    CHECK(alpha == doctest::Approx(c[arg] > 0 ? 1.0 : -1.0).epsilon(1e-12));
  }
}

TEST_CASE("infeasible and unbounded problems are reported in-band") {
  auto infeasible = LinearProgram::with_variables(1);
  infeasible.objective << 1.0;
  infeasible.a_ub = Eigen::MatrixXd::Constant(1, 1, 1.0);
  infeasible.b_ub = Eigen::VectorXd::Constant(1, -1.0);
  CHECK(solve_lp(infeasible).status == LpStatus::kInfeasible);

  auto crossed = LinearProgram::with_variables(1);
  crossed.objective << 1.0;
  crossed.lower << 2.0;
  crossed.upper << 1.0;
  CHECK(solve_lp(crossed).status == LpStatus::kInfeasible);

  auto eq_conflict = LinearProgram::with_variables(2);
  eq_conflict.objective << 1.0, 1.0;
  eq_conflict.a_eq.resize(2, 2);
  eq_conflict.a_eq << 1.0, 1.0, 1.0, 1.0;
  eq_conflict.b_eq.resize(2);
  eq_conflict.b_eq << 1.0, 2.0;
  CHECK(solve_lp(eq_conflict).status == LpStatus::kInfeasible);

  auto unbounded = LinearProgram::with_variables(2);
  unbounded.objective << -1.0, 0.0;
  unbounded.a_ub.resize(1, 2);
  unbounded.a_ub << 0.0, 1.0;
  unbounded.b_ub = Eigen::VectorXd::Ones(1);
  CHECK(solve_lp(unbounded).status == LpStatus::kUnbounded);
}

TEST_CASE("malformed programs are rejected") {
  auto lp = LinearProgram::with_variables(2);
  lp.a_ub = Eigen::MatrixXd::Zero(1, 3);
  lp.b_ub = Eigen::VectorXd::Zero(1);
  CHECK_THROWS_AS(solve_lp(lp), Error);
  auto nan = LinearProgram::with_variables(1);
  nan.objective << NAN;
  CHECK_THROWS_AS(solve_lp(nan), Error);
}

TEST_CASE("random feasible LPs: optimality, duality and determinism") {
  std::mt19937_64 rng(22);
  for (int trial = 0; trial < 200; ++trial) {
    const auto gen = testutil::random_feasible_lp(rng);
    const auto sol = solve_lp(gen.lp);
    REQUIRE(sol.optimal());
    CHECK(sol.objective <= gen.lp.objective.dot(gen.x0) + 1e-8);
    const auto dual = testutil::independent_dual_check(gen.lp, sol);
    CHECK(dual.primal_violation <= 1e-8);
    CHECK(dual.sign_violation <= 1e-9);
    CHECK(std::abs(sol.objective - dual.dual_objective) <=
          1e-6 * (1.0 + std::abs(sol.objective)));
    const auto res = check_solution(gen.lp, sol);
    CHECK(res.complementarity <= 1e-6);
    CHECK(res.duality_gap() <= 1e-6);
    CHECK(testutil::bit_identical(sol, solve_lp(gen.lp)));
  }
}

TEST_CASE("small LPs match vertex enumeration") {
  std::mt19937_64 rng(23);
  int checked = 0;
  for (int trial = 0; trial < 400 && checked < 60; ++trial) {
    const auto gen = testutil::random_feasible_lp(rng);
    if (gen.lp.num_variables() > 3) continue;
    ++checked;
    const auto sol = solve_lp(gen.lp);
    REQUIRE(sol.optimal());
    CHECK(sol.objective ==
          doctest::Approx(vertex_enumeration_min(gen.lp)).epsilon(1e-9));
  }
  CHECK(checked >= 30);
}

TEST_CASE("Bland's rule reaches the same optimum") {
  std::mt19937_64 rng(24);
  LpOptions bland;
  bland.pivot_rule = PivotRule::kBland;
  for (int trial = 0; trial < 50; ++trial) {
    const auto gen = testutil::random_feasible_lp(rng);
    const auto a = solve_lp(gen.lp);
    const auto b = solve_lp(gen.lp, bland);
    REQUIRE(b.optimal());
    CHECK(b.objective == doctest::Approx(a.objective).epsilon(1e-9));
  }
}

TEST_CASE("degenerate assignment polytope") {
  // 4x4 assignment LP: highly degenerate vertices, integral optimum.
  const int k = 4;
  auto lp = LinearProgram::with_variables(k * k);
  std::mt19937_64 rng(25);
  for (int j = 0; j < k * k; ++j) lp.objective[j] = static_cast<double>(rng() % 10);
  lp.a_eq = Eigen::MatrixXd::Zero(2 * k, k * k);
  lp.b_eq = Eigen::VectorXd::Ones(2 * k);
  for (int r = 0; r < k; ++r) {
    for (int c = 0; c < k; ++c) {
      lp.a_eq(r, r * k + c) = 1.0;
      lp.a_eq(k + c, r * k + c) = 1.0;
    }
  }
  const auto sol = solve_lp(lp);
  REQUIRE(sol.optimal());
  std::vector<int> perm{0, 1, 2, 3};
  double best = INFINITY;
  do {
    double s = 0.0;
    for (int r = 0; r < k; ++r) s += lp.objective[r * k + perm[static_cast<std::size_t>(r)]];
    best = std::min(best, s);
  } while (std::next_permutation(perm.begin(), perm.end()));
  CHECK(sol.objective == doctest::Approx(best).epsilon(1e-12));
}

TEST_CASE("text dump round trip") {
  std::mt19937_64 rng(26);
  const auto gen = testutil::random_feasible_lp(rng);
  std::stringstream text;
  write_lp_text(text, gen.lp);
  const auto back = read_lp_text(text);
  CHECK(back.objective == gen.lp.objective);
  CHECK(back.a_ub == gen.lp.a_ub);
  CHECK(back.b_ub == gen.lp.b_ub);
  CHECK(back.a_eq == gen.lp.a_eq);
  CHECK(back.b_eq == gen.lp.b_eq);
  CHECK(back.lower == gen.lp.lower);
  CHECK(back.upper == gen.lp.upper);
  std::stringstream bad("lp 2 0 0\nc 1\n");
  CHECK_THROWS_AS(read_lp_text(bad), Error);
}
