#include "shapeboost/booster.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <iomanip>
#include <limits>
#include <ostream>
#include <sstream>

#include "shapeboost/error.hpp"
#include "shapeboost/lp_solver.hpp"

namespace shapeboost {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

}  // namespace


void validate(const BoostConfig& cfg) {
  if (!(cfg.nu > 0.0 && cfg.nu <= 1.0)) {
    fail(ErrorCode::kInvalidParameter, "nu must lie in (0, 1]");
  }
  if (cfg.max_rounds < 1) {
    fail(ErrorCode::kInvalidParameter, "rounds must be at least 1");
  }
  if (!(cfg.stop_eps > 0.0)) {
    fail(ErrorCode::kInvalidParameter, "stop epsilon must be positive");
  }
  validate(cfg.weak);
}

double edge(const BaseHypothesis& h, const PatternBank& bank,
            const Sample& sample, const Distribution& d) {
  if (d.size() != sample.size()) {
    fail(ErrorCode::kInvalidInput, "distribution size differs from sample size");
  }
  const std::size_t q = bank.patterns_per_instance();
  double e = 0.0;
  for (std::size_t i = 0; i < sample.size(); ++i) {
    std::vector<std::vector<double>> windows;
    windows.reserve(q);
    for (std::size_t k = 0; k < q; ++k) {
      const auto p = bank.pattern(sample.instances[i] * q + k);
      windows.emplace_back(p.begin(), p.end());
    }
    e += sample.labels[i] * d.weights[i] * eval_base_on_windows(h, bank, windows);
  }
  return e;
}

RestrictedDual restricted_dual(const std::vector<std::vector<double>>& margins,
                               double nu) {
  if (margins.empty()) {
    fail(ErrorCode::kInvalidParameter, "restricted dual needs a hypothesis");
  }
  if (!(nu > 0.0 && nu <= 1.0)) {
    fail(ErrorCode::kInvalidParameter, "nu must lie in (0, 1]");
  }
  const auto t = static_cast<Eigen::Index>(margins.size());
  const auto m = static_cast<Eigen::Index>(margins.front().size());
  if (m == 0) fail(ErrorCode::kInvalidInput, "restricted dual on an empty sample");

  // Variables: d_1..d_m, gamma.
  LinearProgram lp = LinearProgram::with_variables(m + 1);
  lp.objective[m] = 1.0;
  const double cap = 1.0 / (nu * static_cast<double>(m));
  lp.upper.head(m).setConstant(cap);
  lp.lower[m] = -kInf;
  lp.upper[m] = kInf;
  lp.a_ub = Eigen::MatrixXd::Zero(t, m + 1);
  lp.b_ub = Eigen::VectorXd::Zero(t);
  for (Eigen::Index j = 0; j < t; ++j) {
    const auto& row = margins[static_cast<std::size_t>(j)];
    if (static_cast<Eigen::Index>(row.size()) != m) {
      fail(ErrorCode::kInvalidInput, "margin rows differ in length");
    }
    for (Eigen::Index i = 0; i < m; ++i) {
      lp.a_ub(j, i) = row[static_cast<std::size_t>(i)];
    }
    lp.a_ub(j, m) = -1.0;
  }
  lp.a_eq = Eigen::MatrixXd::Zero(1, m + 1);
  lp.a_eq.row(0).head(m).setOnes();
  lp.b_eq = Eigen::VectorXd::Ones(1);

  const LpSolution sol = solve_lp(lp);
  if (!sol.optimal()) {
    fail(ErrorCode::kInternal, "restricted dual LP returned " +
                                   to_string(sol.status) + "; dumped to " +
                                   dump_lp_to_temp(lp, "restricted-dual"));
  }

  RestrictedDual out;
  out.d.nu = nu;
  out.d.weights.resize(static_cast<std::size_t>(m));
  for (Eigen::Index i = 0; i < m; ++i) {
    // Clip solver round-off onto the box.
    out.d.weights[static_cast<std::size_t>(i)] = std::clamp(sol.x[i], 0.0, cap);
  }
  out.gamma = sol.x[m];
  out.w.resize(static_cast<std::size_t>(t));
  for (Eigen::Index j = 0; j < t; ++j) {
    out.w[static_cast<std::size_t>(j)] = std::max(0.0, sol.dual_ineq[j]);
  }
  out.rho = sol.dual_eq[0];
  return out;
}

double soft_margin_objective(const std::vector<std::vector<double>>& margins,
                             const std::vector<double>& w, double rho,
                             double nu) {
  const std::size_t m = margins.front().size();
  double slack = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    double margin = 0.0;
    for (std::size_t j = 0; j < margins.size(); ++j) margin += w[j] * margins[j][i];
    slack += std::max(0.0, rho - margin);
  }
  return rho - slack / (nu * static_cast<double>(m));
}

double BoostTrace::duality_gap() const {
  return std::abs(primal_objective - final_gamma);
}

TrainResult train(const Sample& sample, const PatternBank& bank,
                  const GramTensor& gram, const BoostConfig& cfg) {
  validate(cfg);
  if (sample.size() < 2) {
    fail(ErrorCode::kInvalidInput, "training needs at least two instances");
  }
  const WeakLearnProblem problem(bank, gram, sample);
  const std::size_t m = sample.size();

  TrainResult result;
  BoostTrace& trace = result.trace;
  Distribution d = Distribution::uniform(m, cfg.nu);
  std::vector<BaseHypothesis> hypotheses;
  std::vector<std::vector<double>> margins;
  RestrictedDual dual;
  double gamma = -kInf;

  for (int t = 1; t <= cfg.max_rounds; ++t) {
    const auto start = std::chrono::steady_clock::now();
    WeakLearnConfig weak = cfg.weak;
    weak.seed = cfg.weak.seed + static_cast<std::uint64_t>(t);
    WeakLearnResult wl = weak_learn(problem, d, weak);

    BoostRound round;
    round.round = t;
    round.edge = wl.edge;
    round.dc_iterations = static_cast<int>(wl.objective_trace.size());
    round.lp_solves = wl.lp_solves;
    if (t > 1 && wl.edge <= gamma + cfg.stop_eps) {
      round.stopped = true;
      round.gamma = gamma;
      round.rho = dual.rho;
      round.dual_violation = distribution_violation(d);
      round.nonzero_d = static_cast<std::size_t>(
          std::count_if(d.weights.begin(), d.weights.end(),
                        [](double v) { return v > 0.0; }));
      round.wall_ms = std::chrono::duration<double, std::milli>(
                          std::chrono::steady_clock::now() - start)
                          .count();
      trace.rounds.push_back(round);
      trace.early_stop = true;
      break;
    }

    std::vector<double> row(m);
    for (std::size_t i = 0; i < m; ++i) {
      row[i] = sample.labels[i] * problem.eval(wl.alpha, i);
    }
    margins.push_back(std::move(row));
    hypotheses.push_back(std::move(wl.hypothesis));

    dual = restricted_dual(margins, cfg.nu);
    d = dual.d;
    gamma = dual.gamma;

    round.gamma = gamma;
    round.rho = dual.rho;
    round.dual_violation = distribution_violation(d);
    round.nonzero_d = static_cast<std::size_t>(std::count_if(
        d.weights.begin(), d.weights.end(), [](double v) { return v > 0.0; }));
    round.wall_ms = std::chrono::duration<double, std::milli>(
                        std::chrono::steady_clock::now() - start)
                        .count();
    trace.rounds.push_back(round);
  }

  trace.final_gamma = gamma;
  trace.final_rho = dual.rho;
  trace.final_d = d.weights;
  trace.raw_weights = dual.w;
  trace.primal_objective = soft_margin_objective(margins, dual.w, dual.rho, cfg.nu);

  Ensemble& g = result.ensemble;
  g.hyper.pattern_length = bank.pattern_length();
  g.hyper.nu = cfg.nu;
  g.hyper.lambda = cfg.weak.lambda;
  g.hyper.kernel = gram.spec();
  for (std::size_t j = 0; j < hypotheses.size(); ++j) {
    if (dual.w[j] <= kWeightPruneTol) continue;
    g.terms.push_back({dual.w[j], std::move(hypotheses[j])});
  }
  return result;
}

void write_trace_csv(std::ostream& out, const BoostTrace& trace) {
  out << "round,gamma,edge,nonzero_d_count,wall_ms\n";
  out << std::setprecision(17);
  for (const auto& r : trace.rounds) {
    out << r.round << ',' << r.gamma << ',' << r.edge << ',' << r.nonzero_d
        << ',' << std::setprecision(6) << r.wall_ms << std::setprecision(17)
        << '\n';
  }
}

}  // namespace shapeboost
