#include "shapeboost/weak_learner.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <sstream>

#include "shapeboost/error.hpp"
#include "shapeboost/lp_solver.hpp"

namespace shapeboost {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr std::size_t kCutsPerRound = 4;
constexpr std::size_t kInitialColumns = 20;
constexpr std::size_t kColumnsPerRound = 32;
constexpr double kDescentTolerance = 1e-7;

struct Nonzero {
  std::size_t flat;  // bank flat index of the coefficient's pattern
  double value;
};

std::vector<Nonzero> nonzeros_of(const WeakLearnProblem& problem,
                                 const std::vector<double>& alpha) {
  std::vector<Nonzero> out;
  const std::size_t q = problem.patterns_per_instance();
  for (std::size_t a = 0; a < alpha.size(); ++a) {
    if (alpha[a] != 0.0) out.push_back({problem.bank_flat(a / q, a % q), alpha[a]});
  }
  return out;
}

void scores_into(const WeakLearnProblem& problem, const std::vector<Nonzero>& nz,
                 std::size_t sample_pos, std::vector<double>& scores) {
  const std::size_t q = problem.patterns_per_instance();
  scores.assign(q, 0.0);
  const std::size_t begin = problem.bank_flat(sample_pos, 0);
  for (const auto& e : nz) {
    const auto row = problem.gram().row(e.flat);
    for (std::size_t j = 0; j < q; ++j) scores[j] += e.value * row[begin + j];
  }
}

std::size_t argmax_first(const std::vector<double>& v) {
  std::size_t best = 0;
  for (std::size_t j = 1; j < v.size(); ++j) {
    if (v[j] > v[best]) best = j;
  }
  return best;
}

bool has_both_labels(const Sample& s) {
  bool pos = false, neg = false;
  for (int y : s.labels) (y > 0 ? pos : neg) = true;
  return pos && neg;
}

double quadratic_norm(const WeakLearnProblem& problem,
                      const std::vector<double>& alpha) {
  const auto nz = nonzeros_of(problem, alpha);
  double s = 0.0;
  for (const auto& a : nz) {
    const auto row = problem.gram().row(a.flat);
    for (const auto& b : nz) s += a.value * b.value * row[b.flat];
  }
  return s;
}

void rescale_to_quadratic_budget(const WeakLearnProblem& problem,
                                 std::vector<double>& alpha, double lambda,
                                 double* objective) {
  const double quad = quadratic_norm(problem, alpha);
  if (!(quad > 0.0)) return;
  const double scale = lambda / std::sqrt(quad);
  for (double& a : alpha) a *= scale;
  if (objective) *objective *= scale;
}

}  // namespace

void validate(const WeakLearnConfig& cfg) {
  if (!(cfg.lambda >= 0.0) || !std::isfinite(cfg.lambda)) {
    fail(ErrorCode::kInvalidParameter, "lambda must be a finite nonnegative value");
  }
  if (!(cfg.epsilon > 0.0)) {
    fail(ErrorCode::kInvalidParameter, "DC epsilon must be positive");
  }
  if (cfg.max_dc_iter < 1) {
    fail(ErrorCode::kInvalidParameter, "max DC iterations must be at least 1");
  }
}

WeakLearnProblem::WeakLearnProblem(const PatternBank& bank,
                                   const GramTensor& gram, const Sample& sample)
    : bank_(&bank),
      gram_(&gram),
      sample_(&sample),
      q_(bank.patterns_per_instance()) {
  if (gram.rows() != bank.size() || gram.cols() != bank.size() ||
      !gram.symmetric()) {
    fail(ErrorCode::kInvalidInput,
         "weak learner needs the symmetric bank x bank Gram");
  }
  if (sample.labels.size() != sample.instances.size()) {
    fail(ErrorCode::kInvalidInput, "sample labels and instances differ in size");
  }
  for (std::size_t s = 0; s < sample.size(); ++s) {
    if (sample.instances[s] >= bank.num_instances()) {
      fail(ErrorCode::kInvalidInput, "sample instance outside the bank");
    }
    if (sample.labels[s] != 1 && sample.labels[s] != -1) {
      fail(ErrorCode::kInvalidInput, "labels must be -1 or +1");
    }
  }
}

std::vector<double> WeakLearnProblem::window_scores(
    const std::vector<double>& alpha, std::size_t sample_pos) const {
  std::vector<double> scores;
  scores_into(*this, nonzeros_of(*this, alpha), sample_pos, scores);
  return scores;
}

double WeakLearnProblem::eval(const std::vector<double>& alpha,
                              std::size_t sample_pos) const {
  const auto scores = window_scores(alpha, sample_pos);
  return *std::max_element(scores.begin(), scores.end());
}

double WeakLearnProblem::edge(const std::vector<double>& alpha,
                              const Distribution& d) const {
  if (d.size() != sample_->size()) {
    fail(ErrorCode::kInvalidInput, "distribution size differs from sample size");
  }
  const auto nz = nonzeros_of(*this, alpha);
  std::vector<double> scores;
  double e = 0.0;
  for (std::size_t i = 0; i < sample_->size(); ++i) {
    if (d.weights[i] == 0.0) continue;
    scores_into(*this, nz, i, scores);
    e += sample_->labels[i] * d.weights[i] *
         *std::max_element(scores.begin(), scores.end());
  }
  return e;
}

BaseHypothesis WeakLearnProblem::to_hypothesis(const std::vector<double>& alpha,
                                               double drop_tol) const {
  BaseHypothesis h;
  h.bank_id = bank_->id();
  h.kernel = gram_->spec();
  for (std::size_t a = 0; a < alpha.size(); ++a) {
    if (alpha[a] == 0.0 || std::abs(alpha[a]) <= drop_tol) continue;
    h.alpha.push_back(
        {PatternKey{static_cast<std::uint32_t>(sample_->instances[a / q_]),
                    static_cast<std::uint32_t>(a % q_)},
         alpha[a]});
  }
  canonicalize(h);
  return h;
}

void WeakLearnProblem::compute_extremes() const {
  if (!window_max_.empty() || sample_->size() == 0) return;
  const std::size_t m = sample_->size();
  const std::size_t n = num_coefficients();
  window_max_.resize(n * m);
  window_min_.resize(n * m);
  for (std::size_t a = 0; a < n; ++a) {
    const auto row = gram_->row(bank_flat(a / q_, a % q_));
    for (std::size_t i = 0; i < m; ++i) {
      const std::size_t begin = bank_flat(i, 0);
      const auto [lo, hi] = std::minmax_element(row.begin() + begin,
                                                row.begin() + begin + q_);
      window_max_[a * m + i] = *hi;
      window_min_[a * m + i] = *lo;
    }
  }
}

const std::vector<double>& WeakLearnProblem::window_max() const {
  compute_extremes();
  return window_max_;
}

const std::vector<double>& WeakLearnProblem::window_min() const {
  compute_extremes();
  return window_min_;
}

AssignmentMap argmax_assignment(const WeakLearnProblem& problem,
                                const std::vector<double>& alpha) {
  const Sample& s = problem.sample();
  AssignmentMap map;
  const auto nz = nonzeros_of(problem, alpha);
  std::vector<double> scores;
  for (std::size_t p = 0; p < s.size(); ++p) {
    if (s.labels[p] != 1) continue;
    scores_into(problem, nz, p, scores);
    map.positions.push_back(p);
    map.offsets.push_back(argmax_first(scores));
  }
  if (map.positions.empty()) {
    fail(ErrorCode::kInvalidInput, "sample has no positive instances");
  }
  return map;
}

DcSubproblemResult dc_subproblem(const WeakLearnProblem& problem,
                                 const Distribution& d,
                                 const AssignmentMap& assignment,
                                 const WeakLearnConfig& cfg,
                                 const std::vector<double>* warm_alpha,
                                 DcWorkingSet* working) {
  validate(cfg);
  const Sample& s = problem.sample();
  if (d.size() != s.size()) {
    fail(ErrorCode::kInvalidInput, "distribution size differs from sample size");
  }
  const std::size_t q = problem.patterns_per_instance();
  const std::size_t n = problem.num_coefficients();
  const auto flat = [&](std::size_t a) { return problem.bank_flat(a / q, a % q); };

  // Linear objective from the fixed positive windows.
  std::vector<double> gain(n, 0.0);
  for (std::size_t t = 0; t < assignment.positions.size(); ++t) {
    const std::size_t p = assignment.positions[t];
    if (d.weights[p] == 0.0) continue;
    const auto row = problem.window_row(p, assignment.offsets[t]);
    for (std::size_t a = 0; a < n; ++a) gain[a] += d.weights[p] * row[flat(a)];
  }
  double gain_scale = 1.0;
  for (double g : gain) gain_scale = std::max(gain_scale, std::abs(g));

  std::vector<std::size_t> negatives;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s.labels[i] == -1 && d.weights[i] > 0.0) negatives.push_back(i);
  }
  const std::size_t nq = negatives.size();
  const std::vector<Nonzero> warm_nz =
      warm_alpha ? nonzeros_of(problem, *warm_alpha) : std::vector<Nonzero>{};

  // Window rows per active negative, ascending.
  std::vector<std::vector<std::size_t>> rows(nq);
  const bool lazy_rows = nq * q > kFullRowLimit;
  {
    std::vector<double> scores;
    for (std::size_t t = 0; t < nq; ++t) {
      if (!lazy_rows) {
        for (std::size_t j = 0; j < q; ++j) rows[t].push_back(j);
        continue;
      }
      scores_into(problem, warm_nz, negatives[t], scores);
      rows[t].push_back(argmax_first(scores));
      if (working && negatives[t] < working->rows.size()) {
        const auto& kept = working->rows[negatives[t]];
        rows[t].insert(rows[t].end(), kept.begin(), kept.end());
      }
      std::sort(rows[t].begin(), rows[t].end());
      rows[t].erase(std::unique(rows[t].begin(), rows[t].end()), rows[t].end());
    }
  }

  // Coefficient columns, ascending.
  std::vector<std::size_t> cols;
  const bool lazy_cols = n > kFullColumnLimit;
  if (!lazy_cols) {
    cols.resize(n);
    std::iota(cols.begin(), cols.end(), std::size_t{0});
  } else {
    if (warm_alpha) {
      for (std::size_t a = 0; a < n; ++a) {
        if ((*warm_alpha)[a] != 0.0) cols.push_back(a);
      }
    }
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    const std::size_t seed_count = std::min(kInitialColumns, n);
    std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(seed_count),
                      order.end(), [&](std::size_t x, std::size_t y) {
                        const double gx = std::abs(gain[x]), gy = std::abs(gain[y]);
                        return gx > gy || (gx == gy && x < y);
                      });
    cols.insert(cols.end(), order.begin(), order.begin() + static_cast<std::ptrdiff_t>(seed_count));
    if (working) {
      cols.insert(cols.end(), working->columns.begin(), working->columns.end());
    }
    std::sort(cols.begin(), cols.end());
    cols.erase(std::unique(cols.begin(), cols.end()), cols.end());
  }

  DcSubproblemResult out;
  for (;;) {
    const std::size_t nc = cols.size();
    std::size_t total_rows = 0;
    for (const auto& r : rows) total_rows += r.size();
    const auto num_vars = static_cast<Eigen::Index>(2 * nc + nq);

    // Variables: alpha+ over cols, alpha- over cols, one bound per negative.
    LinearProgram lp = LinearProgram::with_variables(num_vars);
    for (std::size_t c = 0; c < nc; ++c) {
      lp.objective[static_cast<Eigen::Index>(c)] = -gain[cols[c]];
      lp.objective[static_cast<Eigen::Index>(nc + c)] = gain[cols[c]];
    }
    for (std::size_t t = 0; t < nq; ++t) {
      const auto v = static_cast<Eigen::Index>(2 * nc + t);
      lp.objective[v] = d.weights[negatives[t]];
      lp.lower[v] = -kInf;
    }
    lp.a_ub = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(1 + total_rows), num_vars);
    lp.b_ub = Eigen::VectorXd::Zero(lp.a_ub.rows());
    lp.a_ub.row(0).head(static_cast<Eigen::Index>(2 * nc)).setOnes();
    lp.b_ub[0] = cfg.lambda;
    std::vector<std::pair<std::size_t, std::size_t>> row_ids;  // (t, j)
    Eigen::Index r = 1;
    for (std::size_t t = 0; t < nq; ++t) {
      for (std::size_t j : rows[t]) {
        const auto krow = problem.window_row(negatives[t], j);
        for (std::size_t c = 0; c < nc; ++c) {
          const double k = krow[flat(cols[c])];
          lp.a_ub(r, static_cast<Eigen::Index>(c)) = k;
          lp.a_ub(r, static_cast<Eigen::Index>(nc + c)) = -k;
        }
        lp.a_ub(r, static_cast<Eigen::Index>(2 * nc + t)) = -1.0;
        row_ids.emplace_back(t, j);
        ++r;
      }
    }

    const LpSolution sol = solve_lp(lp);
    ++out.lp_solves;
    if (!sol.optimal()) {
      std::ostringstream msg;
      msg << "weak-learner LP returned " << to_string(sol.status) << " (vars "
          << num_vars << ", rows " << lp.a_ub.rows() << ", iterations "
          << sol.iterations << "); dumped to "
          << dump_lp_to_temp(lp, "weak-learner");
      fail(ErrorCode::kInternal, msg.str());
    }

    out.alpha.assign(n, 0.0);
    for (std::size_t c = 0; c < nc; ++c) {
      out.alpha[cols[c]] = sol.x[static_cast<Eigen::Index>(c)] -
                           sol.x[static_cast<Eigen::Index>(nc + c)];
    }
    out.objective = sol.objective;
    out.rows = total_rows;
    out.columns = nc;
    bool added = false;

    if (lazy_rows) {
      // Separation: add the most violated windows for each negative.
      const auto nz = nonzeros_of(problem, out.alpha);
      std::vector<double> scores;
      for (std::size_t t = 0; t < nq; ++t) {
        const double bound = sol.x[static_cast<Eigen::Index>(2 * nc + t)];
        scores_into(problem, nz, negatives[t], scores);
        const double tol = 1e-9 * (1.0 + std::abs(bound));
        std::vector<std::pair<double, std::size_t>> violated;
        for (std::size_t j = 0; j < q; ++j) {
          if (scores[j] > bound + tol &&
              !std::binary_search(rows[t].begin(), rows[t].end(), j)) {
            violated.emplace_back(-(scores[j] - bound), j);
          }
        }
        if (violated.empty()) continue;
        std::sort(violated.begin(), violated.end());
        for (std::size_t c = 0; c < std::min(kCutsPerRound, violated.size()); ++c) {
          rows[t].push_back(violated[c].second);
        }
        std::sort(rows[t].begin(), rows[t].end());
        added = true;
      }
    }

    if (lazy_cols) {
      // Pricing: reduced costs of the absent coefficients under the row
      // multipliers, -/+ gain_a + mu_0 +/- sum_r mu_r K(a, row r).
      const double mu0 = sol.dual_ineq[0];
      std::vector<std::pair<double, std::span<const double>>> active;
      for (std::size_t k = 0; k < row_ids.size(); ++k) {
        const double mu = sol.dual_ineq[static_cast<Eigen::Index>(k + 1)];
        if (mu > 0.0) {
          active.emplace_back(mu, problem.window_row(negatives[row_ids[k].first],
                                                     row_ids[k].second));
        }
      }
      const double tol = 1e-9 * gain_scale;
      std::vector<std::pair<double, std::size_t>> entering;
      std::size_t next_col = 0;
      for (std::size_t a = 0; a < n; ++a) {
        if (next_col < nc && cols[next_col] == a) {
          ++next_col;
          continue;
        }
        const std::size_t fa = flat(a);
        double kmu = 0.0;
        for (const auto& [mu, krow] : active) kmu += mu * krow[fa];
        const double reduced = mu0 - std::abs(gain[a] - kmu);
        if (reduced < -tol) entering.emplace_back(reduced, a);
      }
      if (!entering.empty()) {
        const std::size_t take = std::min(kColumnsPerRound, entering.size());
        std::partial_sort(entering.begin(), entering.begin() + static_cast<std::ptrdiff_t>(take),
                          entering.end());
        for (std::size_t c = 0; c < take; ++c) cols.push_back(entering[c].second);
        std::sort(cols.begin(), cols.end());
        added = true;
      }
    }
    if (!added) break;
  }

  if (working) {
    working->rows.assign(s.size(), {});
    for (std::size_t t = 0; t < nq; ++t) {
      if (lazy_rows) working->rows[negatives[t]] = rows[t];
    }
    working->columns = lazy_cols ? cols : std::vector<std::size_t>{};
  }
  if (cfg.norm_mode == NormMode::kL2Quadratic) {
    rescale_to_quadratic_budget(problem, out.alpha, cfg.lambda, &out.objective);
  }
  return out;
}

std::vector<double> best_coordinate_start(const WeakLearnProblem& problem,
                                          const Distribution& d,
                                          double lambda) {
  const Sample& s = problem.sample();
  const std::size_t n = problem.num_coefficients();
  std::vector<std::size_t> active;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (d.weights[i] != 0.0) active.push_back(i);
  }
  const std::size_t m = s.size();
  const auto& hi = problem.window_max();
  const auto& lo = problem.window_min();
  double best_edge = -kInf;
  std::size_t best_a = 0;
  double best_sign = 1.0;
  for (std::size_t a = 0; a < n; ++a) {
    double plus = 0.0, minus = 0.0;
    for (std::size_t i : active) {
      const double w = s.labels[i] * d.weights[i];
      plus += w * hi[a * m + i];
      minus -= w * lo[a * m + i];
    }
    if (plus > best_edge) {
      best_edge = plus;
      best_a = a;
      best_sign = 1.0;
    }
    if (minus > best_edge) {
      best_edge = minus;
      best_a = a;
      best_sign = -1.0;
    }
  }
  std::vector<double> alpha(n, 0.0);
  if (n > 0) alpha[best_a] = best_sign * lambda;
  return alpha;
}

std::vector<double> initial_alpha(const WeakLearnProblem& problem,
                                  const Distribution& d,
                                  const WeakLearnConfig& cfg) {
  if (cfg.init_mode == InitMode::kCoordinate) {
    return best_coordinate_start(problem, d, cfg.lambda);
  }
  // Uniform on the l1 sphere of radius lambda: normalized exponentials with
  // independent random signs.
  std::mt19937_64 rng(cfg.seed);
  const std::size_t n = problem.num_coefficients();
  std::vector<double> alpha(n);
  double total = 0.0;
  for (std::size_t a = 0; a < n; ++a) {
    const std::uint64_t bits = rng();
    const double u = (static_cast<double>(bits >> 11) + 1.0) * 0x1.0p-53;
    const double e = -std::log(u);
    alpha[a] = (rng() & 1u) ? e : -e;
    total += e;
  }
  if (total > 0.0) {
    for (double& a : alpha) a *= cfg.lambda / total;
  }
  return alpha;
}

WeakLearnResult weak_learn(const WeakLearnProblem& problem,
                           const Distribution& d, const WeakLearnConfig& cfg) {
  validate(cfg);
  if (!has_both_labels(problem.sample())) {
    fail(ErrorCode::kInvalidInput, "weak learner needs both labels in the sample");
  }
  if (distribution_violation(d) > 1e-6) {
    fail(ErrorCode::kInvalidInput, "distribution violates its box/simplex constraints");
  }

  // The DC iterations always run on the l1 budget; the quadratic mode
  // rescales the final coefficients onto its boundary.
  WeakLearnConfig l1 = cfg;
  l1.norm_mode = NormMode::kL1;

  WeakLearnResult result;
  std::vector<double> alpha = initial_alpha(problem, d, cfg);
  double previous = kInf;
  DcWorkingSet working;
  for (int t = 1; t <= cfg.max_dc_iter; ++t) {
    const AssignmentMap assignment = argmax_assignment(problem, alpha);
    DcSubproblemResult sub =
        dc_subproblem(problem, d, assignment, l1, &alpha, &working);
    result.lp_solves += sub.lp_solves;
    if (sub.objective > previous + kDescentTolerance * (1.0 + std::abs(previous))) {
      std::ostringstream msg;
      msg << "DC objective increased from " << previous << " to "
          << sub.objective << " at iteration " << t;
      fail(ErrorCode::kInternal, msg.str());
    }
    alpha = std::move(sub.alpha);
    result.objective_trace.push_back(sub.objective);
    if (previous - sub.objective <= cfg.epsilon) {
      result.converged = true;
      break;
    }
    previous = sub.objective;
  }

  if (cfg.norm_mode == NormMode::kL2Quadratic) {
    rescale_to_quadratic_budget(problem, alpha, cfg.lambda, nullptr);
  }
  const double drop = 1e-12 * std::max(1.0, cfg.lambda);
  for (double& a : alpha) {
    if (std::abs(a) <= drop) a = 0.0;
  }
  result.hypothesis = problem.to_hypothesis(alpha);
  result.alpha = std::move(alpha);
  result.edge = problem.edge(result.alpha, d);
  return result;
}

}  // namespace shapeboost
