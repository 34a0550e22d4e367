#pragma once

// Small weak-learning problems with independent oracles: the true DC
// objective, its global minimum over the l1 ball (by enumerating every
// assignment of positive windows, each a convex LP), and a certificate that
// no assignment tied at a point improves on it.

#include <algorithm>
#include <cmath>
#include <functional>
#include <random>
#include <vector>

#include "shapeboost/kernels.hpp"
#include "shapeboost/lp_solver.hpp"
#include "shapeboost/model.hpp"
#include "test_util.hpp"

namespace testutil {

struct ToyProblem {
  std::vector<shapeboost::LabeledInstance> instances;
  shapeboost::PatternBank bank;
  shapeboost::GramTensor gram;
  shapeboost::Sample sample;
  shapeboost::Distribution d;
  double lambda = 1.0;

  std::size_t m() const { return sample.size(); }
  std::size_t q() const { return bank.patterns_per_instance(); }
  std::size_t n() const { return m() * q(); }
  // K(coefficient a, window j of instance i), recomputed from the series.
  double k(std::size_t a, std::size_t i, std::size_t j) const {
    return shapeboost::kernel_eval(gram.spec(), bank.pattern(a),
                                   bank.pattern(i * q() + j));
  }
  double score(const std::vector<double>& alpha, std::size_t i, std::size_t j) const {
    double s = 0.0;
    for (std::size_t a = 0; a < n(); ++a) {
      if (alpha[a] != 0.0) s += alpha[a] * k(a, i, j);
    }
    return s;
  }
  // Negated edge: -sum_i y_i d_i max_j score.
  double objective(const std::vector<double>& alpha) const {
    double f = 0.0;
    for (std::size_t i = 0; i < m(); ++i) {
      double best = -INFINITY;
      for (std::size_t j = 0; j < q(); ++j) best = std::max(best, score(alpha, i, j));
      f -= sample.labels[i] * d.weights[i] * best;
    }
    return f;
  }
};

inline ToyProblem make_toy_sized(std::mt19937_64& rng, std::size_t m,
                                 std::size_t q) {
  auto inst = random_instances(m, q + 1, rng);
  // Labels alternate, so both are present; shuffle for variety.
  std::shuffle(inst.begin(), inst.end(), rng);
  auto bank = shapeboost::extract_patterns(inst, 2);
  const double sigmas[] = {0.1, 0.5, 1.0, 2.0};
  auto gram = shapeboost::gram(shapeboost::KernelSpec::gaussian(sigmas[rng() % 4]), bank);
  ToyProblem p{inst, std::move(bank), std::move(gram), full_sample(inst), {}, 1.0};
  // nu = 1/m makes the box inactive, so d is any point of the simplex.
  std::exponential_distribution<double> expo(1.0);
  p.d.nu = 1.0 / static_cast<double>(m);
  double total = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    p.d.weights.push_back(expo(rng));
    total += p.d.weights.back();
  }
  for (double& w : p.d.weights) w /= total;
  return p;
}

// m in [2, max_m], Q in [1, max_q], pattern length 2.
inline ToyProblem make_toy(std::mt19937_64& rng, std::size_t max_m = 6,
                           std::size_t max_q = 4) {
  std::uniform_int_distribution<std::size_t> mdist(2, max_m), qdist(1, max_q);
  const std::size_t m = mdist(rng);
  return make_toy_sized(rng, m, qdist(rng));
}

// min over the l1 ball of the objective with positives held at `assign`
// (offset per sample position, ignored for negatives). Built here from the
// kernel values, independently of the weak learner.
inline double fixed_assignment_min(const ToyProblem& p,
                                   const std::vector<std::size_t>& assign) {
  const auto n = static_cast<Eigen::Index>(p.n());
  std::vector<std::size_t> neg;
  for (std::size_t i = 0; i < p.m(); ++i) {
    if (p.sample.labels[i] < 0) neg.push_back(i);
  }
  const auto nq = static_cast<Eigen::Index>(neg.size());
  auto lp = shapeboost::LinearProgram::with_variables(2 * n + nq);
  for (Eigen::Index a = 0; a < n; ++a) {
    double c = 0.0;
    for (std::size_t i = 0; i < p.m(); ++i) {
      if (p.sample.labels[i] > 0) {
        c += p.d.weights[i] * p.k(static_cast<std::size_t>(a), i, assign[i]);
      }
    }
    lp.objective[a] = -c;
    lp.objective[n + a] = c;
  }
  for (Eigen::Index t = 0; t < nq; ++t) {
    lp.objective[2 * n + t] = p.d.weights[neg[static_cast<std::size_t>(t)]];
    lp.lower[2 * n + t] = -INFINITY;
  }
  const auto rows = static_cast<Eigen::Index>(1 + neg.size() * p.q());
  lp.a_ub = Eigen::MatrixXd::Zero(rows, 2 * n + nq);
  lp.b_ub = Eigen::VectorXd::Zero(rows);
  lp.a_ub.row(0).head(2 * n).setOnes();
  lp.b_ub[0] = p.lambda;
  Eigen::Index r = 1;
  for (Eigen::Index t = 0; t < nq; ++t) {
    for (std::size_t j = 0; j < p.q(); ++j, ++r) {
      for (Eigen::Index a = 0; a < n; ++a) {
        const double kv = p.k(static_cast<std::size_t>(a), neg[static_cast<std::size_t>(t)], j);
        lp.a_ub(r, a) = kv;
        lp.a_ub(r, n + a) = -kv;
      }
      lp.a_ub(r, 2 * n + t) = -1.0;
    }
  }
  const auto sol = shapeboost::solve_lp(lp);
  if (!sol.optimal()) return NAN;
  return sol.objective;
}

// Calls fn on every assignment in the product of per-position option lists.
inline void for_each_assignment(
    const std::vector<std::vector<std::size_t>>& options,
    const std::function<void(const std::vector<std::size_t>&)>& fn) {
  std::vector<std::size_t> pick(options.size(), 0), assign(options.size(), 0);
  while (true) {
    for (std::size_t i = 0; i < options.size(); ++i) assign[i] = options[i][pick[i]];
    fn(assign);
    std::size_t i = 0;
    while (i < options.size() && ++pick[i] == options[i].size()) pick[i++] = 0;
    if (i == options.size()) return;
  }
}

inline double global_min(const ToyProblem& p) {
  std::vector<std::vector<std::size_t>> options(p.m());
  for (std::size_t i = 0; i < p.m(); ++i) {
    if (p.sample.labels[i] > 0) {
      for (std::size_t j = 0; j < p.q(); ++j) options[i].push_back(j);
    } else {
      options[i] = {0};
    }
  }
  double best = INFINITY;
  for_each_assignment(options, [&](const std::vector<std::size_t>& a) {
    best = std::min(best, fixed_assignment_min(p, a));
  });
  return best;
}

// True when no assignment among the argmax ties at alpha has a fixed-
// assignment minimum below objective(alpha) - tol, which makes alpha a
// local minimum of the objective.
inline bool locally_optimal(const ToyProblem& p, const std::vector<double>& alpha,
                            double tol = 1e-7) {
  const double f = p.objective(alpha);
  std::vector<std::vector<std::size_t>> options(p.m());
  for (std::size_t i = 0; i < p.m(); ++i) {
    if (p.sample.labels[i] < 0) {
      options[i] = {0};
      continue;
    }
    double best = -INFINITY;
    for (std::size_t j = 0; j < p.q(); ++j) best = std::max(best, p.score(alpha, i, j));
    for (std::size_t j = 0; j < p.q(); ++j) {
      if (p.score(alpha, i, j) >= best - 1e-9 * (1.0 + std::abs(best))) {
        options[i].push_back(j);
      }
    }
  }
  bool ok = true;
  for_each_assignment(options, [&](const std::vector<std::size_t>& a) {
    if (fixed_assignment_min(p, a) < f - tol) ok = false;
  });
  return ok;
}

// Best objective among the 2n signed vertices +/- lambda e_a.
inline double best_vertex_objective(const ToyProblem& p) {
  double best = INFINITY;
  std::vector<double> alpha(p.n(), 0.0);
  for (std::size_t a = 0; a < p.n(); ++a) {
    for (double s : {1.0, -1.0}) {
      alpha[a] = s * p.lambda;
      best = std::min(best, p.objective(alpha));
    }
    alpha[a] = 0.0;
  }
  return best;
}

}  // namespace testutil
