#pragma once

// LPBoost column generation over DC-learned base hypotheses.

#include <cstddef>
#include <iosfwd>
#include <vector>

#include "shapeboost/kernels.hpp"
#include "shapeboost/model.hpp"
#include "shapeboost/weak_learner.hpp"

namespace shapeboost {

struct BoostConfig {
  double nu = 0.1;
  int max_rounds = 100;
  double stop_eps = 1e-4;
  WeakLearnConfig weak;
};

// Requires nu in (0, 1], max_rounds >= 1, stop_eps > 0.
void validate(const BoostConfig& cfg);

// sum_i y_i d_i h(x_i) with h evaluated on the bank's windows of each sample
// instance.
double edge(const BaseHypothesis& h, const PatternBank& bank,
            const Sample& sample, const Distribution& d);

struct RestrictedDual {
  Distribution d;
  double gamma = 0.0;
  std::vector<double> w;  // one multiplier per hypothesis row
  double rho = 0.0;       // multiplier of sum d = 1
};

// margins[j][i] = y_i h_j(x_i). Solves
//   min gamma  s.t.  sum_i margins[j][i] d_i <= gamma for all j,
//                    0 <= d_i <= 1/(nu m),  sum_i d_i = 1.
// A non-optimal LP status is a solver defect: the LP is dumped to a
// temporary file and kInternal is thrown.
RestrictedDual restricted_dual(const std::vector<std::vector<double>>& margins,
                               double nu);

// Soft-margin primal value rho - (1/(nu m)) sum_i max(0, rho - sum_j w_j
// margins[j][i]); equals gamma at a restricted-dual optimum.
double soft_margin_objective(const std::vector<std::vector<double>>& margins,
                             const std::vector<double>& w, double rho,
                             double nu);

struct BoostRound {
  int round = 0;
  double gamma = 0.0;  // after adding this round's hypothesis
  double edge = 0.0;   // of this round's hypothesis under d_{t-1}
  double rho = 0.0;
  double dual_violation = 0.0;  // distribution_violation of d_t
  std::size_t nonzero_d = 0;
  double wall_ms = 0.0;
  int dc_iterations = 0;
  int lp_solves = 0;  // weak-learner LPs solved this round
  bool stopped = false;  // the early-stop test fired; no LP solved
};

struct BoostTrace {
  std::vector<BoostRound> rounds;
  bool early_stop = false;
  double primal_objective = 0.0;
  double final_gamma = 0.0;
  double final_rho = 0.0;
  std::vector<double> final_d;
  std::vector<double> raw_weights;  // before pruning, one per hypothesis

  double duality_gap() const;
};

struct TrainResult {
  Ensemble ensemble;
  BoostTrace trace;
};

// Terms with weight at or below this are dropped from the final ensemble.
inline constexpr double kWeightPruneTol = 1e-9;

TrainResult train(const Sample& sample, const PatternBank& bank,
                  const GramTensor& gram, const BoostConfig& cfg);

// CSV with header  round,gamma,edge,nonzero_d_count,wall_ms
void write_trace_csv(std::ostream& out, const BoostTrace& trace);

}  // namespace shapeboost
