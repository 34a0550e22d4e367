#pragma once

// DC weak learner: finds coefficients alpha over the sample's patterns that
// (locally) maximize the edge  sum_i y_i d_i max_j sum_a alpha_a K(a, x_i^(j))
// under a norm budget, by alternating between fixing the argmax windows of
// the positive instances and solving the resulting convex subproblem.

#include <cstddef>
#include <cstdint>
#include <vector>

#include "shapeboost/kernels.hpp"
#include "shapeboost/model.hpp"

namespace shapeboost {

enum class NormMode { kL1, kL2Quadratic };
enum class InitMode { kCoordinate, kSeededRandom };

struct WeakLearnConfig {
  double lambda = 1.0;
  double epsilon = 1e-6;
  int max_dc_iter = 10;
  NormMode norm_mode = NormMode::kL1;
  InitMode init_mode = InitMode::kCoordinate;
  std::uint64_t seed = 0;
};

void validate(const WeakLearnConfig& cfg);

// Binds a sample to the bank-wide Gram. Coefficient vectors are dense over
// the sample's patterns, index a = s * Q + k for sample position s.
class WeakLearnProblem {
 public:
  WeakLearnProblem(const PatternBank& bank, const GramTensor& gram,
                   const Sample& sample);

  const PatternBank& bank() const { return *bank_; }
  const GramTensor& gram() const { return *gram_; }
  const Sample& sample() const { return *sample_; }
  std::size_t patterns_per_instance() const { return q_; }
  std::size_t num_coefficients() const { return sample_->size() * q_; }

  std::size_t bank_flat(std::size_t sample_pos, std::size_t offset) const {
    return sample_->instances[sample_pos] * q_ + offset;
  }
  // Gram row of window `offset` of sample instance `sample_pos`; index it
  // with bank_flat of a coefficient.
  std::span<const double> window_row(std::size_t sample_pos,
                                     std::size_t offset) const {
    return gram_->row(bank_flat(sample_pos, offset));
  }

  // sum_a alpha_a K(a, x_p^(j)) for every window j of sample instance p.
  std::vector<double> window_scores(const std::vector<double>& alpha,
                                    std::size_t sample_pos) const;
  // max_j of window_scores.
  double eval(const std::vector<double>& alpha, std::size_t sample_pos) const;
  // sum_i y_i d_i eval(alpha, i)
  double edge(const std::vector<double>& alpha, const Distribution& d) const;

  BaseHypothesis to_hypothesis(const std::vector<double>& alpha,
                               double drop_tol = 0.0) const;

  // max_j and min_j of K(a, x_i^(j)) at index a * m + i. They do not depend
  // on the distribution, so they are computed once on first use (not
  // thread-safe).
  const std::vector<double>& window_max() const;
  const std::vector<double>& window_min() const;

 private:
  void compute_extremes() const;

  const PatternBank* bank_;
  const GramTensor* gram_;
  const Sample* sample_;
  std::size_t q_;
  mutable std::vector<double> window_max_;
  mutable std::vector<double> window_min_;
};

// j*_p for every positive sample position p (ascending).
struct AssignmentMap {
  std::vector<std::size_t> positions;
  std::vector<std::size_t> offsets;
};

// Ties go to the smallest offset.
AssignmentMap argmax_assignment(const WeakLearnProblem& problem,
                                const std::vector<double>& alpha);

struct DcSubproblemResult {
  std::vector<double> alpha;
  double objective = 0.0;
  int lp_solves = 0;
  std::size_t rows = 0;     // negative-window rows in the final LP
  std::size_t columns = 0;  // coefficients present in the final LP
};

// Window rows are generated lazily (most violated first) once their full
// count exceeds kFullRowLimit, and coefficient columns by reduced-cost
// pricing once there are more than kFullColumnLimit. Below the limits the
// LP is solved whole.
inline constexpr std::size_t kFullRowLimit = 400;
inline constexpr std::size_t kFullColumnLimit = 400;

// Rows and columns generated so far; passing the same set to successive
// subproblems of one DC run lets each start from the previous working LP.
struct DcWorkingSet {
  std::vector<std::vector<std::size_t>> rows;  // per sample position, ascending
  std::vector<std::size_t> columns;            // ascending coefficient indices
};

// min  -sum_{p positive} d_p sum_a alpha_a K(a, x_p^(j*_p)) + sum_{q negative} d_q lambda_q
// s.t. sum_a alpha_a K(a, x_q^(j)) <= lambda_q  for all windows j
//      norm(alpha) within budget (see NormMode)
// `warm_alpha` seeds the initial rows and columns when they are generated
// lazily; `working`, when given, adds its rows and columns to that seed and
// receives the final ones.
DcSubproblemResult dc_subproblem(const WeakLearnProblem& problem,
                                 const Distribution& d,
                                 const AssignmentMap& assignment,
                                 const WeakLearnConfig& cfg,
                                 const std::vector<double>* warm_alpha = nullptr,
                                 DcWorkingSet* working = nullptr);

struct WeakLearnResult {
  BaseHypothesis hypothesis;
  std::vector<double> alpha;
  std::vector<double> objective_trace;  // f_1, f_2, ...
  bool converged = false;
  double edge = 0.0;
  int lp_solves = 0;
};

// Best signed coordinate vertex +/- lambda e_a under d, as dense alpha.
std::vector<double> best_coordinate_start(const WeakLearnProblem& problem,
                                          const Distribution& d, double lambda);

std::vector<double> initial_alpha(const WeakLearnProblem& problem,
                                  const Distribution& d,
                                  const WeakLearnConfig& cfg);

WeakLearnResult weak_learn(const WeakLearnProblem& problem,
                           const Distribution& d, const WeakLearnConfig& cfg);

}  // namespace shapeboost
