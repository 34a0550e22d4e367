#pragma once

// Numerical checks of the complexity analysis on small banks: counting the
// argmax assignment maps theta_u, Monte-Carlo Gaussian complexity, and the
// closed-form bound in terms of |Theta|.

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <random>
#include <vector>

#include "shapeboost/model.hpp"

namespace shapeboost {

enum class ThetaMethod { kExact2d, kSampledLowerBound };

struct ThetaCount {
  std::size_t count = 1;
  ThetaMethod method = ThetaMethod::kExact2d;
};

// Exact number of distinct maps i -> argmax_j <u, z_ij> over u in R^2 \ {0}
// for a linear kernel. Identical windows of one instance are collapsed onto
// the lowest offset. Sectors between consecutive critical directions are
// evaluated at their bisector; critical directions themselves are skipped.
// Throws kUnsupported unless the pattern length is 2.
ThetaCount count_theta_2d(const PatternBank& bank);

// Distinct maps seen over `n_directions` seeded samples: u uniform on the
// unit sphere (linear kernel), or s uniform in the bounding box of all
// patterns with the map taken as the nearest window (Gaussian kernel).
ThetaCount count_theta_sampled(const PatternBank& bank, const KernelSpec& kernel,
                               std::size_t n_directions, std::uint64_t seed);

struct ComplexityParams {
  double r = 1.0;       // max pattern feature norm
  double lambda = 1.0;  // norm budget of u
  std::size_t m = 1;
  std::size_t q = 1;
  std::size_t ell = 2;
};

// R Lambda sqrt((sqrt(2) - 1) + 2 ln|Theta|) / sqrt(m)
double gaussian_complexity_bound(const ComplexityParams& p, double theta_count);

// Max feature norm over the bank's patterns (linear kernel).
double max_pattern_norm(const PatternBank& bank);

// `count` equally spaced directions on the circle of radius `lambda`,
// starting at angle 0, plus the origin as the last entry.
std::vector<std::vector<double>> circle_grid(std::size_t count, double lambda);

// values[u][i] = max_j <u, z_ij> for every grid point u and instance i.
std::vector<std::vector<double>> linear_hypothesis_values(
    const PatternBank& bank, const std::vector<std::vector<double>>& grid);

struct ComplexityEstimate {
  double mean = 0.0;
  double std_error = 0.0;
  std::size_t trials = 0;
};

// (1/m) E_sigma max_u sum_i sigma_i values[u][i] with sigma_i standard normal,
// estimated over `trials` seeded draws.
ComplexityEstimate gaussian_complexity_mc(
    const std::vector<std::vector<double>>& values, std::size_t trials,
    std::uint64_t seed);

// Standard normal draws from a 64-bit Mersenne Twister via the polar method,
// so sequences depend only on the seed.
class NormalSource {
 public:
  explicit NormalSource(std::uint64_t seed) : rng_(seed) {}
  double operator()();
  double uniform();  // in [0, 1)

 private:
  std::mt19937_64 rng_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

struct TheoryConfig {
  std::size_t banks = 50;
  std::size_t max_instances = 4;
  std::size_t min_windows = 2;
  std::size_t max_windows = 5;
  std::size_t trials = 10000;
  std::size_t grid_directions = 3600;
  std::size_t sampled_directions = 20000;
  double lambda = 1.0;
  std::uint64_t seed = 7;
};

struct TheoryRow {
  std::size_t m = 0;
  std::size_t q = 0;
  std::size_t ell = 2;
  std::size_t theta_exact = 0;
  std::size_t theta_sampled = 0;
  double gc_estimate = 0.0;
  double gc_std_error = 0.0;
  double bound = 0.0;
  bool bound_satisfied = false;  // estimate <= bound + 3 standard errors
};

// One row per random 2-D bank: m in [1, max_instances] instances of length
// Q + 1 with Q in [min_windows, max_windows], standard normal values.
std::vector<TheoryRow> run_theory(const TheoryConfig& cfg);

// Header: m,Q,ell,theta_exact,theta_sampled,gc_estimate,lemma3_bound,bound_satisfied
void write_theory_csv(std::ostream& out, const std::vector<TheoryRow>& rows);

}  // namespace shapeboost
