#include "shapeboost/theory.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <numbers>
#include <ostream>
#include <set>

#include "shapeboost/error.hpp"

namespace shapeboost {

namespace {

using ThetaMap = std::vector<std::uint32_t>;

// Window offsets of instance i with duplicates mapped to the lowest offset.
std::vector<std::vector<std::size_t>> distinct_offsets(const PatternBank& bank) {
  const std::size_t q = bank.patterns_per_instance();
  std::vector<std::vector<std::size_t>> out(bank.num_instances());
  for (std::size_t i = 0; i < bank.num_instances(); ++i) {
    for (std::size_t j = 0; j < q; ++j) {
      const auto zj = bank.pattern(i * q + j);
      bool duplicate = false;
      for (std::size_t k : out[i]) {
        const auto zk = bank.pattern(i * q + k);
        if (std::equal(zj.begin(), zj.end(), zk.begin())) {
          duplicate = true;
          break;
        }
      }
      if (!duplicate) out[i].push_back(j);
    }
  }
  return out;
}

ThetaMap linear_argmax(const PatternBank& bank,
                       const std::vector<std::vector<std::size_t>>& offsets,
                       std::span<const double> u) {
  const std::size_t q = bank.patterns_per_instance();
  ThetaMap theta(bank.num_instances());
  for (std::size_t i = 0; i < bank.num_instances(); ++i) {
    double best = -std::numeric_limits<double>::infinity();
    for (std::size_t j : offsets[i]) {
      const auto z = bank.pattern(i * q + j);
      double v = 0.0;
      for (std::size_t t = 0; t < z.size(); ++t) v += u[t] * z[t];
      if (v > best) {
        best = v;
        theta[i] = static_cast<std::uint32_t>(j);
      }
    }
  }
  return theta;
}

}  // namespace

double NormalSource::uniform() {
  return static_cast<double>(rng_() >> 11) * 0x1.0p-53;
}

double NormalSource::operator()() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  double u, v, s;
  do {
    u = 2.0 * uniform() - 1.0;
    v = 2.0 * uniform() - 1.0;
    s = u * u + v * v;
  } while (s >= 1.0 || s == 0.0);
  const double f = std::sqrt(-2.0 * std::log(s) / s);
  spare_ = v * f;
  has_spare_ = true;
  return u * f;
}

ThetaCount count_theta_2d(const PatternBank& bank) {
  if (bank.pattern_length() != 2) {
    fail(ErrorCode::kUnsupported, "exact theta counting needs pattern length 2");
  }
  const std::size_t q = bank.patterns_per_instance();
  const auto offsets = distinct_offsets(bank);

  // Directions u with <u, z - z'> = 0 for some pair within one instance.
  std::vector<double> critical;
  for (std::size_t i = 0; i < bank.num_instances(); ++i) {
    for (std::size_t a = 0; a < offsets[i].size(); ++a) {
      for (std::size_t b = a + 1; b < offsets[i].size(); ++b) {
        const auto za = bank.pattern(i * q + offsets[i][a]);
        const auto zb = bank.pattern(i * q + offsets[i][b]);
        const double angle = std::atan2(za[1] - zb[1], za[0] - zb[0]);
        for (double c : {angle + std::numbers::pi / 2, angle - std::numbers::pi / 2}) {
          double w = std::fmod(c, 2 * std::numbers::pi);
          if (w < 0) w += 2 * std::numbers::pi;
          critical.push_back(w);
        }
      }
    }
  }
  std::sort(critical.begin(), critical.end());
  critical.erase(std::unique(critical.begin(), critical.end()), critical.end());

  std::set<ThetaMap> seen;
  if (critical.empty()) {
    const double u[2] = {1.0, 0.0};
    seen.insert(linear_argmax(bank, offsets, u));
  }
  for (std::size_t s = 0; s < critical.size(); ++s) {
    const double lo = critical[s];
    const double hi = s + 1 < critical.size() ? critical[s + 1]
                                              : critical.front() + 2 * std::numbers::pi;
    const double mid = 0.5 * (lo + hi);
    const double u[2] = {std::cos(mid), std::sin(mid)};
    seen.insert(linear_argmax(bank, offsets, u));
  }
  return {seen.size(), ThetaMethod::kExact2d};
}

ThetaCount count_theta_sampled(const PatternBank& bank, const KernelSpec& kernel,
                               std::size_t n_directions, std::uint64_t seed) {
  if (n_directions < 1) {
    fail(ErrorCode::kInvalidParameter, "need at least one sampled direction");
  }
  validate(kernel);
  const std::size_t q = bank.patterns_per_instance();
  const std::size_t ell = bank.pattern_length();
  const auto offsets = distinct_offsets(bank);
  NormalSource normal(seed);
  std::set<ThetaMap> seen;
  std::vector<double> u(ell);

  if (kernel.kind == KernelKind::kLinear) {
    for (std::size_t n = 0; n < n_directions; ++n) {
      double norm = 0.0;
      do {
        norm = 0.0;
        for (double& c : u) {
          c = normal();
          norm += c * c;
        }
      } while (norm == 0.0);
      seen.insert(linear_argmax(bank, offsets, u));
    }
    return {seen.size(), ThetaMethod::kSampledLowerBound};
  }

  std::vector<double> lo(ell, std::numeric_limits<double>::infinity());
  std::vector<double> hi(ell, -std::numeric_limits<double>::infinity());
  for (std::size_t f = 0; f < bank.size(); ++f) {
    const auto z = bank.pattern(f);
    for (std::size_t t = 0; t < ell; ++t) {
      lo[t] = std::min(lo[t], z[t]);
      hi[t] = std::max(hi[t], z[t]);
    }
  }
  for (std::size_t n = 0; n < n_directions; ++n) {
    for (std::size_t t = 0; t < ell; ++t) u[t] = lo[t] + (hi[t] - lo[t]) * normal.uniform();
    ThetaMap theta(bank.num_instances());
    for (std::size_t i = 0; i < bank.num_instances(); ++i) {
      double best = std::numeric_limits<double>::infinity();
      for (std::size_t j : offsets[i]) {
        const auto z = bank.pattern(i * q + j);
        double d2 = 0.0;
        for (std::size_t t = 0; t < ell; ++t) d2 += (u[t] - z[t]) * (u[t] - z[t]);
        if (d2 < best) {
          best = d2;
          theta[i] = static_cast<std::uint32_t>(j);
        }
      }
    }
    seen.insert(std::move(theta));
  }
  return {seen.size(), ThetaMethod::kSampledLowerBound};
}

double gaussian_complexity_bound(const ComplexityParams& p, double theta_count) {
  if (!(theta_count >= 1.0)) {
    fail(ErrorCode::kInvalidParameter, "|Theta| must be at least 1");
  }
  if (p.m == 0) fail(ErrorCode::kInvalidParameter, "m must be positive");
  return p.r * p.lambda *
         std::sqrt((std::numbers::sqrt2 - 1.0) + 2.0 * std::log(theta_count)) /
         std::sqrt(static_cast<double>(p.m));
}

double max_pattern_norm(const PatternBank& bank) {
  double r = 0.0;
  for (std::size_t f = 0; f < bank.size(); ++f) {
    double s = 0.0;
    for (double v : bank.pattern(f)) s += v * v;
    r = std::max(r, std::sqrt(s));
  }
  return r;
}

std::vector<std::vector<double>> circle_grid(std::size_t count, double lambda) {
  std::vector<std::vector<double>> grid;
  grid.reserve(count + 1);
  for (std::size_t k = 0; k < count; ++k) {
    const double a = 2.0 * std::numbers::pi * static_cast<double>(k) /
                     static_cast<double>(count);
    grid.push_back({lambda * std::cos(a), lambda * std::sin(a)});
  }
  grid.push_back({0.0, 0.0});
  return grid;
}

std::vector<std::vector<double>> linear_hypothesis_values(
    const PatternBank& bank, const std::vector<std::vector<double>>& grid) {
  const std::size_t q = bank.patterns_per_instance();
  std::vector<std::vector<double>> values(grid.size(),
                                          std::vector<double>(bank.num_instances()));
  for (std::size_t g = 0; g < grid.size(); ++g) {
    if (grid[g].size() != bank.pattern_length()) {
      fail(ErrorCode::kInvalidInput, "grid point dimension differs from pattern length");
    }
    for (std::size_t i = 0; i < bank.num_instances(); ++i) {
      double best = -std::numeric_limits<double>::infinity();
      for (std::size_t j = 0; j < q; ++j) {
        const auto z = bank.pattern(i * q + j);
        double v = 0.0;
        for (std::size_t t = 0; t < z.size(); ++t) v += grid[g][t] * z[t];
        best = std::max(best, v);
      }
      values[g][i] = best;
    }
  }
  return values;
}

ComplexityEstimate gaussian_complexity_mc(
    const std::vector<std::vector<double>>& values, std::size_t trials,
    std::uint64_t seed) {
  if (trials < 1) fail(ErrorCode::kInvalidParameter, "need at least one trial");
  if (values.empty() || values.front().empty()) {
    fail(ErrorCode::kInvalidInput, "empty hypothesis grid");
  }
  const std::size_t m = values.front().size();
  NormalSource normal(seed);
  std::vector<double> sigma(m);
  double sum = 0.0, sum_sq = 0.0;
  for (std::size_t t = 0; t < trials; ++t) {
    for (double& s : sigma) s = normal();
    double best = -std::numeric_limits<double>::infinity();
    for (const auto& row : values) {
      double v = 0.0;
      for (std::size_t i = 0; i < m; ++i) v += sigma[i] * row[i];
      best = std::max(best, v);
    }
    best /= static_cast<double>(m);
    sum += best;
    sum_sq += best * best;
  }
  ComplexityEstimate est;
  est.trials = trials;
  const double n = static_cast<double>(trials);
  est.mean = sum / n;
  if (trials > 1) {
    const double var = std::max(0.0, (sum_sq - n * est.mean * est.mean) / (n - 1.0));
    est.std_error = std::sqrt(var / n);
  }
  return est;
}

std::vector<TheoryRow> run_theory(const TheoryConfig& cfg) {
  if (cfg.max_instances < 1 || cfg.min_windows < 1 ||
      cfg.max_windows < cfg.min_windows) {
    fail(ErrorCode::kInvalidParameter, "invalid random bank size ranges");
  }
  const auto grid = circle_grid(cfg.grid_directions, cfg.lambda);
  std::mt19937_64 rng(cfg.seed);
  NormalSource normal(cfg.seed ^ 0x9e3779b97f4a7c15ULL);
  std::vector<TheoryRow> rows;
  for (std::size_t b = 0; b < cfg.banks; ++b) {
    const std::size_t m = 1 + static_cast<std::size_t>(rng() % cfg.max_instances);
    const std::size_t q =
        cfg.min_windows +
        static_cast<std::size_t>(rng() % (cfg.max_windows - cfg.min_windows + 1));
    std::vector<LabeledInstance> instances(m);
    for (auto& inst : instances) {
      inst.series.values.resize(q + 1);
      for (double& v : inst.series.values) v = normal();
    }
    const PatternBank bank = extract_patterns(instances, 2);

    TheoryRow row;
    row.m = m;
    row.q = q;
    row.theta_exact = count_theta_2d(bank).count;
    row.theta_sampled =
        count_theta_sampled(bank, KernelSpec::linear(), cfg.sampled_directions,
                            cfg.seed + b)
            .count;
    const auto est = gaussian_complexity_mc(linear_hypothesis_values(bank, grid),
                                            cfg.trials, cfg.seed + 1000 + b);
    row.gc_estimate = est.mean;
    row.gc_std_error = est.std_error;
    row.bound = gaussian_complexity_bound(
        {max_pattern_norm(bank), cfg.lambda, m, q, 2},
        static_cast<double>(row.theta_exact));
    row.bound_satisfied = row.gc_estimate <= row.bound + 3.0 * row.gc_std_error;
    rows.push_back(row);
  }
  return rows;
}

void write_theory_csv(std::ostream& out, const std::vector<TheoryRow>& rows) {
  out << "m,Q,ell,theta_exact,theta_sampled,gc_estimate,lemma3_bound,bound_satisfied\n";
  out << std::setprecision(10);
  for (const auto& r : rows) {
    out << r.m << ',' << r.q << ',' << r.ell << ',' << r.theta_exact << ','
        << r.theta_sampled << ',' << r.gc_estimate << ',' << r.bound << ','
        << (r.bound_satisfied ? "true" : "false") << '\n';
  }
}

}  // namespace shapeboost
