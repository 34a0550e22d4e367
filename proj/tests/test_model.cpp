#include <algorithm>
#include <cmath>
#include <random>

#include "doctest.h"
#include "shapeboost/error.hpp"
#include "shapeboost/model.hpp"
#include "test_util.hpp"

using namespace shapeboost;
using testutil::instance;

namespace {

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an error");
  return ErrorCode::kInternal;
}

BaseHypothesis hypothesis_on(const PatternBank& bank, std::vector<AlphaEntry> alpha,
                             KernelSpec kernel = KernelSpec::gaussian(1.0)) {
  BaseHypothesis h;
  h.alpha = std::move(alpha);
  h.bank_id = bank.id();
  h.kernel = kernel;
  canonicalize(h);
  return h;
}

// Direct transcription of max_j sum_(i,k) alpha_ik K(pattern(i,k), x^(j)).
double reference_eval(const BaseHypothesis& h, const PatternBank& bank,
                      const std::vector<double>& x) {
  const std::size_t ell = bank.pattern_length();
  double best = -INFINITY;
  for (std::size_t j = 0; j + ell <= x.size(); ++j) {
    double s = 0.0;
    for (const auto& e : h.alpha) {
      const auto p = bank.pattern(e.key);
      double d2 = 0.0, dot = 0.0;
      for (std::size_t u = 0; u < ell; ++u) {
        d2 += (p[u] - x[j + u]) * (p[u] - x[j + u]);
        dot += p[u] * x[j + u];
      }
      s += e.value * (h.kernel.kind == KernelKind::kLinear
                          ? dot
                          : std::exp(-h.kernel.sigma * d2));
    }
    best = std::max(best, s);
  }
  return best;
}

}  // namespace

TEST_CASE("windowing of a short series") {
  const auto bank = extract_patterns({instance({1, 2, 3, 4})}, 2);
  CHECK(bank.patterns_per_instance() == 3);
  CHECK(bank.size() == 3);
  const std::vector<std::vector<double>> expected{{1, 2}, {2, 3}, {3, 4}};
  for (std::uint32_t k = 0; k < 3; ++k) {
    const auto p = bank.pattern(PatternKey{0, k});
    CHECK(std::vector<double>(p.begin(), p.end()) == expected[k]);
  }
}

TEST_CASE("pattern length equal to the series length gives one window") {
  const auto bank = extract_patterns({instance({3, 1, 4, 1, 5})}, 5);
  CHECK(bank.patterns_per_instance() == 1);
  const auto p = bank.pattern(PatternKey{0, 0});
  CHECK(std::vector<double>(p.begin(), p.end()) == std::vector<double>{3, 1, 4, 1, 5});
}

TEST_CASE("a length-150 series at fraction 0.1 gives 136 windows") {
  std::mt19937_64 rng(1);
  const auto inst = testutil::random_instances(2, 150, rng);
  CHECK(extract_patterns(inst, 15).patterns_per_instance() == 136);
}

TEST_CASE("extraction errors") {
  CHECK(code_of([] { extract_patterns({instance({1, 2, 3})}, 4); }) ==
        ErrorCode::kInvalidParameter);
  CHECK(code_of([] { extract_patterns({instance({1, 2, 3}), instance({1, 2})}, 2); }) ==
        ErrorCode::kInvalidInput);
  CHECK(code_of([] { extract_patterns({instance({1, NAN, 3})}, 2); }) ==
        ErrorCode::kInvalidInput);
  CHECK(code_of([] { extract_patterns({instance({1})}, 1); }) ==
        ErrorCode::kInvalidInput);
}

TEST_CASE("pattern count identity and window contents on random banks") {
  std::mt19937_64 rng(2);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t m = 1 + rng() % 5, L = 2 + rng() % 12, ell = 1 + rng() % L;
    const auto inst = testutil::random_instances(m, L, rng);
    const auto bank = extract_patterns(inst, ell);
    REQUIRE(bank.size() == m * (L - ell + 1));
    for (std::size_t f = 0; f < bank.size(); ++f) {
      const PatternKey key = bank.key_of(f);
      CHECK(bank.flat_index(key) == f);
      const auto p = bank.pattern(key);
      for (std::size_t u = 0; u < ell; ++u) {
        CHECK(p[u] == inst[key.instance].series.values[key.offset + u]);
      }
    }
  }
}

TEST_CASE("identical pattern scores exactly one under the Gaussian kernel") {
  const auto bank = extract_patterns({instance({0.5, -1, 2, 0.25})}, 2);
  const auto h = hypothesis_on(bank, {{{0, 0}, 1.0}});
  const TimeSeries x{{0.5, -1, 7, 9, 11}, "x"};
  CHECK(eval_base(h, bank, x) == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("zero coefficients evaluate to zero and predict +1") {
  const auto bank = extract_patterns({instance({1, 2, 3})}, 2);
  Ensemble g;
  g.terms.push_back({1.0, hypothesis_on(bank, {})});
  const TimeSeries x{{4, 5, 6, 7}, "x"};
  CHECK(eval_base(g.terms[0].hypothesis, bank, x) == 0.0);
  const auto s = eval_ensemble(g, bank, x);
  CHECK(s.score == 0.0);
  CHECK(s.prediction == +1);
  CHECK(sign_of(0.0) == +1);
  CHECK(sign_of(-1e-300) == -1);
}

TEST_CASE("evaluation matches a direct transcription") {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> normal(0.0, 1.0);
  for (int trial = 0; trial < 30; ++trial) {
    const std::size_t m = 1 + rng() % 4, L = 3 + rng() % 8, ell = 1 + rng() % 3;
    const auto inst = testutil::random_instances(m, L, rng);
    const auto bank = extract_patterns(inst, ell);
    std::vector<AlphaEntry> alpha;
    for (int e = 0; e < 4; ++e) {
      alpha.push_back({bank.key_of(rng() % bank.size()), normal(rng)});
    }
    const KernelSpec kernel =
        trial % 2 ? KernelSpec::linear() : KernelSpec::gaussian(0.3);
    const auto h = hypothesis_on(bank, alpha, kernel);
    std::vector<double> x(ell + rng() % 6);
    for (double& v : x) v = normal(rng);
    CHECK(eval_base(h, bank, {x, "x"}) ==
          doctest::Approx(reference_eval(h, bank, x)).epsilon(1e-12));
  }
}

TEST_CASE("positive homogeneity, permutation invariance and monotonicity") {
  std::mt19937_64 rng(4);
  std::normal_distribution<double> normal(0.0, 1.0);
  for (int trial = 0; trial < 25; ++trial) {
    const auto inst = testutil::random_instances(3, 8, rng);
    const auto bank = extract_patterns(inst, 3);
    std::vector<AlphaEntry> alpha;
    for (int e = 0; e < 5; ++e) alpha.push_back({bank.key_of(rng() % bank.size()), normal(rng)});
    const auto h = hypothesis_on(bank, alpha);
    std::vector<double> x(10);
    for (double& v : x) v = normal(rng);
    auto windows = windows_of({x, "x"}, 3);
    const double base = eval_base_on_windows(h, bank, windows);

    const double c = std::abs(normal(rng)) * 5;
    BaseHypothesis scaled = h;
    for (auto& e : scaled.alpha) e.value *= c;
    CHECK(eval_base_on_windows(scaled, bank, windows) ==
          doctest::Approx(c * base).epsilon(1e-10));

    std::shuffle(windows.begin(), windows.end(), rng);
    CHECK(eval_base_on_windows(h, bank, windows) == base);

    windows.push_back({normal(rng), normal(rng), normal(rng)});
    CHECK(eval_base_on_windows(h, bank, windows) >= base);
  }
}

TEST_CASE("ensemble scores are weighted sums of base scores") {
  std::mt19937_64 rng(5);
  const auto inst = testutil::random_instances(2, 6, rng);
  const auto bank = extract_patterns(inst, 2);
  const auto h = hypothesis_on(bank, {{{0, 1}, 0.7}, {{1, 2}, -0.3}});
  const TimeSeries x{{0.1, 0.4, -0.2, 1.5, 0.3}, "x"};
  Ensemble single;
  single.terms.push_back({1.0, h});
  Ensemble twice;
  twice.terms.push_back({0.5, h});
  twice.terms.push_back({0.5, h});
  CHECK(eval_ensemble(single, bank, x).score == doctest::Approx(eval_base(h, bank, x)));
  CHECK(eval_ensemble(twice, bank, x).score ==
        doctest::Approx(eval_ensemble(single, bank, x).score).epsilon(1e-15));
  CHECK(code_of([&] { eval_ensemble(Ensemble{}, bank, x); }) == ErrorCode::kInvalidModel);
}

TEST_CASE("hypotheses are bound to their bank") {
  const auto a = extract_patterns({instance({1, 2, 3})}, 2);
  const auto b = extract_patterns({instance({1, 2, 4})}, 2);
  CHECK(a.id() != b.id());
  const auto h = hypothesis_on(a, {{{0, 0}, 1.0}});
  CHECK(code_of([&] { eval_base(h, b, {{1, 2, 3}, "x"}); }) == ErrorCode::kInvalidInput);
}

TEST_CASE("canonical hypotheses are sorted, merged and zero-free") {
  BaseHypothesis h;
  h.alpha = {{{1, 0}, 0.5}, {{0, 2}, 1.0}, {{1, 0}, -0.5}, {{0, 1}, 2.0}};
  canonicalize(h);
  REQUIRE(h.alpha.size() == 2);
  CHECK(h.alpha[0].key == PatternKey{0, 1});
  CHECK(h.alpha[1].key == PatternKey{0, 2});
  CHECK(h.l1_norm() == 3.0);
}

TEST_CASE("distribution violation measures box and simplex") {
  Distribution d = Distribution::uniform(4, 0.5);
  CHECK(distribution_violation(d) == doctest::Approx(0.0).epsilon(1e-15));
  d.weights = {0.5, 0.5, 0.0, 0.0};  // cap 1/(0.5*4) = 0.5
  CHECK(distribution_violation(d) == doctest::Approx(0.0));
  d.weights = {0.7, 0.3, 0.0, 0.0};
  CHECK(distribution_violation(d) == doctest::Approx(0.2));
  d.weights = {0.5, 0.5, 0.1, 0.0};
  CHECK(distribution_violation(d) == doctest::Approx(0.1));
}
