#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>

#include "doctest.h"
#include "shapeboost/error.hpp"
#include "shapeboost/kernels.hpp"
#include "test_util.hpp"

using namespace shapeboost;
using testutil::instance;

namespace {

// Element-wise variance of the full Gaussian Gram, computed naively.
double gram_variance(const PatternBank& bank, double sigma) {
  const auto g = gram(KernelSpec::gaussian(sigma), bank);
  double sum = 0.0, sum_sq = 0.0;
  for (double v : g.values()) {
    sum += v;
    sum_sq += v * v;
  }
  const double n = static_cast<double>(g.values().size());
  return sum_sq / n - (sum / n) * (sum / n);
}

}  // namespace

TEST_CASE("kernel values on hand examples") {
  const std::vector<double> z{0.3, -1.2, 4.0};
  for (double sigma : {1e-4, 1.0, 1e4}) {
    CHECK(kernel_eval(KernelSpec::gaussian(sigma), z, z) == 1.0);
  }
  const std::vector<double> a{1, 2}, b{3, 4};
  CHECK(kernel_eval(KernelSpec::linear(), a, b) == 11.0);
  const std::vector<double> o{0, 0}, e{1, 0};
  CHECK(kernel_eval(KernelSpec::gaussian(1.0), o, e) ==
        doctest::Approx(0.36787944117144233).epsilon(1e-15));
}

TEST_CASE("kernel argument mismatch and tiny values") {
  const std::vector<double> a{1, 2}, b{1, 2, 3};
  CHECK_THROWS_AS(kernel_eval(KernelSpec::linear(), a, b), Error);
  const std::vector<double> o{0}, far{100};
  CHECK(kernel_eval(KernelSpec::gaussian(1e4), o, far) == 0.0);
}

TEST_CASE("gram shapes and symmetry") {
  const auto bank = extract_patterns({instance({1, 1, 1, 1})}, 2);
  const auto g = gram(KernelSpec::gaussian(3.0), bank);
  CHECK(g.rows() == 3);
  CHECK(g.symmetric());
  for (double v : g.values()) CHECK(v == 1.0);

  const std::vector<double> z{2.0, 5.0};
  const PatternList one{z};
  const auto single = gram(KernelSpec::gaussian(0.5), one);
  CHECK(single.rows() == 1);
  CHECK(single.at(0, 0) == 1.0);

  const std::vector<double> w{1.0, 0.0};
  const PatternList other{w};
  const auto cross = gram(KernelSpec::linear(), one, other);
  CHECK_FALSE(cross.symmetric());
  CHECK(cross.at(0, 0) == 2.0);

  const std::vector<double> short_one{1.0};
  const PatternList mixed{z, short_one};
  CHECK_THROWS_AS(gram(KernelSpec::linear(), mixed), Error);
}

TEST_CASE("Gaussian Gram is symmetric, bounded and positive semidefinite") {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 20; ++trial) {
    const auto inst = testutil::random_instances(1 + rng() % 5, 12, rng);
    const auto bank = extract_patterns(inst, 3);
    if (bank.size() > 50) continue;
    const double sigma = std::pow(10.0, static_cast<double>(rng() % 5) - 2.0);
    const auto g = gram(KernelSpec::gaussian(sigma), bank);
    Eigen::MatrixXd mat(g.rows(), g.cols());
    for (std::size_t r = 0; r < g.rows(); ++r) {
      for (std::size_t c = 0; c < g.cols(); ++c) {
        CHECK(g.at(r, c) == g.at(c, r));
        CHECK(g.at(r, c) >= 0.0);
        CHECK(g.at(r, c) <= 1.0);
        mat(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = g.at(r, c);
      }
      CHECK(g.at(r, r) == 1.0);
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(mat);
    CHECK(eig.eigenvalues().minCoeff() >= -1e-8);
  }
}

TEST_CASE("five random patterns give eigenvalues above -1e-10") {
  std::mt19937_64 rng(12);
  std::normal_distribution<double> normal;
  std::vector<std::vector<double>> store(5, std::vector<double>(4));
  PatternList list;
  for (auto& p : store) {
    for (double& v : p) v = normal(rng);
    list.emplace_back(p);
  }
  const auto g = gram(KernelSpec::gaussian(1.0), list);
  Eigen::Map<const Eigen::Matrix<double, 5, 5, Eigen::RowMajor>> mat(g.values().data());
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix<double, 5, 5>> eig(mat);
  CHECK(eig.eigenvalues().minCoeff() >= -1e-10);
}

TEST_CASE("sigma selection on degenerate banks and single grids") {
  const auto same = extract_patterns({instance({2, 2, 2, 2, 2}), instance({2, 2, 2, 2, 2})}, 2);
  CHECK(select_sigma(same) == 1e-4);
  std::mt19937_64 rng(13);
  const auto inst = testutil::random_instances(3, 10, rng);
  const auto bank = extract_patterns(inst, 3);
  CHECK(select_sigma(bank, {42.0}) == 42.0);
  CHECK_THROWS_AS(select_sigma(bank, {}), Error);
  CHECK(select_sigma(bank) == select_sigma(bank));
}

TEST_CASE("two separated clusters prefer an intermediate sigma") {
  // Tight clusters at 0 and at 10: very small sigma makes all entries near 1,
  // very large sigma makes off-diagonal entries near 0.
  std::vector<LabeledInstance> inst;
  std::mt19937_64 rng(14);
  std::normal_distribution<double> noise(0.0, 0.05);
  for (int i = 0; i < 6; ++i) {
    const double centre = i % 2 ? 10.0 : 0.0;
    inst.push_back(instance({centre + noise(rng), centre + noise(rng)}));
  }
  const auto bank = extract_patterns(inst, 2);
  const auto sel = select_sigma_detailed(bank, default_sigma_grid());
  CHECK(sel.sigma > 1e-4);
  CHECK(sel.sigma < 1e4);
  // Oracle: the naive full-matrix variance at every grid value.
  double best = -1.0, chosen = -1.0;
  for (std::size_t k = 0; k < sel.grid.size(); ++k) {
    const double v = gram_variance(bank, sel.grid[k]);
    CHECK(sel.variances[k] == doctest::Approx(v).epsilon(1e-9));
    best = std::max(best, v);
    if (sel.grid[k] == sel.sigma) chosen = v;
  }
  CHECK(chosen >= best - 1e-12);
}

TEST_CASE("sigma selection subsamples large banks deterministically") {
  std::mt19937_64 rng(15);
  const auto inst = testutil::random_instances(30, 100, rng);
  const auto bank = extract_patterns(inst, 10);
  REQUIRE(bank.size() > kSigmaSubsampleLimit);
  const auto a = select_sigma_detailed(bank, default_sigma_grid());
  const auto b = select_sigma_detailed(bank, default_sigma_grid());
  CHECK(a.patterns_used == kSigmaSubsampleLimit);
  CHECK(a.sigma == b.sigma);
  CHECK(a.variances == b.variances);
}

TEST_CASE("gram cache round trip") {
  std::mt19937_64 rng(16);
  const auto bank = extract_patterns(testutil::random_instances(3, 7, rng), 3);
  const auto dir = std::filesystem::temp_directory_path() /
                   ("shapeboost-gram-test-" + std::to_string(rng()));
  {
    GramCache cache(dir);
    const auto first = cache.get(bank, KernelSpec::gaussian(0.5));
    const auto again = cache.get(bank, KernelSpec::gaussian(0.5));
    CHECK(first == again);
    CHECK(cache.computed() == 1);
  }
  GramCache reload(dir);
  const auto loaded = reload.get(bank, KernelSpec::gaussian(0.5));
  CHECK(reload.computed() == 0);
  const auto fresh = gram(KernelSpec::gaussian(0.5), bank);
  CHECK(loaded->values() == fresh.values());
  CHECK(loaded->symmetric());

  const auto file = dir / "bad.gram";
  { std::ofstream(file) << "not a gram"; }
  CHECK_THROWS_AS(load_gram(file), Error);
  std::filesystem::remove_all(dir);
}
