#pragma once

// Domain types shared across the toolkit: series, pattern banks, kernel
// specifications, base hypotheses and ensembles, plus their evaluation.

#include <compare>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace shapeboost {

struct TimeSeries {
  std::vector<double> values;
  std::string id;

  std::size_t length() const { return values.size(); }
};

// Throws kInvalidInput unless the series has at least two finite values.
void validate(const TimeSeries& series);

struct LabeledInstance {
  TimeSeries series;
  int label = +1;  // -1 or +1
};

// Zero-based (instance, offset) address of a pattern. Serialized formats and
// reports use one-based indices.
struct PatternKey {
  std::uint32_t instance = 0;
  std::uint32_t offset = 0;

  auto operator<=>(const PatternKey&) const = default;
};

// Anything that can hand out raw pattern vectors by key: the full training
// bank during learning, or the pattern payload of a loaded model file.
class PatternSource {
 public:
  virtual ~PatternSource() = default;
  virtual const std::string& id() const = 0;
  virtual std::size_t pattern_length() const = 0;
  virtual bool contains(PatternKey key) const = 0;
  virtual std::span<const double> pattern(PatternKey key) const = 0;
};

// All Q = L - l + 1 contiguous windows of every instance, stored densely in
// instance-major order.
class PatternBank final : public PatternSource {
 public:
  PatternBank(std::string id, std::size_t num_instances,
              std::size_t patterns_per_instance, std::size_t pattern_length,
              std::vector<double> values);

  const std::string& id() const override { return id_; }
  std::size_t pattern_length() const override { return pattern_length_; }
  bool contains(PatternKey key) const override;
  std::span<const double> pattern(PatternKey key) const override;

  std::size_t num_instances() const { return num_instances_; }
  std::size_t patterns_per_instance() const { return patterns_per_instance_; }
  std::size_t size() const { return num_instances_ * patterns_per_instance_; }

  std::size_t flat_index(PatternKey key) const {
    return static_cast<std::size_t>(key.instance) * patterns_per_instance_ +
           key.offset;
  }
  PatternKey key_of(std::size_t flat) const;
  std::span<const double> pattern(std::size_t flat) const;

 private:
  std::string id_;
  std::size_t num_instances_;
  std::size_t patterns_per_instance_;
  std::size_t pattern_length_;
  std::vector<double> values_;
};

// Extracts the length-`pattern_length` windows of every instance. All series
// must share one length L >= pattern_length.
PatternBank extract_patterns(const std::vector<LabeledInstance>& instances,
                             std::size_t pattern_length);

// Windows of a single series, in offset order.
std::vector<std::vector<double>> windows_of(const TimeSeries& series,
                                            std::size_t pattern_length);

enum class KernelKind { kLinear, kGaussian };

struct KernelSpec {
  KernelKind kind = KernelKind::kGaussian;
  double sigma = 1.0;  // ignored for kLinear

  static KernelSpec linear() { return {KernelKind::kLinear, 0.0}; }
  static KernelSpec gaussian(double sigma) {
    return {KernelKind::kGaussian, sigma};
  }

  bool operator==(const KernelSpec& other) const;
};

void validate(const KernelSpec& spec);
std::string to_string(KernelKind kind);
KernelKind kernel_kind_from_string(const std::string& name);

struct AlphaEntry {
  PatternKey key;
  double value = 0.0;
};

// h(x) = max_j sum_(i,k) alpha_ik K(pattern(i,k), x^(j)). Entries are kept
// sorted by key and free of exact zeros.
struct BaseHypothesis {
  std::vector<AlphaEntry> alpha;
  std::string bank_id;
  KernelSpec kernel;

  double l1_norm() const;
  std::size_t nonzeros() const { return alpha.size(); }
};

// Sorts by key, merges duplicates and drops entries with |value| <= drop_tol.
void canonicalize(BaseHypothesis& h, double drop_tol = 0.0);

struct HyperParams {
  std::size_t pattern_length = 0;
  double nu = 0.1;
  double lambda = 1.0;
  KernelSpec kernel;
};

struct EnsembleTerm {
  double weight = 0.0;
  BaseHypothesis hypothesis;
};

struct Ensemble {
  std::vector<EnsembleTerm> terms;
  HyperParams hyper;

  double weight_sum() const;
};

// A training sample expressed as instance indices into a pattern bank, with
// their +/-1 labels.
struct Sample {
  std::vector<std::size_t> instances;
  std::vector<int> labels;

  std::size_t size() const { return instances.size(); }
};

struct Distribution {
  std::vector<double> weights;
  double nu = 1.0;

  std::size_t size() const { return weights.size(); }
  static Distribution uniform(std::size_t m, double nu);
};

// Largest violation of d_i >= 0, d_i <= 1/(nu m) and sum d_i = 1.
double distribution_violation(const Distribution& d);

double eval_base(const BaseHypothesis& h, const PatternSource& source,
                 const TimeSeries& x);

// Same value as eval_base, with the instance given as an explicit list of
// windows (in any order).
double eval_base_on_windows(const BaseHypothesis& h,
                            const PatternSource& source,
                            const std::vector<std::vector<double>>& windows);

struct EnsembleScore {
  double score = 0.0;
  int prediction = +1;
};

// sign(0) is +1.
inline int sign_of(double score) { return score >= 0.0 ? +1 : -1; }

EnsembleScore eval_ensemble(const Ensemble& g, const PatternSource& source,
                            const TimeSeries& x);

}  // namespace shapeboost
