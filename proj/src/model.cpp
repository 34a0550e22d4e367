#include "shapeboost/model.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <iomanip>
#include <limits>
#include <sstream>

#include "shapeboost/error.hpp"
#include "shapeboost/kernels.hpp"

namespace shapeboost {

namespace {

std::uint64_t fnv1a(std::uint64_t hash, const void* data, std::size_t bytes) {
  const auto* p = static_cast<const unsigned char*>(data);
  for (std::size_t i = 0; i < bytes; ++i) {
    hash ^= p[i];
    hash *= 0x100000001b3ULL;
  }
  return hash;
}

std::string bank_id_for(std::size_t m, std::size_t q, std::size_t ell,
                        const std::vector<double>& values) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  const std::uint64_t dims[3] = {m, q, ell};
  h = fnv1a(h, dims, sizeof(dims));
  h = fnv1a(h, values.data(), values.size() * sizeof(double));
  std::ostringstream os;
  os << "bank-" << m << 'x' << q << "-l" << ell << '-' << std::hex
     << std::setw(16) << std::setfill('0') << h;
  return os.str();
}

}  // namespace

void validate(const TimeSeries& series) {
  if (series.values.size() < 2) {
    fail(ErrorCode::kInvalidInput,
         "series '" + series.id + "' must have at least 2 values");
  }
  for (double v : series.values) {
    if (!std::isfinite(v)) {
      fail(ErrorCode::kInvalidInput,
           "series '" + series.id + "' contains a non-finite value");
    }
  }
}

PatternBank::PatternBank(std::string id, std::size_t num_instances,
                         std::size_t patterns_per_instance,
                         std::size_t pattern_length, std::vector<double> values)
    : id_(std::move(id)),
      num_instances_(num_instances),
      patterns_per_instance_(patterns_per_instance),
      pattern_length_(pattern_length),
      values_(std::move(values)) {
  if (pattern_length_ == 0 || patterns_per_instance_ == 0) {
    fail(ErrorCode::kInvalidParameter, "pattern bank dimensions must be positive");
  }
  if (values_.size() != num_instances_ * patterns_per_instance_ * pattern_length_) {
    fail(ErrorCode::kInvalidInput, "pattern bank storage size mismatch");
  }
}

bool PatternBank::contains(PatternKey key) const {
  return key.instance < num_instances_ && key.offset < patterns_per_instance_;
}

std::span<const double> PatternBank::pattern(PatternKey key) const {
  if (!contains(key)) {
    fail(ErrorCode::kInvalidInput, "pattern key outside bank index space");
  }
  return pattern(flat_index(key));
}

std::span<const double> PatternBank::pattern(std::size_t flat) const {
  return {values_.data() + flat * pattern_length_, pattern_length_};
}

PatternKey PatternBank::key_of(std::size_t flat) const {
  return {static_cast<std::uint32_t>(flat / patterns_per_instance_),
          static_cast<std::uint32_t>(flat % patterns_per_instance_)};
}

PatternBank extract_patterns(const std::vector<LabeledInstance>& instances,
                             std::size_t pattern_length) {
  if (instances.empty()) {
    fail(ErrorCode::kInvalidInput, "cannot extract patterns from an empty sample");
  }
  if (pattern_length == 0) {
    fail(ErrorCode::kInvalidParameter, "pattern length must be positive");
  }
  const std::size_t length = instances.front().series.length();
  for (const auto& inst : instances) {
    validate(inst.series);
    if (inst.series.length() != length) {
      fail(ErrorCode::kInvalidInput,
           "ragged input: series '" + inst.series.id + "' has length " +
               std::to_string(inst.series.length()) + ", expected " +
               std::to_string(length));
    }
  }
  if (pattern_length > length) {
    fail(ErrorCode::kInvalidParameter,
         "pattern length " + std::to_string(pattern_length) +
             " exceeds series length " + std::to_string(length));
  }
  const std::size_t q = length - pattern_length + 1;
  std::vector<double> values;
  values.reserve(instances.size() * q * pattern_length);
  for (const auto& inst : instances) {
    const auto& v = inst.series.values;
    for (std::size_t k = 0; k < q; ++k) {
      values.insert(values.end(), v.begin() + static_cast<std::ptrdiff_t>(k),
                    v.begin() + static_cast<std::ptrdiff_t>(k + pattern_length));
    }
  }
  std::string id = bank_id_for(instances.size(), q, pattern_length, values);
  return PatternBank(std::move(id), instances.size(), q, pattern_length,
                     std::move(values));
}

std::vector<std::vector<double>> windows_of(const TimeSeries& series,
                                            std::size_t pattern_length) {
  if (pattern_length == 0 || series.length() < pattern_length) {
    fail(ErrorCode::kInvalidInput,
         "series '" + series.id + "' is shorter than the pattern length");
  }
  std::vector<std::vector<double>> windows;
  const std::size_t q = series.length() - pattern_length + 1;
  windows.reserve(q);
  for (std::size_t j = 0; j < q; ++j) {
    windows.emplace_back(series.values.begin() + static_cast<std::ptrdiff_t>(j),
                         series.values.begin() +
                             static_cast<std::ptrdiff_t>(j + pattern_length));
  }
  return windows;
}

bool KernelSpec::operator==(const KernelSpec& other) const {
  if (kind != other.kind) return false;
  return kind == KernelKind::kLinear || sigma == other.sigma;
}

void validate(const KernelSpec& spec) {
  if (spec.kind == KernelKind::kGaussian &&
      !(spec.sigma > 0.0 && std::isfinite(spec.sigma))) {
    fail(ErrorCode::kInvalidParameter, "gaussian kernel needs sigma > 0");
  }
}

std::string to_string(KernelKind kind) {
  return kind == KernelKind::kLinear ? "linear" : "gaussian";
}

KernelKind kernel_kind_from_string(const std::string& name) {
  if (name == "linear") return KernelKind::kLinear;
  if (name == "gaussian") return KernelKind::kGaussian;
  fail(ErrorCode::kInvalidParameter, "unknown kernel '" + name + "'");
}

double BaseHypothesis::l1_norm() const {
  double s = 0.0;
  for (const auto& e : alpha) s += std::abs(e.value);
  return s;
}

void canonicalize(BaseHypothesis& h, double drop_tol) {
  std::sort(h.alpha.begin(), h.alpha.end(),
            [](const AlphaEntry& a, const AlphaEntry& b) { return a.key < b.key; });
  std::vector<AlphaEntry> merged;
  merged.reserve(h.alpha.size());
  for (const auto& e : h.alpha) {
    if (!merged.empty() && merged.back().key == e.key) {
      merged.back().value += e.value;
    } else {
      merged.push_back(e);
    }
  }
  std::erase_if(merged, [drop_tol](const AlphaEntry& e) {
    return e.value == 0.0 || std::abs(e.value) <= drop_tol;
  });
  h.alpha = std::move(merged);
}

double Ensemble::weight_sum() const {
  double s = 0.0;
  for (const auto& t : terms) s += t.weight;
  return s;
}

Distribution Distribution::uniform(std::size_t m, double nu) {
  Distribution d;
  d.weights.assign(m, 1.0 / static_cast<double>(m));
  d.nu = nu;
  return d;
}

double distribution_violation(const Distribution& d) {
  if (d.weights.empty()) return std::numeric_limits<double>::infinity();
  const double cap = 1.0 / (d.nu * static_cast<double>(d.weights.size()));
  double worst = 0.0;
  double sum = 0.0;
  for (double w : d.weights) {
    worst = std::max({worst, -w, w - cap});
    sum += w;
  }
  return std::max(worst, std::abs(sum - 1.0));
}

double eval_base_on_windows(const BaseHypothesis& h,
                            const PatternSource& source,
                            const std::vector<std::vector<double>>& windows) {
  if (h.bank_id != source.id()) {
    fail(ErrorCode::kInvalidInput, "hypothesis bound to bank '" + h.bank_id +
                                       "' evaluated against '" + source.id() + "'");
  }
  if (windows.empty()) {
    fail(ErrorCode::kInvalidInput, "instance has no windows");
  }
  std::vector<std::span<const double>> patterns;
  patterns.reserve(h.alpha.size());
  for (const auto& e : h.alpha) {
    if (!source.contains(e.key)) {
      fail(ErrorCode::kInvalidInput, "alpha key outside the bank index space");
    }
    patterns.push_back(source.pattern(e.key));
  }
  double best = -std::numeric_limits<double>::infinity();
  for (const auto& w : windows) {
    if (w.size() != source.pattern_length()) {
      fail(ErrorCode::kInvalidInput, "window length differs from pattern length");
    }
    double s = 0.0;
    for (std::size_t t = 0; t < patterns.size(); ++t) {
      s += h.alpha[t].value * kernel_eval(h.kernel, patterns[t], w);
    }
    best = std::max(best, s);
  }
  return best;
}

double eval_base(const BaseHypothesis& h, const PatternSource& source,
                 const TimeSeries& x) {
  return eval_base_on_windows(h, source, windows_of(x, source.pattern_length()));
}

EnsembleScore eval_ensemble(const Ensemble& g, const PatternSource& source,
                            const TimeSeries& x) {
  if (g.terms.empty()) {
    fail(ErrorCode::kInvalidModel, "ensemble has no terms");
  }
  const auto windows = windows_of(x, source.pattern_length());
  EnsembleScore out;
  for (const auto& term : g.terms) {
    out.score += term.weight * eval_base_on_windows(term.hypothesis, source, windows);
  }
  out.prediction = sign_of(out.score);
  return out;
}

}  // namespace shapeboost
