#include "shapeboost/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numeric>
#include <random>
#include <sstream>

#include "shapeboost/error.hpp"

namespace shapeboost {

double kernel_eval(const KernelSpec& spec, std::span<const double> z,
                   std::span<const double> z_prime) {
  if (z.size() != z_prime.size()) {
    fail(ErrorCode::kInvalidInput, "kernel arguments differ in length (" +
                                       std::to_string(z.size()) + " vs " +
                                       std::to_string(z_prime.size()) + ")");
  }
  if (spec.kind == KernelKind::kLinear) {
    double s = 0.0;
    for (std::size_t t = 0; t < z.size(); ++t) s += z[t] * z_prime[t];
    return s;
  }
  double dist2 = 0.0;
  for (std::size_t t = 0; t < z.size(); ++t) {
    const double diff = z[t] - z_prime[t];
    dist2 += diff * diff;
  }
  const double v = std::exp(-spec.sigma * dist2);
  return v < kKernelFlushThreshold ? 0.0 : v;
}

PatternList patterns_of(const PatternBank& bank) {
  PatternList out;
  out.reserve(bank.size());
  for (std::size_t f = 0; f < bank.size(); ++f) out.push_back(bank.pattern(f));
  return out;
}

GramTensor::GramTensor(KernelSpec spec, std::size_t rows, std::size_t cols,
                       bool symmetric, std::vector<double> values)
    : spec_(spec),
      rows_(rows),
      cols_(cols),
      symmetric_(symmetric),
      values_(std::move(values)) {
  if (values_.size() != rows_ * cols_) {
    fail(ErrorCode::kInvalidInput, "gram storage size mismatch");
  }
}

namespace {

void check_uniform_length(const PatternList& a, const PatternList& b) {
  std::size_t len = 0;
  bool seen = false;
  for (const auto* list : {&a, &b}) {
    for (const auto& p : *list) {
      if (!seen) {
        len = p.size();
        seen = true;
      } else if (p.size() != len) {
        fail(ErrorCode::kInvalidInput, "gram inputs have mixed pattern lengths");
      }
    }
  }
}

bool same_list(const PatternList& a, const PatternList& b) {
  if (&a == &b) return true;
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i].data() != b[i].data() || a[i].size() != b[i].size()) return false;
  }
  return true;
}

GramTensor symmetric_gram(const KernelSpec& spec, const PatternList& a) {
  const std::size_t n = a.size();
  std::vector<double> values(n * n);
  for (std::size_t r = 0; r < n; ++r) {
    values[r * n + r] = kernel_eval(spec, a[r], a[r]);
    for (std::size_t c = r + 1; c < n; ++c) {
      const double v = kernel_eval(spec, a[r], a[c]);
      values[r * n + c] = v;
      values[c * n + r] = v;
    }
  }
  return GramTensor(spec, n, n, true, std::move(values));
}

}  // namespace

GramTensor gram(const KernelSpec& spec, const PatternList& a,
                const PatternList& b) {
  validate(spec);
  check_uniform_length(a, b);
  if (same_list(a, b)) return symmetric_gram(spec, a);
  std::vector<double> values(a.size() * b.size());
  for (std::size_t r = 0; r < a.size(); ++r) {
    for (std::size_t c = 0; c < b.size(); ++c) {
      values[r * b.size() + c] = kernel_eval(spec, a[r], b[c]);
    }
  }
  return GramTensor(spec, a.size(), b.size(), false, std::move(values));
}

GramTensor gram(const KernelSpec& spec, const PatternList& a) {
  return gram(spec, a, a);
}

GramTensor gram(const KernelSpec& spec, const PatternBank& bank) {
  const PatternList list = patterns_of(bank);
  return gram(spec, list, list);
}

std::vector<double> default_sigma_grid() {
  return {1e-4, 1e-3, 1e-2, 1e-1, 1.0, 1e1, 1e2, 1e3, 1e4};
}

SigmaSelection select_sigma_detailed(const PatternBank& bank,
                                     const std::vector<double>& grid,
                                     std::size_t max_patterns,
                                     std::uint64_t seed) {
  if (grid.empty()) {
    fail(ErrorCode::kInvalidParameter, "sigma grid is empty");
  }
  for (double s : grid) {
    if (!(s > 0.0 && std::isfinite(s))) {
      fail(ErrorCode::kInvalidParameter, "sigma grid values must be positive");
    }
  }
  SigmaSelection out;
  out.grid = grid;
  std::sort(out.grid.begin(), out.grid.end());

  std::vector<std::size_t> chosen(bank.size());
  std::iota(chosen.begin(), chosen.end(), std::size_t{0});
  if (max_patterns > 0 && chosen.size() > max_patterns) {
    // Partial Fisher-Yates with an explicit bounded draw so the subsample
    // does not depend on the standard library's distribution code.
    std::mt19937_64 rng(seed);
    for (std::size_t i = 0; i < max_patterns; ++i) {
      const std::size_t span = chosen.size() - i;
      const std::size_t j = i + static_cast<std::size_t>(rng() % span);
      std::swap(chosen[i], chosen[j]);
    }
    chosen.resize(max_patterns);
    std::sort(chosen.begin(), chosen.end());
  }
  out.patterns_used = chosen.size();

  const std::size_t n = chosen.size();
  std::vector<double> dist2;
  dist2.reserve(n * (n - 1) / 2);
  for (std::size_t r = 0; r < n; ++r) {
    const auto a = bank.pattern(chosen[r]);
    for (std::size_t c = r + 1; c < n; ++c) {
      const auto b = bank.pattern(chosen[c]);
      double s = 0.0;
      for (std::size_t t = 0; t < a.size(); ++t) {
        const double d = a[t] - b[t];
        s += d * d;
      }
      dist2.push_back(s);
    }
  }

  const double count = static_cast<double>(n) * static_cast<double>(n);
  double best_variance = -1.0;
  for (double sigma : out.grid) {
    // Full n x n matrix: n diagonal ones plus each off-diagonal pair twice.
    double sum = static_cast<double>(n);
    double sum_sq = static_cast<double>(n);
    for (double d : dist2) {
      double v = std::exp(-sigma * d);
      if (v < kKernelFlushThreshold) v = 0.0;
      sum += 2.0 * v;
      sum_sq += 2.0 * v * v;
    }
    const double mean = sum / count;
    const double variance = std::max(0.0, sum_sq / count - mean * mean);
    out.variances.push_back(variance);
    if (variance > best_variance) {
      best_variance = variance;
      out.sigma = sigma;
    }
  }
  return out;
}

double select_sigma(const PatternBank& bank, const std::vector<double>& grid) {
  return select_sigma_detailed(bank, grid).sigma;
}

namespace {

constexpr char kGramMagic[8] = {'S', 'B', 'G', 'R', 'A', 'M', '\0', '\0'};

template <typename T>
void put(std::ostream& out, T v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T get(std::istream& in) {
  T v{};
  in.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!in) fail(ErrorCode::kParseError, "truncated gram cache file");
  return v;
}

}  // namespace

void save_gram(const std::filesystem::path& path, const GramTensor& g,
               const GramCacheHeader& header) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorCode::kInvalidInput, "cannot write " + path.string());
  out.write(kGramMagic, sizeof(kGramMagic));
  put<std::uint32_t>(out, header.version);
  put<std::uint64_t>(out, header.num_instances);
  put<std::uint64_t>(out, header.patterns_per_instance);
  put<std::uint64_t>(out, header.pattern_length);
  put<std::uint32_t>(out, g.spec().kind == KernelKind::kLinear ? 0u : 1u);
  put<double>(out, g.spec().sigma);
  put<std::uint64_t>(out, g.rows());
  put<std::uint64_t>(out, g.cols());
  put<std::uint8_t>(out, g.symmetric() ? 1 : 0);
  out.write(reinterpret_cast<const char*>(g.values().data()),
            static_cast<std::streamsize>(g.values().size() * sizeof(double)));
  if (!out) fail(ErrorCode::kInvalidInput, "failed writing " + path.string());
}

GramTensor load_gram(const std::filesystem::path& path,
                     GramCacheHeader* header_out) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::kInvalidInput, "cannot open " + path.string());
  char magic[8];
  in.read(magic, sizeof(magic));
  if (!in || std::memcmp(magic, kGramMagic, sizeof(magic)) != 0) {
    fail(ErrorCode::kParseError, path.string() + " is not a gram cache file");
  }
  GramCacheHeader header;
  header.version = get<std::uint32_t>(in);
  if (header.version != 1) {
    fail(ErrorCode::kParseError, "unsupported gram cache version " +
                                     std::to_string(header.version));
  }
  header.num_instances = get<std::uint64_t>(in);
  header.patterns_per_instance = get<std::uint64_t>(in);
  header.pattern_length = get<std::uint64_t>(in);
  const auto kind = get<std::uint32_t>(in);
  const auto sigma = get<double>(in);
  const auto rows = get<std::uint64_t>(in);
  const auto cols = get<std::uint64_t>(in);
  const auto symmetric = get<std::uint8_t>(in);
  KernelSpec spec = kind == 0 ? KernelSpec::linear() : KernelSpec::gaussian(sigma);
  std::vector<double> values(rows * cols);
  in.read(reinterpret_cast<char*>(values.data()),
          static_cast<std::streamsize>(values.size() * sizeof(double)));
  if (!in) fail(ErrorCode::kParseError, "truncated gram cache file");
  if (header_out) *header_out = header;
  return GramTensor(spec, rows, cols, symmetric != 0, std::move(values));
}

std::shared_ptr<const GramTensor> GramCache::get(const PatternBank& bank,
                                                 const KernelSpec& spec) {
  const Key key{bank.id(), static_cast<int>(spec.kind),
                spec.kind == KernelKind::kLinear ? 0.0 : spec.sigma};
  if (auto it = entries_.find(key); it != entries_.end()) return it->second;

  std::filesystem::path file;
  if (!directory_.empty()) {
    std::ostringstream name;
    name << bank.id() << '-' << to_string(spec.kind) << '-'
         << std::get<2>(key) << ".gram";
    file = directory_ / name.str();
    if (std::filesystem::exists(file)) {
      auto loaded = std::make_shared<const GramTensor>(load_gram(file));
      if (loaded->rows() == bank.size() && loaded->spec() == spec) {
        entries_[key] = loaded;
        return loaded;
      }
    }
  }
  auto computed = std::make_shared<const GramTensor>(gram(spec, bank));
  ++computed_;
  if (!file.empty()) {
    std::filesystem::create_directories(directory_);
    save_gram(file, *computed,
              {1, bank.num_instances(), bank.patterns_per_instance(),
               bank.pattern_length()});
  }
  entries_[key] = computed;
  return computed;
}

}  // namespace shapeboost
