#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <span>
#include <tuple>
#include <vector>

#include "shapeboost/model.hpp"

namespace shapeboost {

// Values below this are flushed to zero.
inline constexpr double kKernelFlushThreshold = 1e-300;

double kernel_eval(const KernelSpec& spec, std::span<const double> z,
                   std::span<const double> z_prime);

using PatternList = std::vector<std::span<const double>>;

PatternList patterns_of(const PatternBank& bank);

// Dense kernel matrix between two pattern lists, row-major.
class GramTensor {
 public:
  GramTensor() = default;
  GramTensor(KernelSpec spec, std::size_t rows, std::size_t cols,
             bool symmetric, std::vector<double> values);

  const KernelSpec& spec() const { return spec_; }
  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  bool symmetric() const { return symmetric_; }

  double at(std::size_t a, std::size_t b) const {
    return values_[a * cols_ + b];
  }
  std::span<const double> row(std::size_t a) const {
    return {values_.data() + a * cols_, cols_};
  }
  const std::vector<double>& values() const { return values_; }

 private:
  KernelSpec spec_;
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  bool symmetric_ = false;
  std::vector<double> values_;
};

GramTensor gram(const KernelSpec& spec, const PatternList& a,
                const PatternList& b);
GramTensor gram(const KernelSpec& spec, const PatternList& a);
// Bank x bank Gram, symmetric, indexed by PatternBank::flat_index.
GramTensor gram(const KernelSpec& spec, const PatternBank& bank);

// {1e-4, 1e-3, ..., 1e4}
std::vector<double> default_sigma_grid();

struct SigmaSelection {
  double sigma = 0.0;
  std::vector<double> grid;       // ascending
  std::vector<double> variances;  // one per grid value
  std::size_t patterns_used = 0;
};

inline constexpr std::size_t kSigmaSubsampleLimit = 2000;
inline constexpr std::uint64_t kSigmaSubsampleSeed = 0x5167'6d61ULL;

// Picks the grid value whose Gaussian Gram over the bank (or a seeded
// uniform subsample of at most `max_patterns` patterns) has the largest
// element-wise variance. Ties go to the smaller sigma.
SigmaSelection select_sigma_detailed(
    const PatternBank& bank, const std::vector<double>& grid,
    std::size_t max_patterns = kSigmaSubsampleLimit,
    std::uint64_t seed = kSigmaSubsampleSeed);

double select_sigma(const PatternBank& bank,
                    const std::vector<double>& grid = default_sigma_grid());

// Binary cache layout (little-endian):
//   char[8] "SBGRAM\0\0", u32 version, u64 m, u64 Q, u64 l, u32 kind,
//   f64 sigma, u64 rows, u64 cols, u8 symmetric, f64 values[rows*cols]
// Values are row-major.
struct GramCacheHeader {
  std::uint32_t version = 1;
  std::uint64_t num_instances = 0;
  std::uint64_t patterns_per_instance = 0;
  std::uint64_t pattern_length = 0;
};

void save_gram(const std::filesystem::path& path, const GramTensor& gram,
               const GramCacheHeader& header);
GramTensor load_gram(const std::filesystem::path& path,
                     GramCacheHeader* header_out = nullptr);

// Computes bank Grams once per (bank, kernel) configuration. When a
// directory is given, tensors are also persisted there.
class GramCache {
 public:
  explicit GramCache(std::filesystem::path directory = {})
      : directory_(std::move(directory)) {}

  std::shared_ptr<const GramTensor> get(const PatternBank& bank,
                                        const KernelSpec& spec);
  std::size_t computed() const { return computed_; }
  void clear() { entries_.clear(); }

 private:
  using Key = std::tuple<std::string, int, double>;
  std::filesystem::path directory_;
  std::map<Key, std::shared_ptr<const GramTensor>> entries_;
  std::size_t computed_ = 0;
};

}  // namespace shapeboost
