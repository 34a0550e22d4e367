#pragma once

// UCR-format datasets: loading, z-normalization, stratified folds and the
// internal save format (UCR CSV plus a JSON sidecar).

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "shapeboost/model.hpp"

namespace shapeboost {

// Original label strings for the two classes. The lexicographically smaller
// label is the positive one.
struct LabelMap {
  std::string positive;
  std::string negative;

  int map(const std::string& original) const;  // kInvalidInput if unknown
  const std::string& original(int label) const;
  bool operator==(const LabelMap&) const = default;
};

struct Dataset {
  std::string name;
  std::vector<LabeledInstance> instances;
  LabelMap label_map;

  std::size_t size() const { return instances.size(); }
  std::size_t series_length() const;
  std::vector<int> labels() const;
};

// Rows are comma- or whitespace-separated numbers with the class label in the
// first field. Blank lines are skipped. When `fixed` is given, labels are
// mapped through it instead of being derived from the file, so a test split
// may contain a single class.
Dataset parse_ucr(std::istream& in, const std::string& name,
                  const LabelMap* fixed = nullptr);
Dataset load_ucr(const std::filesystem::path& path,
                 const LabelMap* fixed = nullptr);

inline constexpr double kZNormStdGuard = 1e-12;

// Per series: mean 0 and population standard deviation 1; series with
// standard deviation below the guard become all zeros.
Dataset znormalize(const Dataset& ds);
std::vector<double> znormalize(const std::vector<double>& values);

struct Fold {
  std::vector<std::size_t> train;       // ascending
  std::vector<std::size_t> validation;  // ascending
};

// Each class is shuffled with the seed and dealt round-robin over the folds,
// starting where the previous class stopped. Warns on stderr when a class
// has fewer than k members.
std::vector<Fold> stratified_kfold(const std::vector<int>& labels, int k,
                                   std::uint64_t seed);
std::vector<Fold> stratified_kfold(const Dataset& ds, int k, std::uint64_t seed);

// Writes `csv_path` in UCR comma format with round-trip exact values and
// `csv_path` + ".json" holding the name and label map.
void save_dataset(const Dataset& ds, const std::filesystem::path& csv_path);
Dataset load_dataset(const std::filesystem::path& csv_path);

}  // namespace shapeboost
