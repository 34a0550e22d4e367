#include "shapeboost/dataio.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iostream>
#include <map>
#include <random>
#include <sstream>

#include "json.hpp"

#include "shapeboost/error.hpp"

namespace shapeboost {

int LabelMap::map(const std::string& original) const {
  if (original == positive) return +1;
  if (original == negative) return -1;
  fail(ErrorCode::kInvalidInput, "label '" + original + "' is not in the label map");
}

const std::string& LabelMap::original(int label) const {
  return label > 0 ? positive : negative;
}

std::size_t Dataset::series_length() const {
  return instances.empty() ? 0 : instances.front().series.length();
}

std::vector<int> Dataset::labels() const {
  std::vector<int> out;
  out.reserve(instances.size());
  for (const auto& inst : instances) out.push_back(inst.label);
  return out;
}

namespace {

std::string_view trim(std::string_view s) {
  const auto ws = [](char c) { return c == ' ' || c == '\t' || c == '\r'; };
  while (!s.empty() && ws(s.front())) s.remove_prefix(1);
  while (!s.empty() && ws(s.back())) s.remove_suffix(1);
  return s;
}

// Comma-separated when the line has a comma, whitespace-separated otherwise.
std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> fields;
  line = trim(line);
  if (line.find(',') != std::string_view::npos) {
    std::size_t start = 0;
    for (;;) {
      const std::size_t comma = line.find(',', start);
      fields.push_back(trim(line.substr(start, comma - start)));
      if (comma == std::string_view::npos) break;
      start = comma + 1;
    }
    return fields;
  }
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) ++i;
    std::size_t j = i;
    while (j < line.size() && line[j] != ' ' && line[j] != '\t' && line[j] != '\r') ++j;
    if (j > i) fields.push_back(line.substr(i, j - i));
    i = j;
  }
  return fields;
}

double parse_number(std::string_view field, std::size_t line_no) {
  double v = 0.0;
  const char* first = field.data();
  const char* last = field.data() + field.size();
  if (!field.empty() && *first == '+') ++first;
  auto [ptr, ec] = std::from_chars(first, last, v);
  if (field.empty() || ec != std::errc() || ptr != last) {
    fail(ErrorCode::kParseError, "line " + std::to_string(line_no) +
                                     ": '" + std::string(field) +
                                     "' is not a number");
  }
  if (!std::isfinite(v)) {
    fail(ErrorCode::kParseError,
         "line " + std::to_string(line_no) + ": non-finite value");
  }
  return v;
}

bool blank(std::string_view line) {
  return trim(line).empty();
}

}  // namespace

Dataset parse_ucr(std::istream& in, const std::string& name,
                  const LabelMap* fixed) {
  Dataset ds;
  ds.name = name;
  std::vector<std::string> raw_labels;
  std::string line;
  std::size_t line_no = 0;
  std::size_t length = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (blank(line)) continue;
    const auto fields = split_fields(line);
    if (fields.size() < 2) {
      fail(ErrorCode::kInvalidInput,
           "line " + std::to_string(line_no) + ": no series values");
    }
    // Validates that the label is numeric.
    parse_number(fields[0], line_no);
    LabeledInstance inst;
    inst.series.id = std::to_string(ds.instances.size() + 1);
    inst.series.values.reserve(fields.size() - 1);
    for (std::size_t f = 1; f < fields.size(); ++f) {
      inst.series.values.push_back(parse_number(fields[f], line_no));
    }
    if (ds.instances.empty()) {
      length = inst.series.length();
    } else if (inst.series.length() != length) {
      fail(ErrorCode::kInvalidInput,
           "line " + std::to_string(line_no) + ": series length " +
               std::to_string(inst.series.length()) + " differs from " +
               std::to_string(length));
    }
    raw_labels.emplace_back(fields[0]);
    ds.instances.push_back(std::move(inst));
  }
  if (ds.instances.empty()) {
    fail(ErrorCode::kInvalidInput, "dataset '" + name + "' has no rows");
  }

  if (fixed) {
    ds.label_map = *fixed;
  } else {
    std::vector<std::string> distinct = raw_labels;
    std::sort(distinct.begin(), distinct.end());
    distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
    if (distinct.size() > 2) {
      fail(ErrorCode::kUnsupportedMulticlass,
           "dataset '" + name + "' has " + std::to_string(distinct.size()) +
               " classes");
    }
    if (distinct.size() < 2) {
      fail(ErrorCode::kInvalidInput, "dataset '" + name + "' has a single class");
    }
    ds.label_map = {distinct[0], distinct[1]};
  }
  for (std::size_t i = 0; i < ds.instances.size(); ++i) {
    ds.instances[i].label = ds.label_map.map(raw_labels[i]);
  }
  return ds;
}

Dataset load_ucr(const std::filesystem::path& path, const LabelMap* fixed) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::kInvalidInput, "cannot open " + path.string());
  return parse_ucr(in, path.stem().string(), fixed);
}

std::vector<double> znormalize(const std::vector<double>& values) {
  if (values.empty()) return {};
  const double n = static_cast<double>(values.size());
  double mean = 0.0;
  for (double v : values) mean += v;
  mean /= n;
  double var = 0.0;
  for (double v : values) var += (v - mean) * (v - mean);
  const double sd = std::sqrt(var / n);
  std::vector<double> out(values.size(), 0.0);
  if (sd < kZNormStdGuard) return out;
  for (std::size_t i = 0; i < values.size(); ++i) out[i] = (values[i] - mean) / sd;
  return out;
}

Dataset znormalize(const Dataset& ds) {
  Dataset out = ds;
  for (auto& inst : out.instances) {
    inst.series.values = znormalize(inst.series.values);
  }
  return out;
}

std::vector<Fold> stratified_kfold(const std::vector<int>& labels, int k,
                                   std::uint64_t seed) {
  if (k < 2) fail(ErrorCode::kInvalidParameter, "k must be at least 2");
  const std::size_t m = labels.size();
  const auto folds = static_cast<std::size_t>(k);
  if (folds > m) {
    fail(ErrorCode::kInvalidParameter, "k = " + std::to_string(k) +
                                           " exceeds the sample size " +
                                           std::to_string(m));
  }
  std::map<int, std::vector<std::size_t>> by_class;
  for (std::size_t i = 0; i < m; ++i) by_class[labels[i]].push_back(i);

  std::mt19937_64 rng(seed);
  std::vector<std::vector<std::size_t>> validation(folds);
  std::size_t next = 0;
  for (auto& [label, members] : by_class) {
    if (members.size() < folds) {
      std::cerr << "warning: class " << label << " has " << members.size()
                << " members for " << k << " folds\n";
    }
    for (std::size_t i = members.size(); i > 1; --i) {
      const std::size_t j = static_cast<std::size_t>(rng() % i);
      std::swap(members[i - 1], members[j]);
    }
    for (std::size_t idx : members) {
      validation[next].push_back(idx);
      next = (next + 1) % folds;
    }
  }

  std::vector<Fold> out(folds);
  for (std::size_t f = 0; f < folds; ++f) {
    std::sort(validation[f].begin(), validation[f].end());
    std::vector<char> in_val(m, 0);
    for (std::size_t idx : validation[f]) in_val[idx] = 1;
    for (std::size_t i = 0; i < m; ++i) {
      if (!in_val[i]) out[f].train.push_back(i);
    }
    out[f].validation = std::move(validation[f]);
  }
  return out;
}

std::vector<Fold> stratified_kfold(const Dataset& ds, int k, std::uint64_t seed) {
  return stratified_kfold(ds.labels(), k, seed);
}

void save_dataset(const Dataset& ds, const std::filesystem::path& csv_path) {
  std::ofstream out(csv_path);
  if (!out) fail(ErrorCode::kInvalidInput, "cannot write " + csv_path.string());
  char buf[32];
  for (const auto& inst : ds.instances) {
    out << ds.label_map.original(inst.label);
    for (double v : inst.series.values) {
      auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
      out << ',' << std::string_view(buf, static_cast<std::size_t>(ptr - buf));
    }
    out << '\n';
  }
  nlohmann::ordered_json side;
  side["name"] = ds.name;
  side["label_map"] = {{"positive", ds.label_map.positive},
                       {"negative", ds.label_map.negative}};
  std::ofstream meta(csv_path.string() + ".json");
  if (!meta) fail(ErrorCode::kInvalidInput, "cannot write sidecar for " + csv_path.string());
  meta << side.dump(2) << '\n';
}

Dataset load_dataset(const std::filesystem::path& csv_path) {
  std::ifstream meta(csv_path.string() + ".json");
  if (!meta) fail(ErrorCode::kInvalidInput, "missing sidecar for " + csv_path.string());
  nlohmann::json side;
  try {
    side = nlohmann::json::parse(meta);
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::kParseError, std::string("dataset sidecar: ") + e.what());
  }
  const LabelMap map{side.at("label_map").at("positive").get<std::string>(),
                     side.at("label_map").at("negative").get<std::string>()};
  std::ifstream in(csv_path);
  if (!in) fail(ErrorCode::kInvalidInput, "cannot open " + csv_path.string());
  return parse_ucr(in, side.at("name").get<std::string>(), &map);
}

}  // namespace shapeboost
