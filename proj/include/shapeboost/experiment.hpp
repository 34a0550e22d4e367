#pragma once

// Experiment protocol on top of the library: cross-validated grid search,
// training to a self-contained model file, evaluation, sparsity statistics
// and discriminative-pattern reports.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "shapeboost/booster.hpp"
#include "shapeboost/dataio.hpp"
#include "shapeboost/kernels.hpp"
#include "shapeboost/model.hpp"

namespace shapeboost {

inline constexpr const char* kVersion = "0.1.0";
inline constexpr int kModelFormatVersion = 1;

struct GridSpec {
  std::vector<double> length_fractions{0.1, 0.2, 0.3, 0.4};
  std::vector<double> nu_grid{0.2, 0.15, 0.1};
  int folds = 5;
  std::uint64_t seed = 0;
};

// Fractions and nu values in (0, 1], both lists nonempty, folds >= 2.
void validate(const GridSpec& grid);

// round(fraction * L) clamped to [2, L].
std::size_t pattern_length_for(double fraction, std::size_t series_length);

// Settings shared by every training run of an experiment.
struct TrainSettings {
  double lambda = 1.0;
  int rounds = 100;
  int dc_iters = 10;
  double dc_epsilon = 1e-6;
  double stop_eps = 1e-4;
  std::uint64_t seed = 0;
  KernelKind kernel = KernelKind::kGaussian;
  std::vector<double> sigma_grid = default_sigma_grid();
  NormMode norm_mode = NormMode::kL1;
  InitMode init_mode = InitMode::kCoordinate;
  bool znorm = false;
};

void validate(const TrainSettings& settings);

BoostConfig boost_config(const TrainSettings& settings, double nu);

// Kernel used for a bank: sigma selected on the bank for the Gaussian kind.
KernelSpec kernel_for(const PatternBank& bank, const TrainSettings& settings);

// Worst observed deviation of each booster invariant over one training run.
struct InvariantCheck {
  double gamma_reversal = 0.0;      // max_t of gamma_{t-1} - gamma_t
  double dual_violation = 0.0;      // max_t distribution_violation(d_t)
  double weight_sum_error = 0.0;    // |sum_t w_t - 1|
  double duality_gap = 0.0;
  std::size_t runs = 0;

  void merge(const InvariantCheck& other);
};

InvariantCheck check_invariants(const TrainResult& result);

struct GridCell {
  double fraction = 0.0;
  std::size_t pattern_length = 0;
  double nu = 0.0;
  double sigma = 0.0;  // 0 for the linear kernel
  std::vector<double> fold_accuracy;
  double mean_accuracy = 0.0;
};

struct GridResult {
  std::vector<GridCell> cells;  // fraction-major, in grid order
  std::size_t best = 0;
  InvariantCheck invariants;
};

// Ties on mean accuracy go to the smaller pattern length, then the larger nu.
std::size_t best_cell(const std::vector<GridCell>& cells);

// Per pattern length, sigma is selected and the Gram computed once on the
// full training bank; every fold trains on its subset of that bank. `log`
// receives one line per finished cell.
GridResult grid_search(const Dataset& train, const GridSpec& grid,
                       const TrainSettings& settings,
                       std::ostream* log = nullptr);

// Header: fraction,ell,nu,sigma,fold_1..fold_k,mean_accuracy
void write_grid_csv(std::ostream& out, const GridResult& result);

// Raw pattern vectors of a model, keyed like the training bank.
class PatternDictionary final : public PatternSource {
 public:
  PatternDictionary() = default;
  PatternDictionary(std::string id, std::size_t pattern_length)
      : id_(std::move(id)), pattern_length_(pattern_length) {}

  const std::string& id() const override { return id_; }
  std::size_t pattern_length() const override { return pattern_length_; }
  bool contains(PatternKey key) const override;
  std::span<const double> pattern(PatternKey key) const override;

  void insert(PatternKey key, std::vector<double> values);
  const std::map<PatternKey, std::vector<double>>& entries() const {
    return entries_;
  }
  std::size_t size() const { return entries_.size(); }

 private:
  std::string id_;
  std::size_t pattern_length_ = 0;
  std::map<PatternKey, std::vector<double>> entries_;
};

struct Provenance {
  std::string dataset;
  std::uint64_t seed = 0;
  std::string version = kVersion;
  bool znorm = false;
  std::string created;  // ISO-8601 UTC; not part of model identity
};

struct ModelFile {
  Ensemble ensemble;
  PatternDictionary patterns;
  LabelMap label_map;
  Provenance provenance;
  std::size_t train_instances = 0;  // m
  std::size_t series_length = 0;    // L
  std::size_t patterns_per_instance = 0;  // Q
};

// Collects the patterns referenced by nonzero coefficients from the bank.
ModelFile make_model(const TrainResult& result, const PatternBank& bank,
                     const Dataset& train, const TrainSettings& settings);

// UTC now, or SOURCE_DATE_EPOCH when that variable is set.
std::string current_timestamp();

std::string serialize_model(const ModelFile& model);
ModelFile deserialize_model(const std::string& text);
void save_model(const ModelFile& model, const std::filesystem::path& path);
ModelFile load_model(const std::filesystem::path& path);

// Model texts compared with the creation timestamp removed.
bool same_model_content(const std::string& a, const std::string& b);

struct TrainOutcome {
  ModelFile model;
  TrainResult result;
  KernelSpec kernel;
};

TrainOutcome train_model(const Dataset& train, std::size_t pattern_length,
                         double nu, const TrainSettings& settings);

// Applies the model's normalization and label map before predicting.
int predict(const ModelFile& model, const TimeSeries& series);

// Fraction of test instances predicted correctly. The test set must already
// use the model's label map; series shorter than the pattern length are
// rejected with kInvalidInput.
double evaluate(const ModelFile& model, const Dataset& test);

// Loads `path` through the model's label map.
Dataset load_test_set(const ModelFile& model, const std::filesystem::path& path);

struct SparsityReport {
  std::size_t active_terms = 0;
  std::size_t nonzero_alpha = 0;
  std::size_t alpha_denominator = 0;  // active_terms * m * Q
  double percent = 0.0;
};

// kEmptyModel when no term has a nonzero weight.
SparsityReport sparsity_report(const ModelFile& model);

struct PatternRecord {
  std::size_t term = 0;  // zero-based
  PatternKey key;
  double contribution = 0.0;  // w_t * alpha_ik
  std::vector<double> pattern;
  std::size_t best_offset = 0;  // zero-based
  double distance = 0.0;
};

// One record per nonzero (t, i, k), in term then key order. The best match
// is the window nearest in Euclidean distance, ties to the smallest offset.
std::vector<PatternRecord> pattern_report(const ModelFile& model,
                                          const TimeSeries& series);

// CSV indices are one-based; the pattern column holds ';'-separated values.
void write_pattern_csv(std::ostream& out,
                       const std::vector<PatternRecord>& records);
// The series in black with each pattern drawn at its best match, red for
// positive contributions and blue for negative ones.
void write_pattern_svg(std::ostream& out, const TimeSeries& series,
                       const std::vector<PatternRecord>& records);

struct ProtocolResult {
  GridResult grid;
  GridCell chosen;
  TrainOutcome outcome;
  double test_accuracy = 0.0;
  InvariantCheck invariants;  // over the grid and the final training
};

// Grid search, retrain on the full training set with the chosen cell, then
// evaluate on the test set.
ProtocolResult run_protocol(const Dataset& train, const Dataset& test,
                            const GridSpec& grid, const TrainSettings& settings,
                            std::ostream* log = nullptr);

}  // namespace shapeboost
