#include "shapeboost/experiment.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <limits>
#include <ostream>
#include <sstream>

#include "json.hpp"
#include "shapeboost/error.hpp"

namespace shapeboost {

namespace {

using Json = nlohmann::ordered_json;

std::string fmt(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

void require(bool ok, ErrorCode code, const std::string& what) {
  if (!ok) fail(code, what);
}

Dataset prepared(const Dataset& ds, const TrainSettings& settings) {
  return settings.znorm ? znormalize(ds) : ds;
}

// g(x) for a bank instance, read off the Gram instead of re-evaluating
// kernels. Keys of the ensemble index the same bank.
double bank_score(const Ensemble& g, const PatternBank& bank,
                  const GramTensor& gram, std::size_t instance) {
  const std::size_t q = bank.patterns_per_instance();
  const std::size_t begin = instance * q;
  std::vector<double> scores(q);
  double total = 0.0;
  for (const auto& term : g.terms) {
    std::fill(scores.begin(), scores.end(), 0.0);
    for (const auto& e : term.hypothesis.alpha) {
      const auto row = gram.row(bank.flat_index(e.key));
      for (std::size_t j = 0; j < q; ++j) scores[j] += e.value * row[begin + j];
    }
    total += term.weight * *std::max_element(scores.begin(), scores.end());
  }
  return total;
}

Sample sample_of(const Dataset& ds, const std::vector<std::size_t>& indices) {
  Sample s;
  for (std::size_t i : indices) {
    s.instances.push_back(i);
    s.labels.push_back(ds.instances[i].label);
  }
  return s;
}

Sample full_sample(const Dataset& ds) {
  std::vector<std::size_t> all(ds.size());
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
  return sample_of(ds, all);
}

}  // namespace

void validate(const GridSpec& grid) {
  require(!grid.length_fractions.empty(), ErrorCode::kInvalidParameter,
          "length fraction grid is empty");
  require(!grid.nu_grid.empty(), ErrorCode::kInvalidParameter, "nu grid is empty");
  for (double f : grid.length_fractions) {
    require(f > 0.0 && f <= 1.0, ErrorCode::kInvalidParameter,
            "length fractions must lie in (0, 1]");
  }
  for (double nu : grid.nu_grid) {
    require(nu > 0.0 && nu <= 1.0, ErrorCode::kInvalidParameter,
            "nu values must lie in (0, 1]");
  }
  require(grid.folds >= 2, ErrorCode::kInvalidParameter, "need at least 2 folds");
}

std::size_t pattern_length_for(double fraction, std::size_t series_length) {
  require(fraction > 0.0 && fraction <= 1.0, ErrorCode::kInvalidParameter,
          "length fraction must lie in (0, 1]");
  require(series_length >= 2, ErrorCode::kInvalidInput,
          "series must have at least two values");
  const double raw = std::round(fraction * static_cast<double>(series_length));
  const auto ell = static_cast<std::size_t>(std::max(raw, 0.0));
  return std::clamp<std::size_t>(ell, 2, series_length);
}

void validate(const TrainSettings& s) {
  require(s.lambda > 0.0 && std::isfinite(s.lambda), ErrorCode::kInvalidParameter,
          "lambda must be positive");
  require(s.rounds >= 1, ErrorCode::kInvalidParameter, "rounds must be >= 1");
  require(s.dc_iters >= 1, ErrorCode::kInvalidParameter, "dc-iters must be >= 1");
  require(s.dc_epsilon > 0.0, ErrorCode::kInvalidParameter, "eps must be positive");
  require(s.stop_eps > 0.0, ErrorCode::kInvalidParameter,
          "stopping tolerance must be positive");
  if (s.kernel == KernelKind::kGaussian) {
    require(!s.sigma_grid.empty(), ErrorCode::kInvalidParameter,
            "sigma grid is empty");
  }
}

BoostConfig boost_config(const TrainSettings& s, double nu) {
  validate(s);
  BoostConfig cfg;
  cfg.nu = nu;
  cfg.max_rounds = s.rounds;
  cfg.stop_eps = s.stop_eps;
  cfg.weak.lambda = s.lambda;
  cfg.weak.epsilon = s.dc_epsilon;
  cfg.weak.max_dc_iter = s.dc_iters;
  cfg.weak.norm_mode = s.norm_mode;
  cfg.weak.init_mode = s.init_mode;
  cfg.weak.seed = s.seed;
  validate(cfg);
  return cfg;
}

KernelSpec kernel_for(const PatternBank& bank, const TrainSettings& settings) {
  if (settings.kernel == KernelKind::kLinear) return KernelSpec::linear();
  return KernelSpec::gaussian(select_sigma(bank, settings.sigma_grid));
}

void InvariantCheck::merge(const InvariantCheck& o) {
  gamma_reversal = std::max(gamma_reversal, o.gamma_reversal);
  dual_violation = std::max(dual_violation, o.dual_violation);
  weight_sum_error = std::max(weight_sum_error, o.weight_sum_error);
  duality_gap = std::max(duality_gap, o.duality_gap);
  runs += o.runs;
}

InvariantCheck check_invariants(const TrainResult& result) {
  InvariantCheck c;
  c.runs = 1;
  const auto& rounds = result.trace.rounds;
  for (std::size_t t = 0; t < rounds.size(); ++t) {
    c.dual_violation = std::max(c.dual_violation, rounds[t].dual_violation);
    if (t > 0) {
      c.gamma_reversal =
          std::max(c.gamma_reversal, rounds[t - 1].gamma - rounds[t].gamma);
    }
  }
  c.weight_sum_error = std::abs(result.ensemble.weight_sum() - 1.0);
  c.duality_gap = std::abs(result.trace.duality_gap());
  return c;
}

std::size_t best_cell(const std::vector<GridCell>& cells) {
  require(!cells.empty(), ErrorCode::kInvalidParameter, "grid has no cells");
  std::size_t best = 0;
  for (std::size_t c = 1; c < cells.size(); ++c) {
    const GridCell& a = cells[c];
    const GridCell& b = cells[best];
    bool better = a.mean_accuracy > b.mean_accuracy;
    if (a.mean_accuracy == b.mean_accuracy) {
      better = a.pattern_length < b.pattern_length ||
               (a.pattern_length == b.pattern_length && a.nu > b.nu);
    }
    if (better) best = c;
  }
  return best;
}

GridResult grid_search(const Dataset& train_raw, const GridSpec& grid,
                       const TrainSettings& settings, std::ostream* log) {
  validate(grid);
  validate(settings);
  const Dataset ds = prepared(train_raw, settings);
  const std::size_t L = ds.series_length();
  const auto folds = stratified_kfold(ds, grid.folds, grid.seed);

  GridResult out;
  for (double fraction : grid.length_fractions) {
    const std::size_t ell = pattern_length_for(fraction, L);
    const PatternBank bank = extract_patterns(ds.instances, ell);
    const KernelSpec kernel = kernel_for(bank, settings);
    const GramTensor g = gram(kernel, bank);
    for (double nu : grid.nu_grid) {
      GridCell cell;
      cell.fraction = fraction;
      cell.pattern_length = ell;
      cell.nu = nu;
      cell.sigma = kernel.kind == KernelKind::kGaussian ? kernel.sigma : 0.0;
      const BoostConfig cfg = boost_config(settings, nu);
      double sum = 0.0;
      for (const Fold& fold : folds) {
        const TrainResult r = train(sample_of(ds, fold.train), bank, g, cfg);
        out.invariants.merge(check_invariants(r));
        std::size_t correct = 0;
        for (std::size_t v : fold.validation) {
          const int pred = sign_of(bank_score(r.ensemble, bank, g, v));
          correct += pred == ds.instances[v].label ? 1 : 0;
        }
        const double acc =
            static_cast<double>(correct) / static_cast<double>(fold.validation.size());
        cell.fold_accuracy.push_back(acc);
        sum += acc;
      }
      cell.mean_accuracy = sum / static_cast<double>(folds.size());
      if (log) {
        *log << "grid ell=" << ell << " nu=" << fmt(nu)
             << " sigma=" << fmt(cell.sigma)
             << " cv=" << fmt(cell.mean_accuracy) << '\n'
             << std::flush;
      }
      out.cells.push_back(std::move(cell));
    }
  }
  out.best = best_cell(out.cells);
  return out;
}

void write_grid_csv(std::ostream& out, const GridResult& result) {
  const std::size_t k =
      result.cells.empty() ? 0 : result.cells.front().fold_accuracy.size();
  out << "fraction,ell,nu,sigma";
  for (std::size_t f = 1; f <= k; ++f) out << ",fold_" << f;
  out << ",mean_accuracy\n";
  for (const auto& c : result.cells) {
    out << fmt(c.fraction) << ',' << c.pattern_length << ',' << fmt(c.nu) << ','
        << fmt(c.sigma);
    for (double a : c.fold_accuracy) out << ',' << fmt(a);
    out << ',' << fmt(c.mean_accuracy) << '\n';
  }
}

bool PatternDictionary::contains(PatternKey key) const {
  return entries_.count(key) != 0;
}

std::span<const double> PatternDictionary::pattern(PatternKey key) const {
  const auto it = entries_.find(key);
  if (it == entries_.end()) {
    fail(ErrorCode::kInvalidModel, "model has no pattern for (" +
                                       std::to_string(key.instance + 1) + ", " +
                                       std::to_string(key.offset + 1) + ")");
  }
  return it->second;
}

void PatternDictionary::insert(PatternKey key, std::vector<double> values) {
  if (values.size() != pattern_length_) {
    fail(ErrorCode::kInvalidModel, "pattern length differs from the model's");
  }
  entries_[key] = std::move(values);
}

std::string current_timestamp() {
  std::time_t t;
  if (const char* epoch = std::getenv("SOURCE_DATE_EPOCH"); epoch && *epoch) {
    t = static_cast<std::time_t>(std::strtoll(epoch, nullptr, 10));
  } else {
    t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  }
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

ModelFile make_model(const TrainResult& result, const PatternBank& bank,
                     const Dataset& train, const TrainSettings& settings) {
  ModelFile model;
  model.ensemble = result.ensemble;
  model.patterns = PatternDictionary(bank.id(), bank.pattern_length());
  for (const auto& term : model.ensemble.terms) {
    for (const auto& e : term.hypothesis.alpha) {
      if (model.patterns.contains(e.key)) continue;
      const auto p = bank.pattern(e.key);
      model.patterns.insert(e.key, std::vector<double>(p.begin(), p.end()));
    }
  }
  model.label_map = train.label_map;
  model.provenance.dataset = train.name;
  model.provenance.seed = settings.seed;
  model.provenance.znorm = settings.znorm;
  model.provenance.created = current_timestamp();
  model.train_instances = bank.num_instances();
  model.series_length = train.series_length();
  model.patterns_per_instance = bank.patterns_per_instance();
  return model;
}

std::string serialize_model(const ModelFile& model) {
  const HyperParams& hp = model.ensemble.hyper;
  Json j;
  j["format"] = "shapeboost-model";
  j["format_version"] = kModelFormatVersion;
  j["hyperparams"] = {
      {"pattern_length", hp.pattern_length},
      {"nu", hp.nu},
      {"lambda", hp.lambda},
      {"kernel", to_string(hp.kernel.kind)},
      {"sigma", hp.kernel.kind == KernelKind::kGaussian ? hp.kernel.sigma : 0.0},
  };
  j["training"] = {
      {"instances", model.train_instances},
      {"series_length", model.series_length},
      {"patterns_per_instance", model.patterns_per_instance},
      {"bank_id", model.patterns.id()},
  };
  j["label_map"] = {{"positive", model.label_map.positive},
                    {"negative", model.label_map.negative}};
  j["provenance"] = {
      {"dataset", model.provenance.dataset},
      {"seed", model.provenance.seed},
      {"version", model.provenance.version},
      {"znorm", model.provenance.znorm},
      {"created", model.provenance.created},
  };
  Json patterns = Json::array();
  for (const auto& [key, values] : model.patterns.entries()) {
    patterns.push_back({{"instance", key.instance + 1},
                        {"offset", key.offset + 1},
                        {"values", values}});
  }
  j["patterns"] = std::move(patterns);
  Json terms = Json::array();
  for (const auto& term : model.ensemble.terms) {
    Json alpha = Json::array();
    for (const auto& e : term.hypothesis.alpha) {
      alpha.push_back({{"instance", e.key.instance + 1},
                       {"offset", e.key.offset + 1},
                       {"value", e.value}});
    }
    terms.push_back({{"weight", term.weight}, {"alpha", std::move(alpha)}});
  }
  j["terms"] = std::move(terms);
  return j.dump(2) + "\n";
}

namespace {

PatternKey key_from(const Json& j) {
  const auto instance = j.at("instance").get<std::int64_t>();
  const auto offset = j.at("offset").get<std::int64_t>();
  if (instance < 1 || offset < 1) {
    fail(ErrorCode::kInvalidModel, "pattern indices are one-based");
  }
  return {static_cast<std::uint32_t>(instance - 1),
          static_cast<std::uint32_t>(offset - 1)};
}

ModelFile model_from_json(const Json& j) {
  if (j.at("format").get<std::string>() != "shapeboost-model") {
    fail(ErrorCode::kInvalidModel, "not a shapeboost model file");
  }
  const int version = j.at("format_version").get<int>();
  if (version != kModelFormatVersion) {
    fail(ErrorCode::kInvalidModel,
         "unsupported model format version " + std::to_string(version));
  }
  ModelFile model;
  HyperParams& hp = model.ensemble.hyper;
  const Json& h = j.at("hyperparams");
  hp.pattern_length = h.at("pattern_length").get<std::size_t>();
  hp.nu = h.at("nu").get<double>();
  hp.lambda = h.at("lambda").get<double>();
  const KernelKind kind = kernel_kind_from_string(h.at("kernel").get<std::string>());
  hp.kernel = kind == KernelKind::kLinear
                  ? KernelSpec::linear()
                  : KernelSpec::gaussian(h.at("sigma").get<double>());
  validate(hp.kernel);
  if (hp.pattern_length < 1) fail(ErrorCode::kInvalidModel, "pattern length is zero");

  const Json& tr = j.at("training");
  model.train_instances = tr.at("instances").get<std::size_t>();
  model.series_length = tr.at("series_length").get<std::size_t>();
  model.patterns_per_instance = tr.at("patterns_per_instance").get<std::size_t>();
  const std::string bank_id = tr.at("bank_id").get<std::string>();

  const Json& lm = j.at("label_map");
  model.label_map.positive = lm.at("positive").get<std::string>();
  model.label_map.negative = lm.at("negative").get<std::string>();

  const Json& pv = j.at("provenance");
  model.provenance.dataset = pv.at("dataset").get<std::string>();
  model.provenance.seed = pv.at("seed").get<std::uint64_t>();
  model.provenance.version = pv.at("version").get<std::string>();
  model.provenance.znorm = pv.at("znorm").get<bool>();
  model.provenance.created = pv.value("created", std::string{});

  model.patterns = PatternDictionary(bank_id, hp.pattern_length);
  for (const Json& p : j.at("patterns")) {
    const PatternKey key = key_from(p);
    auto values = p.at("values").get<std::vector<double>>();
    for (double v : values) {
      if (!std::isfinite(v)) fail(ErrorCode::kInvalidModel, "non-finite pattern value");
    }
    model.patterns.insert(key, std::move(values));
  }
  for (const Json& t : j.at("terms")) {
    EnsembleTerm term;
    term.weight = t.at("weight").get<double>();
    term.hypothesis.bank_id = bank_id;
    term.hypothesis.kernel = hp.kernel;
    for (const Json& a : t.at("alpha")) {
      const PatternKey key = key_from(a);
      if (!model.patterns.contains(key)) {
        fail(ErrorCode::kInvalidModel, "alpha entry without a stored pattern");
      }
      term.hypothesis.alpha.push_back({key, a.at("value").get<double>()});
    }
    canonicalize(term.hypothesis);
    model.ensemble.terms.push_back(std::move(term));
  }
  return model;
}

}  // namespace

ModelFile deserialize_model(const std::string& text) {
  Json j;
  try {
    j = Json::parse(text);
  } catch (const Json::exception& e) {
    fail(ErrorCode::kParseError, std::string("model file: ") + e.what());
  }
  try {
    return model_from_json(j);
  } catch (const Json::exception& e) {
    fail(ErrorCode::kInvalidModel, std::string("model file: ") + e.what());
  }
}

void save_model(const ModelFile& model, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorCode::kInvalidInput, "cannot write " + path.string());
  out << serialize_model(model);
  if (!out) fail(ErrorCode::kInvalidInput, "failed writing " + path.string());
}

ModelFile load_model(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::kInvalidInput, "cannot open " + path.string());
  std::ostringstream text;
  text << in.rdbuf();
  return deserialize_model(text.str());
}

bool same_model_content(const std::string& a, const std::string& b) {
  try {
    Json ja = Json::parse(a);
    Json jb = Json::parse(b);
    for (Json* j : {&ja, &jb}) {
      if (j->contains("provenance")) (*j)["provenance"].erase("created");
    }
    return ja.dump() == jb.dump();
  } catch (const Json::exception&) {
    return false;
  }
}

TrainOutcome train_model(const Dataset& train_raw, std::size_t pattern_length,
                         double nu, const TrainSettings& settings) {
  validate(settings);
  const Dataset ds = prepared(train_raw, settings);
  const PatternBank bank = extract_patterns(ds.instances, pattern_length);
  TrainOutcome out;
  out.kernel = kernel_for(bank, settings);
  const GramTensor g = gram(out.kernel, bank);
  out.result = train(full_sample(ds), bank, g, boost_config(settings, nu));
  out.model = make_model(out.result, bank, ds, settings);
  return out;
}

namespace {

TimeSeries model_view(const ModelFile& model, const TimeSeries& series) {
  const std::size_t ell = model.ensemble.hyper.pattern_length;
  if (series.length() < ell) {
    fail(ErrorCode::kInvalidInput, "series of length " +
                                       std::to_string(series.length()) +
                                       " is shorter than the pattern length " +
                                       std::to_string(ell));
  }
  TimeSeries view = series;
  if (model.provenance.znorm) view.values = znormalize(view.values);
  return view;
}

}  // namespace

int predict(const ModelFile& model, const TimeSeries& series) {
  return eval_ensemble(model.ensemble, model.patterns, model_view(model, series))
      .prediction;
}

double evaluate(const ModelFile& model, const Dataset& test) {
  require(test.size() > 0, ErrorCode::kInvalidInput, "test set is empty");
  std::size_t correct = 0;
  for (const auto& inst : test.instances) {
    correct += predict(model, inst.series) == inst.label ? 1 : 0;
  }
  return static_cast<double>(correct) / static_cast<double>(test.size());
}

Dataset load_test_set(const ModelFile& model, const std::filesystem::path& path) {
  return load_ucr(path, &model.label_map);
}

SparsityReport sparsity_report(const ModelFile& model) {
  SparsityReport r;
  for (const auto& term : model.ensemble.terms) {
    if (term.weight == 0.0) continue;
    ++r.active_terms;
    r.nonzero_alpha += term.hypothesis.alpha.size();
  }
  if (r.active_terms == 0) fail(ErrorCode::kEmptyModel, "model has no active terms");
  r.alpha_denominator =
      r.active_terms * model.train_instances * model.patterns_per_instance;
  r.percent = r.alpha_denominator == 0
                  ? 0.0
                  : 100.0 * static_cast<double>(r.nonzero_alpha) /
                        static_cast<double>(r.alpha_denominator);
  return r;
}

std::vector<PatternRecord> pattern_report(const ModelFile& model,
                                          const TimeSeries& series) {
  const TimeSeries view = model_view(model, series);
  const std::size_t ell = model.ensemble.hyper.pattern_length;
  const std::size_t q = view.length() - ell + 1;
  std::vector<PatternRecord> out;
  for (std::size_t t = 0; t < model.ensemble.terms.size(); ++t) {
    const auto& term = model.ensemble.terms[t];
    for (const auto& e : term.hypothesis.alpha) {
      PatternRecord rec;
      rec.term = t;
      rec.key = e.key;
      rec.contribution = term.weight * e.value;
      const auto p = model.patterns.pattern(e.key);
      rec.pattern.assign(p.begin(), p.end());
      double best = std::numeric_limits<double>::infinity();
      for (std::size_t j = 0; j < q; ++j) {
        double s = 0.0;
        for (std::size_t u = 0; u < ell; ++u) {
          const double diff = p[u] - view.values[j + u];
          s += diff * diff;
        }
        if (s < best) {
          best = s;
          rec.best_offset = j;
        }
      }
      rec.distance = std::sqrt(best);
      out.push_back(std::move(rec));
    }
  }
  return out;
}

void write_pattern_csv(std::ostream& out, const std::vector<PatternRecord>& records) {
  out << "term,instance,offset,contribution,best_offset,distance,pattern\n";
  for (const auto& r : records) {
    out << r.term + 1 << ',' << r.key.instance + 1 << ',' << r.key.offset + 1 << ','
        << fmt(r.contribution) << ',' << r.best_offset + 1 << ',' << fmt(r.distance)
        << ',';
    for (std::size_t u = 0; u < r.pattern.size(); ++u) {
      out << (u ? ";" : "") << fmt(r.pattern[u]);
    }
    out << '\n';
  }
}

void write_pattern_svg(std::ostream& out, const TimeSeries& series,
                       const std::vector<PatternRecord>& records) {
  constexpr double kWidth = 800.0, kHeight = 300.0, kMargin = 20.0;
  const std::size_t n = series.length();
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (double v : series.values) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  for (const auto& r : records) {
    for (double v : r.pattern) {
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
  }
  if (!(hi > lo)) {
    lo -= 1.0;
    hi += 1.0;
  }
  const auto px = [&](double idx) {
    return kMargin + idx * (kWidth - 2 * kMargin) / std::max<double>(1.0, n - 1.0);
  };
  const auto py = [&](double v) {
    return kHeight - kMargin - (v - lo) * (kHeight - 2 * kMargin) / (hi - lo);
  };
  std::ostringstream s;
  s.setf(std::ios::fixed);
  s.precision(2);
  s << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth
    << "\" height=\"" << kHeight << "\" viewBox=\"0 0 " << kWidth << ' ' << kHeight
    << "\">\n";
  s << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  s << "<polyline fill=\"none\" stroke=\"black\" stroke-width=\"1.5\" points=\"";
  for (std::size_t i = 0; i < n; ++i) {
    s << (i ? " " : "") << px(static_cast<double>(i)) << ',' << py(series.values[i]);
  }
  s << "\"/>\n";
  for (const auto& r : records) {
    s << "<polyline fill=\"none\" stroke=\""
      << (r.contribution > 0.0 ? "red" : "blue")
      << "\" stroke-width=\"2.5\" stroke-opacity=\"0.7\" points=\"";
    for (std::size_t u = 0; u < r.pattern.size(); ++u) {
      s << (u ? " " : "") << px(static_cast<double>(r.best_offset + u)) << ','
        << py(r.pattern[u]);
    }
    s << "\"><title>term " << r.term + 1 << " pattern (" << r.key.instance + 1
      << ", " << r.key.offset + 1 << ") contribution " << fmt(r.contribution)
      << "</title></polyline>\n";
  }
  s << "</svg>\n";
  out << s.str();
}

ProtocolResult run_protocol(const Dataset& train, const Dataset& test,
                            const GridSpec& grid, const TrainSettings& settings,
                            std::ostream* log) {
  if (!(test.label_map == train.label_map)) {
    fail(ErrorCode::kInvalidInput, "test set uses a different label map");
  }
  ProtocolResult out;
  out.grid = grid_search(train, grid, settings, log);
  out.chosen = out.grid.cells[out.grid.best];
  out.outcome = train_model(train, out.chosen.pattern_length, out.chosen.nu, settings);
  out.test_accuracy = evaluate(out.outcome.model, test);
  out.invariants = out.grid.invariants;
  out.invariants.merge(check_invariants(out.outcome.result));
  return out;
}

}  // namespace shapeboost
