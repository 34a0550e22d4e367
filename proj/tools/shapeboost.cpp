#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "shapeboost/error.hpp"
#include "shapeboost/experiment.hpp"
#include "shapeboost/theory.hpp"

namespace {

using namespace shapeboost;

constexpr int kExitInvalid = 2;
constexpr int kExitInternal = 3;

struct CommonFlags {
  TrainSettings settings;
  std::string kernel = "gaussian";
};

void add_common(CLI::App* app, CommonFlags& f) {
  app->add_option("--lambda", f.settings.lambda, "norm budget")->capture_default_str();
  app->add_option("--rounds", f.settings.rounds, "boosting rounds")->capture_default_str();
  app->add_option("--dc-iters", f.settings.dc_iters, "DC iteration cap")
      ->capture_default_str();
  app->add_option("--eps", f.settings.dc_epsilon, "DC convergence gap")
      ->capture_default_str();
  app->add_option("--seed", f.settings.seed, "seed for folds and initialization")
      ->capture_default_str();
  app->add_flag("--znorm", f.settings.znorm, "z-normalize every series");
  app->add_option("--kernel", f.kernel, "gaussian or linear")
      ->check(CLI::IsMember({"gaussian", "linear"}))
      ->capture_default_str();
  app->add_option("--sigma-grid", f.settings.sigma_grid, "candidate sigma values")
      ->delimiter(',');
}

void finish_common(CommonFlags& f) {
  f.settings.kernel = kernel_kind_from_string(f.kernel);
}

template <typename Fn>
void write_file(const std::string& path, Fn&& fn) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorCode::kInvalidInput, "cannot write " + path);
  fn(out);
  if (!out) fail(ErrorCode::kInvalidInput, "failed writing " + path);
}

void print_sparsity(const ModelFile& model) {
  const SparsityReport s = sparsity_report(model);
  std::printf("active_terms %zu nonzero_alpha %zu denominator %zu percent %.6g\n",
              s.active_terms, s.nonzero_alpha, s.alpha_denominator, s.percent);
}

int run(int argc, char** argv) {
  CLI::App app{"Sparse kernelized shapelet ensembles via LPBoost"};
  app.require_subcommand(1);

  // grid
  CommonFlags grid_flags;
  GridSpec grid;
  std::string grid_train, grid_out;
  auto* grid_cmd = app.add_subcommand("grid", "cross-validated grid search");
  grid_cmd->add_option("--train", grid_train, "UCR training file")->required();
  grid_cmd->add_option("--lfrac", grid.length_fractions, "pattern length fractions")
      ->delimiter(',');
  grid_cmd->add_option("--nu", grid.nu_grid, "nu values")->delimiter(',');
  grid_cmd->add_option("--folds", grid.folds, "cross-validation folds")
      ->capture_default_str();
  grid_cmd->add_option("--out", grid_out, "CV table CSV");
  add_common(grid_cmd, grid_flags);

  // train
  CommonFlags train_flags;
  std::string train_path, model_path, trace_path;
  std::optional<double> lfrac;
  std::optional<std::size_t> length;
  double nu = 0.1;
  auto* train_cmd = app.add_subcommand("train", "train a model file");
  train_cmd->add_option("--train", train_path, "UCR training file")->required();
  auto* lfrac_opt = train_cmd->add_option("--lfrac", lfrac, "pattern length fraction");
  train_cmd->add_option("--length", length, "pattern length")->excludes(lfrac_opt);
  train_cmd->add_option("--nu", nu, "soft-margin nu")->capture_default_str();
  train_cmd->add_option("--model", model_path, "output model JSON")->required();
  train_cmd->add_option("--trace", trace_path, "boosting trace CSV");
  add_common(train_cmd, train_flags);

  // eval
  std::string eval_model, eval_test;
  auto* eval_cmd = app.add_subcommand("eval", "accuracy of a model on a test file");
  eval_cmd->add_option("--model", eval_model, "model JSON")->required();
  eval_cmd->add_option("--test", eval_test, "UCR test file")->required();

  // report
  std::string report_model, report_series, report_csv, report_svg;
  std::size_t report_index = 1;
  auto* report_cmd =
      app.add_subcommand("report", "sparsity statistics and matched patterns");
  report_cmd->add_option("--model", report_model, "model JSON")->required();
  report_cmd->add_option("--series", report_series, "UCR file holding the series");
  report_cmd->add_option("--index", report_index, "one-based row in --series")
      ->capture_default_str();
  report_cmd->add_option("--csv", report_csv, "pattern records CSV");
  report_cmd->add_option("--svg", report_svg, "pattern overlay SVG");

  // theory
  TheoryConfig theory;
  std::string theory_out;
  auto* theory_cmd = app.add_subcommand("theory", "complexity checks on random 2-D banks");
  theory_cmd->add_option("--banks", theory.banks)->capture_default_str();
  theory_cmd->add_option("--trials", theory.trials)->capture_default_str();
  theory_cmd->add_option("--directions", theory.grid_directions,
                         "direction grid size for the supremum")
      ->capture_default_str();
  theory_cmd->add_option("--lambda", theory.lambda)->capture_default_str();
  theory_cmd->add_option("--seed", theory.seed)->capture_default_str();
  theory_cmd->add_option("--out", theory_out, "theory CSV");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitInvalid;
  }

  if (*grid_cmd) {
    finish_common(grid_flags);
    grid.seed = grid_flags.settings.seed;
    const Dataset ds = load_ucr(grid_train);
    const GridResult r = grid_search(ds, grid, grid_flags.settings, &std::cerr);
    if (!grid_out.empty()) {
      write_file(grid_out, [&](std::ostream& o) { write_grid_csv(o, r); });
    } else {
      write_grid_csv(std::cout, r);
    }
    const GridCell& best = r.cells[r.best];
    std::printf("best fraction %.6g ell %zu nu %.6g cv %.6g\n", best.fraction,
                best.pattern_length, best.nu, best.mean_accuracy);
  } else if (*train_cmd) {
    finish_common(train_flags);
    const Dataset ds = load_ucr(train_path);
    std::size_t ell = 0;
    if (length) {
      ell = *length;
    } else if (lfrac) {
      ell = pattern_length_for(*lfrac, ds.series_length());
    } else {
      fail(ErrorCode::kInvalidParameter, "train needs --lfrac or --length");
    }
    const TrainOutcome out = train_model(ds, ell, nu, train_flags.settings);
    save_model(out.model, model_path);
    if (!trace_path.empty()) {
      write_file(trace_path,
                 [&](std::ostream& o) { write_trace_csv(o, out.result.trace); });
    }
    const BoostTrace& tr = out.result.trace;
    std::printf("ell %zu nu %.6g sigma %.6g rounds %zu early_stop %d gamma %.17g "
                "gap %.3g terms %zu\n",
                ell, nu, out.kernel.kind == KernelKind::kGaussian ? out.kernel.sigma : 0.0,
                tr.rounds.size(), tr.early_stop ? 1 : 0, tr.final_gamma,
                tr.duality_gap(), out.model.ensemble.terms.size());
    print_sparsity(out.model);
  } else if (*eval_cmd) {
    const ModelFile model = load_model(eval_model);
    const Dataset test = load_test_set(model, eval_test);
    const double acc = evaluate(model, test);
    std::printf("accuracy %.17g n %zu\n", acc, test.size());
  } else if (*report_cmd) {
    const ModelFile model = load_model(report_model);
    print_sparsity(model);
    if (!report_series.empty()) {
      const Dataset ds = load_test_set(model, report_series);
      if (report_index < 1 || report_index > ds.size()) {
        fail(ErrorCode::kInvalidParameter, "--index outside the series file");
      }
      const TimeSeries& series = ds.instances[report_index - 1].series;
      const auto records = pattern_report(model, series);
      if (!report_csv.empty()) {
        write_file(report_csv, [&](std::ostream& o) { write_pattern_csv(o, records); });
      } else {
        write_pattern_csv(std::cout, records);
      }
      if (!report_svg.empty()) {
        TimeSeries shown = series;
        if (model.provenance.znorm) shown.values = znormalize(shown.values);
        write_file(report_svg,
                   [&](std::ostream& o) { write_pattern_svg(o, shown, records); });
      }
    }
  } else if (*theory_cmd) {
    const auto rows = run_theory(theory);
    if (!theory_out.empty()) {
      write_file(theory_out, [&](std::ostream& o) { write_theory_csv(o, rows); });
    } else {
      write_theory_csv(std::cout, rows);
    }
    std::size_t satisfied = 0;
    for (const auto& r : rows) satisfied += r.bound_satisfied ? 1 : 0;
    std::printf("bound satisfied %zu/%zu\n", satisfied, rows.size());
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const shapeboost::Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return e.code() == shapeboost::ErrorCode::kInternal ? kExitInternal : kExitInvalid;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "internal error: %s\n", e.what());
    return kExitInternal;
  }
}
