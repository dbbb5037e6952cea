// gfselect: joint feature selection via a cutting-plane Fisher-criterion
// solver, with filter baselines and a 1-NN benchmark harness.

#include <chrono>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <iostream>
#include <numeric>
#include <sstream>

#include <CLI11.hpp>

#include "gfs/errors.hpp"
#include "gfs/io.hpp"
#include "gfs/version.hpp"

namespace {

using gfs::io::RunConfig;

std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

gfs::io::LoadedData load(const RunConfig& cfg) {
  if (cfg.format == gfs::io::DataFormat::csv) return gfs::io::load_csv(cfg.data_path, cfg.label_col);
  return gfs::io::load_libsvm(cfg.data_path);
}

gfs::MethodSpec method_spec_from_config(const RunConfig& cfg, const std::string& method) {
  gfs::MethodSpec spec;
  if (method == "gfs")
    spec.kind = gfs::MethodSpec::Kind::gfs;
  else if (method == "fisher")
    spec.kind = gfs::MethodSpec::Kind::fisher;
  else if (method == "laplacian")
    spec.kind = gfs::MethodSpec::Kind::laplacian;
  else if (method == "hsic")
    spec.kind = gfs::MethodSpec::Kind::hsic;
  else if (method == "all")
    spec.kind = gfs::MethodSpec::Kind::all_features;
  else
    throw gfs::ConfigError("unknown method: " + method);
  if (cfg.gamma) spec.gfs.gamma = *cfg.gamma;
  spec.gamma_grid = cfg.gamma_grid;
  spec.cv_folds = cfg.folds;
  return spec;
}

gfs::io::ResultsDocument make_document(const RunConfig& cfg,
                                       const gfs::io::LoadedData& data) {
  gfs::io::ResultsDocument doc;
  doc.schema_version = gfs::kResultsSchemaVersion;
  doc.tool_name = gfs::kToolName;
  doc.tool_version = gfs::kToolVersion;
  doc.timestamp = utc_timestamp();
  doc.config = cfg;
  doc.label_names = data.label_names;
  return doc;
}

void emit_document(gfs::io::ResultsDocument& doc, double wall_seconds) {
  doc.wall_clock_seconds = wall_seconds;
  if (!doc.config.out_path.empty()) {
    gfs::io::write_results(doc, doc.config.out_path);
  }
}

int run_select(const RunConfig& cfg) {
  const auto start = std::chrono::steady_clock::now();
  const gfs::io::LoadedData data = load(cfg);
  const gfs::MethodSpec spec = method_spec_from_config(cfg, cfg.method);

  // fit on the whole set: select is a one-shot selection, not a benchmark
  const gfs::Standardizer st = gfs::fit_standardizer(data.ds);
  const gfs::Dataset standardized = gfs::apply_standardizer(st, data.ds);

  double gamma = spec.gfs.gamma;
  if (spec.kind == gfs::MethodSpec::Kind::gfs && !cfg.gamma_grid.empty())
    gamma = gfs::cross_validate_gamma(standardized, cfg.gamma_grid, cfg.folds, cfg.num_features,
                                      spec.gfs, cfg.seed);

  gfs::SolverTrace trace;
  gfs::TrialResult trial;
  trial.selected_features = gfs::select_features_for_method(
      standardized, spec, cfg.num_features, gamma,
      spec.kind == gfs::MethodSpec::Kind::gfs ? &trace : nullptr);
  trial.gamma_used = spec.kind == gfs::MethodSpec::Kind::gfs ? gamma : 0.0;
  if (spec.kind == gfs::MethodSpec::Kind::gfs) trial.trace = trace;

  std::cout << "method: " << cfg.method << "\nselected:";
  for (int j : trial.selected_features) std::cout << ' ' << j;
  std::cout << '\n';
  if (!data.ds.feature_names.empty()) {
    std::cout << "names:";
    for (int j : trial.selected_features)
      std::cout << ' ' << data.ds.feature_names[static_cast<std::size_t>(j)];
    std::cout << '\n';
  }
  if (spec.kind == gfs::MethodSpec::Kind::gfs)
    std::cout << "gamma: " << gfs::io::format_double(gamma) << '\n';

  gfs::io::ResultsDocument doc = make_document(cfg, data);
  gfs::AggregateResult agg;
  agg.method = cfg.method;
  agg.trials.push_back(std::move(trial));
  doc.results.push_back(std::move(agg));
  emit_document(doc, std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count());
  return 0;
}

int run_bench(const RunConfig& cfg, const std::vector<std::string>& methods) {
  const auto start = std::chrono::steady_clock::now();
  const gfs::io::LoadedData data = load(cfg);

  gfs::io::ResultsDocument doc = make_document(cfg, data);
  std::printf("%-10s %8s %8s\n", "method", "mean%", "std%");
  for (const std::string& method : methods) {
    const gfs::MethodSpec spec = method_spec_from_config(cfg, method);
    gfs::AggregateResult agg = gfs::run_trials(data.ds, spec, cfg.trials, cfg.train_frac,
                                               cfg.num_features, cfg.seed);
    std::printf("%-10s %8.2f %8.2f\n", agg.method.c_str(), 100.0 * agg.mean_accuracy,
                100.0 * agg.std_accuracy);
    std::fflush(stdout);
    doc.results.push_back(std::move(agg));
  }
  emit_document(doc, std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count());
  return 0;
}

int run_curve(const RunConfig& cfg, int k_step) {
  const auto start = std::chrono::steady_clock::now();
  const gfs::io::LoadedData data = load(cfg);

  std::vector<int> k_values;
  for (int k = k_step; k <= cfg.num_features; k += k_step) k_values.push_back(k);
  if (k_values.empty() || k_values.back() != cfg.num_features)
    k_values.push_back(cfg.num_features);

  std::vector<gfs::MethodSpec> specs;
  if (cfg.method == "every") {
    for (const char* m : {"gfs", "fisher", "laplacian", "hsic"})
      specs.push_back(method_spec_from_config(cfg, m));
  } else {
    specs.push_back(method_spec_from_config(cfg, cfg.method));
  }

  const std::vector<gfs::io::CurveRow> rows =
      gfs::io::emit_curve(data.ds, specs, k_values, cfg.trials, cfg.train_frac, cfg.seed);
  if (!cfg.out_path.empty()) {
    std::ofstream os(cfg.out_path);
    if (!os) throw gfs::DataError("cannot write " + cfg.out_path);
    gfs::io::write_curve_table(rows, os);
  } else {
    gfs::io::write_curve_table(rows, std::cout);
  }
  std::cerr << "curve completed in "
            << std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count()
            << " s\n";
  return 0;
}

int run_trace(const RunConfig& cfg) {
  const gfs::io::LoadedData data = load(cfg);
  const gfs::Standardizer st = gfs::fit_standardizer(data.ds);
  const gfs::Dataset standardized = gfs::apply_standardizer(st, data.ds);
  const gfs::Dataset centered = gfs::center_columns(standardized);

  gfs::GfsConfig solver_cfg;
  solver_cfg.gamma = cfg.gamma.value_or(100.0);
  solver_cfg.m = cfg.num_features;
  const gfs::GfsResult result = gfs::cutting_plane(centered, solver_cfg);

  std::ostream* os = &std::cout;
  std::ofstream file;
  if (!cfg.out_path.empty()) {
    file.open(cfg.out_path);
    if (!file) throw gfs::DataError("cannot write " + cfg.out_path);
    os = &file;
  }
  *os << "t\ttheta\tlower\tupper\tinner_iterations\tinner_objective\n";
  for (std::size_t t = 0; t < result.trace.entries.size(); ++t) {
    const gfs::TraceEntry& e = result.trace.entries[t];
    *os << (t + 1) << '\t' << gfs::io::format_double(e.theta) << '\t'
        << gfs::io::format_double(e.lower) << '\t' << gfs::io::format_double(e.upper) << '\t'
        << e.inner_iterations << '\t' << gfs::io::format_double(e.inner_objective) << '\n';
  }
  std::vector<int> sel = gfs::selected_features(result.omega);
  std::cerr << "selected union:";
  for (int j : sel) std::cerr << ' ' << j;
  std::cerr << '\n';
  return 0;
}

void add_common_flags(CLI::App* cmd, RunConfig& cfg, std::string& format, double& gamma_value) {
  cmd->add_option("--data", cfg.data_path, "input data file")->required();
  cmd->add_option("--format", format, "data format: csv or libsvm")
      ->check(CLI::IsMember({"csv", "libsvm"}));
  cmd->add_option("--label-col", cfg.label_col,
                  "csv label column (header name, or 0-based position)");
  cmd->add_option("--num-features", cfg.num_features, "number of features to select");
  cmd->add_option("--gamma", gamma_value, "ridge regularization for gfs");
  cmd->add_option("--gamma-grid", cfg.gamma_grid,
                  "gamma grid for 5-fold cross validation (comma separated)")
      ->delimiter(',');
  cmd->add_option("--trials", cfg.trials, "number of random-split trials");
  cmd->add_option("--train-frac", cfg.train_frac, "training fraction of each split");
  cmd->add_option("--seed", cfg.seed, "random seed");
  cmd->add_option("--folds", cfg.folds, "cross-validation folds");
  cmd->add_option("--out", cfg.out_path, "output file");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{std::string(gfs::kToolName) + " " + gfs::kToolVersion +
               " - generalized Fisher score feature selection"};
  app.require_subcommand(1);

  RunConfig cfg;
  std::string format = "csv";
  std::string bench_methods = "gfs,fisher,laplacian,hsic,all";
  double gamma_value = 0.0;
  int k_step = 0;

  CLI::App* select = app.add_subcommand("select", "select features once on the full data set");
  CLI::App* bench = app.add_subcommand("bench", "trial protocol over all methods");
  CLI::App* curve = app.add_subcommand("curve", "accuracy versus number of selected features");
  CLI::App* trace = app.add_subcommand("trace", "dump solver bounds per iteration");

  for (CLI::App* cmd : {select, bench, curve, trace})
    add_common_flags(cmd, cfg, format, gamma_value);
  select->add_option("--method", cfg.method, "gfs | fisher | laplacian | hsic | all");
  bench->add_option("--methods", bench_methods, "comma separated method list");
  curve->add_option("--method", cfg.method, "single method or 'every'");
  curve->add_option("--k-step", k_step, "spacing of the k sweep (default: ~10 points)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    cfg.format = format == "csv" ? gfs::io::DataFormat::csv : gfs::io::DataFormat::libsvm;
    for (CLI::App* cmd : {select, bench, curve, trace})
      if (cmd->parsed() && cmd->count("--gamma") > 0) cfg.gamma = gamma_value;
    if (select->parsed()) {
      cfg.validate();
      return run_select(cfg);
    }
    if (bench->parsed()) {
      std::vector<std::string> methods;
      std::stringstream ss(bench_methods);
      std::string tok;
      while (std::getline(ss, tok, ',')) {
        if (!tok.empty()) methods.push_back(tok);
      }
      if (methods.empty()) throw gfs::ConfigError("empty method list");
      for (const std::string& m : methods) {
        RunConfig check = cfg;
        check.method = m;
        check.validate();
      }
      return run_bench(cfg, methods);
    }
    if (curve->parsed()) {
      if (cfg.method == "every") {
        RunConfig check = cfg;
        check.method = "gfs";  // the sweep includes gfs, so its gamma rules apply
        check.validate();
      } else {
        cfg.validate();
      }
      if (k_step <= 0) k_step = std::max(1, cfg.num_features / 10);
      return run_curve(cfg, k_step);
    }
    if (trace->parsed()) {
      cfg.method = "gfs";
      if (!cfg.gamma && cfg.gamma_grid.empty()) cfg.gamma = 100.0;
      if (cfg.gamma) cfg.validate();
      return run_trace(cfg);
    }
  } catch (const gfs::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const gfs::DataError& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return 3;
  } catch (const gfs::SolverError& e) {
    std::cerr << "solver error: " << e.what() << '\n';
    return 4;
  }
  return 2;
}
