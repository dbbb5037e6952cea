#include "gfs/io.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <ctime>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include <json.hpp>

#include "gfs/errors.hpp"
#include "gfs/version.hpp"

namespace gfs::io {

using nlohmann::json;

std::string format_double(double x) {
  char buf[40];
  const auto res = std::to_chars(buf, buf + sizeof(buf), x);
  return std::string(buf, res.ptr);
}

void RunConfig::validate() const {
  static const std::vector<std::string> kMethods = {"gfs", "fisher", "laplacian", "hsic", "all"};
  if (std::find(kMethods.begin(), kMethods.end(), method) == kMethods.end())
    throw ConfigError("unknown method: " + method);
  if (num_features < 1) throw ConfigError("num-features must be >= 1");
  if (trials < 1) throw ConfigError("trials must be >= 1");
  if (!(train_frac > 0.0 && train_frac < 1.0)) throw ConfigError("train-frac must be in (0, 1)");
  if (folds < 2) throw ConfigError("folds must be >= 2");
  if (method == "gfs") {
    const int supplied = (gamma.has_value() ? 1 : 0) + (gamma_grid.empty() ? 0 : 1);
    if (supplied != 1)
      throw ConfigError("gfs needs exactly one of --gamma or --gamma-grid");
  }
  for (double g : gamma_grid)
    if (!(g > 0.0)) throw ConfigError("gamma grid values must be positive");
  if (gamma && !(*gamma > 0.0)) throw ConfigError("gamma must be positive");
}

namespace {

double parse_double_cell(const std::string& cell, std::size_t line_no, const std::string& what) {
  double value = 0.0;
  const char* first = cell.data();
  const char* last = cell.data() + cell.size();
  const auto res = std::from_chars(first, last, value);
  if (res.ec != std::errc() || res.ptr != last)
    throw DataError("line " + std::to_string(line_no) + ": " + what + " is not numeric: '" +
                    cell + "'");
  return value;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cur;
  for (char ch : line) {
    if (ch == ',') {
      cells.push_back(trim(cur));
      cur.clear();
    } else {
      cur += ch;
    }
  }
  cells.push_back(trim(cur));
  return cells;
}

int map_label(const std::string& token, std::vector<std::string>& names,
              std::map<std::string, int>& index) {
  const auto it = index.find(token);
  if (it != index.end()) return it->second;
  names.push_back(token);
  const int id = static_cast<int>(names.size());
  index.emplace(token, id);
  return id;
}

}  // namespace

LoadedData load_csv(const std::string& path, const std::string& label_spec) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path);

  std::string line;
  if (!std::getline(in, line)) throw DataError(path + " is empty");
  const std::vector<std::string> header = split_csv_line(line);

  int label_idx = -1;
  for (std::size_t i = 0; i < header.size(); ++i)
    if (header[i] == label_spec) label_idx = static_cast<int>(i);
  if (label_idx < 0) {
    int pos = 0;
    const auto res = std::from_chars(label_spec.data(), label_spec.data() + label_spec.size(), pos);
    if (res.ec == std::errc() && res.ptr == label_spec.data() + label_spec.size() && pos >= 0 &&
        static_cast<std::size_t>(pos) < header.size()) {
      label_idx = pos;
    }
  }
  if (label_idx < 0) throw DataError("label column '" + label_spec + "' not found in header");

  std::vector<std::string> feature_names;
  for (std::size_t i = 0; i < header.size(); ++i)
    if (static_cast<int>(i) != label_idx) feature_names.push_back(header[i]);

  std::vector<std::vector<double>> rows;  // per sample
  std::vector<int> labels;
  std::vector<std::string> label_names;
  std::map<std::string, int> label_index;

  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const std::vector<std::string> cells = split_csv_line(line);
    if (cells.size() != header.size())
      throw DataError("line " + std::to_string(line_no) + ": expected " +
                      std::to_string(header.size()) + " cells, got " +
                      std::to_string(cells.size()));
    const std::string& label_cell = cells[static_cast<std::size_t>(label_idx)];
    if (label_cell.empty())
      throw DataError("line " + std::to_string(line_no) + ": missing label");
    labels.push_back(map_label(label_cell, label_names, label_index));
    std::vector<double> sample;
    sample.reserve(cells.size() - 1);
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (static_cast<int>(i) == label_idx) continue;
      sample.push_back(parse_double_cell(cells[i], line_no, "feature '" + header[i] + "'"));
    }
    rows.push_back(std::move(sample));
  }
  if (rows.empty()) throw DataError(path + " has no data rows");

  const std::size_t d = feature_names.size();
  const std::size_t n = rows.size();
  la::Matrix features(d, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < d; ++j) features(j, i) = rows[i][j];

  LoadedData out;
  out.ds = Dataset::create(std::move(features), std::move(labels), std::move(feature_names));
  out.label_names = std::move(label_names);
  return out;
}

LoadedData load_libsvm(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path);

  struct Entry {
    int idx;
    double val;
  };
  std::vector<std::vector<Entry>> samples;
  std::vector<int> labels;
  std::vector<std::string> label_names;
  std::map<std::string, int> label_index;
  int max_idx = 0;

  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    std::istringstream ls(line);
    std::string token;
    if (!(ls >> token)) continue;
    labels.push_back(map_label(token, label_names, label_index));

    std::vector<Entry> entries;
    int prev_idx = 0;
    while (ls >> token) {
      const auto colon = token.find(':');
      if (colon == std::string::npos)
        throw DataError("line " + std::to_string(line_no) + ": expected idx:val, got '" + token +
                        "'");
      int idx = 0;
      const auto ires = std::from_chars(token.data(), token.data() + colon, idx);
      if (ires.ec != std::errc() || ires.ptr != token.data() + colon || idx < 1)
        throw DataError("line " + std::to_string(line_no) + ": bad feature index in '" + token +
                        "'");
      if (idx <= prev_idx)
        throw DataError("line " + std::to_string(line_no) +
                        ": feature indices must be strictly ascending");
      prev_idx = idx;
      const double val =
          parse_double_cell(token.substr(colon + 1), line_no, "value of index " +
                                                                 std::to_string(idx));
      entries.push_back({idx, val});
      max_idx = std::max(max_idx, idx);
    }
    samples.push_back(std::move(entries));
  }
  if (samples.empty()) throw DataError(path + " has no data rows");
  if (max_idx == 0) throw DataError(path + " contains no feature entries");

  la::Matrix features(static_cast<std::size_t>(max_idx), samples.size());
  for (std::size_t i = 0; i < samples.size(); ++i)
    for (const Entry& e : samples[i])
      features(static_cast<std::size_t>(e.idx - 1), i) = e.val;

  LoadedData out;
  out.ds = Dataset::create(std::move(features), std::move(labels));
  out.label_names = std::move(label_names);
  return out;
}

void write_csv(const LoadedData& data, const std::string& path, const std::string& label_col) {
  std::ofstream os(path);
  if (!os) throw DataError("cannot write " + path);
  const Dataset& ds = data.ds;
  for (std::size_t j = 0; j < ds.dim(); ++j) {
    os << (ds.feature_names.empty() ? "f" + std::to_string(j) : ds.feature_names[j]) << ',';
  }
  os << label_col << '\n';
  for (std::size_t i = 0; i < ds.samples(); ++i) {
    for (std::size_t j = 0; j < ds.dim(); ++j) os << format_double(ds.features(j, i)) << ',';
    os << data.label_names[static_cast<std::size_t>(ds.labels[i] - 1)] << '\n';
  }
}

void write_libsvm(const LoadedData& data, const std::string& path) {
  std::ofstream os(path);
  if (!os) throw DataError("cannot write " + path);
  const Dataset& ds = data.ds;
  for (std::size_t i = 0; i < ds.samples(); ++i) {
    os << data.label_names[static_cast<std::size_t>(ds.labels[i] - 1)];
    for (std::size_t j = 0; j < ds.dim(); ++j) {
      const double v = ds.features(j, i);
      if (v != 0.0) os << ' ' << (j + 1) << ':' << format_double(v);
    }
    os << '\n';
  }
}

namespace {

const char* reason_name(StopReason r) {
  switch (r) {
    case StopReason::duplicate_constraint: return "duplicate_constraint";
    case StopReason::small_gap: return "small_gap";
    case StopReason::iteration_limit: return "iteration_limit";
  }
  return "?";
}

StopReason reason_from_name(const std::string& s) {
  if (s == "duplicate_constraint") return StopReason::duplicate_constraint;
  if (s == "small_gap") return StopReason::small_gap;
  if (s == "iteration_limit") return StopReason::iteration_limit;
  throw DataError("unknown stop reason: " + s);
}

json config_to_json(const RunConfig& c) {
  json j;
  j["data"] = c.data_path;
  j["format"] = c.format == DataFormat::csv ? "csv" : "libsvm";
  j["label_col"] = c.label_col;
  j["method"] = c.method;
  j["num_features"] = c.num_features;
  if (c.gamma)
    j["gamma"] = *c.gamma;
  else
    j["gamma"] = nullptr;
  j["gamma_grid"] = c.gamma_grid;
  j["trials"] = c.trials;
  j["train_frac"] = c.train_frac;
  j["seed"] = c.seed;
  j["folds"] = c.folds;
  j["out"] = c.out_path;
  return j;
}

json trace_to_json(const SolverTrace& trace) {
  json entries = json::array();
  for (const TraceEntry& e : trace.entries) {
    json je;
    je["constraint"] = e.chosen.indices();
    je["theta"] = e.theta;
    je["lower"] = e.lower;
    je["upper"] = e.upper;
    je["inner_iterations"] = e.inner_iterations;
    je["inner_objective"] = e.inner_objective;
    entries.push_back(std::move(je));
  }
  return json{{"reason", reason_name(trace.reason)}, {"iterations", std::move(entries)}};
}

json result_to_json(const AggregateResult& r) {
  json trials = json::array();
  for (const TrialResult& t : r.trials) {
    json jt;
    jt["trial_index"] = t.trial_index;
    jt["selected_features"] = t.selected_features;
    jt["accuracy"] = t.accuracy;
    jt["gamma_used"] = t.gamma_used;
    if (t.trace) jt["trace"] = trace_to_json(*t.trace);
    trials.push_back(std::move(jt));
  }
  return json{{"method", r.method},
              {"mean_accuracy", r.mean_accuracy},
              {"std_accuracy", r.std_accuracy},
              {"trials", std::move(trials)}};
}

const json& require_field(const json& j, const char* name, const char* context) {
  const auto it = j.find(name);
  if (it == j.end())
    throw DataError(std::string("results document: missing field '") + name + "' in " + context);
  return *it;
}

void warn_unknown(const json& j, const std::vector<std::string>& known, const char* context) {
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (std::find(known.begin(), known.end(), it.key()) == known.end())
      std::cerr << "warning: ignoring unknown field '" << it.key() << "' in " << context << "\n";
  }
}

}  // namespace

std::string results_to_string(const ResultsDocument& doc) {
  json j;
  j["schema_version"] = doc.schema_version;
  j["tool"] = json{{"name", doc.tool_name}, {"version", doc.tool_version}};
  j["timestamp"] = doc.timestamp;
  j["wall_clock_seconds"] = doc.wall_clock_seconds;
  j["config"] = config_to_json(doc.config);
  j["label_names"] = doc.label_names;
  json results = json::array();
  for (const AggregateResult& r : doc.results) results.push_back(result_to_json(r));
  j["results"] = std::move(results);
  return j.dump(2) + "\n";
}

void write_results(const ResultsDocument& doc, const std::string& path) {
  std::ofstream os(path);
  if (!os) throw DataError("cannot write " + path);
  os << results_to_string(doc);
}

ResultsDocument parse_results(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw DataError(std::string("results document is not valid JSON: ") + e.what());
  }

  warn_unknown(j, {"schema_version", "tool", "timestamp", "wall_clock_seconds", "config",
                   "label_names", "results"},
               "document");

  ResultsDocument doc;
  doc.schema_version = require_field(j, "schema_version", "document").get<int>();
  if (doc.schema_version != kResultsSchemaVersion)
    throw DataError("results schema version " + std::to_string(doc.schema_version) +
                    " is not supported (expected " + std::to_string(kResultsSchemaVersion) + ")");

  const json& tool = require_field(j, "tool", "document");
  doc.tool_name = require_field(tool, "name", "tool").get<std::string>();
  doc.tool_version = require_field(tool, "version", "tool").get<std::string>();
  doc.timestamp = require_field(j, "timestamp", "document").get<std::string>();
  doc.wall_clock_seconds = require_field(j, "wall_clock_seconds", "document").get<double>();

  const json& cfg = require_field(j, "config", "document");
  doc.config.data_path = require_field(cfg, "data", "config").get<std::string>();
  const std::string fmt = require_field(cfg, "format", "config").get<std::string>();
  if (fmt == "csv")
    doc.config.format = DataFormat::csv;
  else if (fmt == "libsvm")
    doc.config.format = DataFormat::libsvm;
  else
    throw DataError("unknown data format: " + fmt);
  doc.config.label_col = require_field(cfg, "label_col", "config").get<std::string>();
  doc.config.method = require_field(cfg, "method", "config").get<std::string>();
  doc.config.num_features = require_field(cfg, "num_features", "config").get<int>();
  const json& g = require_field(cfg, "gamma", "config");
  if (!g.is_null()) doc.config.gamma = g.get<double>();
  doc.config.gamma_grid = require_field(cfg, "gamma_grid", "config").get<std::vector<double>>();
  doc.config.trials = require_field(cfg, "trials", "config").get<int>();
  doc.config.train_frac = require_field(cfg, "train_frac", "config").get<double>();
  doc.config.seed = require_field(cfg, "seed", "config").get<std::uint64_t>();
  doc.config.folds = require_field(cfg, "folds", "config").get<int>();
  doc.config.out_path = require_field(cfg, "out", "config").get<std::string>();

  doc.label_names = require_field(j, "label_names", "document").get<std::vector<std::string>>();

  for (const json& jr : require_field(j, "results", "document")) {
    warn_unknown(jr, {"method", "mean_accuracy", "std_accuracy", "trials"}, "result");
    AggregateResult r;
    r.method = require_field(jr, "method", "result").get<std::string>();
    r.mean_accuracy = require_field(jr, "mean_accuracy", "result").get<double>();
    r.std_accuracy = require_field(jr, "std_accuracy", "result").get<double>();
    for (const json& jt : require_field(jr, "trials", "result")) {
      TrialResult t;
      t.trial_index = require_field(jt, "trial_index", "trial").get<int>();
      t.selected_features =
          require_field(jt, "selected_features", "trial").get<std::vector<int>>();
      t.accuracy = require_field(jt, "accuracy", "trial").get<double>();
      t.gamma_used = require_field(jt, "gamma_used", "trial").get<double>();
      if (jt.contains("trace")) {
        const json& jtr = jt["trace"];
        SolverTrace trace;
        trace.reason = reason_from_name(require_field(jtr, "reason", "trace").get<std::string>());
        for (const json& je : require_field(jtr, "iterations", "trace")) {
          TraceEntry e;
          const auto idx = require_field(je, "constraint", "trace entry").get<std::vector<int>>();
          e.theta = require_field(je, "theta", "trace entry").get<double>();
          e.lower = require_field(je, "lower", "trace entry").get<double>();
          e.upper = require_field(je, "upper", "trace entry").get<double>();
          e.inner_iterations = require_field(je, "inner_iterations", "trace entry").get<int>();
          e.inner_objective = require_field(je, "inner_objective", "trace entry").get<double>();
          // constraint length is not recorded; rebuild against the max index
          int maxi = -1;
          for (int v : idx) maxi = std::max(maxi, v);
          e.chosen = SelectionIndicator::from_indices(static_cast<std::size_t>(maxi + 1), idx);
          trace.entries.push_back(std::move(e));
        }
        t.trace = std::move(trace);
      }
      r.trials.push_back(std::move(t));
    }
    doc.results.push_back(std::move(r));
  }
  return doc;
}

ResultsDocument read_results(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_results(ss.str());
}

std::vector<CurveRow> emit_curve(const Dataset& ds, const std::vector<MethodSpec>& methods,
                                 const std::vector<int>& k_values, int trials, double train_frac,
                                 std::uint64_t seed) {
  if (k_values.empty()) throw ConfigError("curve needs at least one k value");
  for (int k : k_values)
    if (k < 1 || static_cast<std::size_t>(k) > ds.dim())
      throw ConfigError("curve k value out of range: " + std::to_string(k));

  std::vector<CurveRow> rows;
  for (const MethodSpec& method : methods) {
    for (int k : k_values) {
      const AggregateResult agg = run_trials(ds, method, trials, train_frac, k, seed);
      rows.push_back({k, agg.method, agg.mean_accuracy, agg.std_accuracy});
    }
  }
  std::sort(rows.begin(), rows.end(), [](const CurveRow& a, const CurveRow& b) {
    if (a.method != b.method) return a.method < b.method;
    return a.k < b.k;
  });
  return rows;
}

void write_curve_table(const std::vector<CurveRow>& rows, std::ostream& os) {
  os << "k\tmethod\tmean_accuracy\tstd_accuracy\n";
  for (const CurveRow& r : rows) {
    os << r.k << '\t' << r.method << '\t' << format_double(r.mean_accuracy) << '\t'
       << format_double(r.std_accuracy) << '\n';
  }
}

}  // namespace gfs::io
