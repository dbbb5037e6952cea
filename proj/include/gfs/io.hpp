#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "gfs/dataset.hpp"
#include "gfs/eval.hpp"

namespace gfs::io {

enum class DataFormat { csv, libsvm };

struct RunConfig {
  std::string data_path;
  DataFormat format = DataFormat::csv;
  std::string label_col = "label";  // csv only: header name, or column index
  std::string method = "gfs";       // gfs | fisher | laplacian | hsic | all
  int num_features = 1;
  std::optional<double> gamma;
  std::vector<double> gamma_grid;
  int trials = 20;
  double train_frac = 0.5;
  std::uint64_t seed = 1;
  int folds = 5;
  std::string out_path;

  void validate() const;  // throws ConfigError
};

struct LoadedData {
  Dataset ds;
  std::vector<std::string> label_names;  // original label of class k at [k-1]
};

// CSV with a header row; the label column is matched by name first, then
// treated as a 0-based position when it parses as an integer. Labels map
// to 1..c in first-appearance order.
LoadedData load_csv(const std::string& path, const std::string& label_spec);

// LibSVM-style sparse text: "label idx:val ..." with strictly ascending
// 1-based indices per line; absent entries are zero.
LoadedData load_libsvm(const std::string& path);

void write_csv(const LoadedData& data, const std::string& path,
               const std::string& label_col = "label");
void write_libsvm(const LoadedData& data, const std::string& path);

struct ResultsDocument {
  int schema_version = 0;
  std::string tool_name;
  std::string tool_version;
  std::string timestamp;          // volatile, excluded from determinism checks
  double wall_clock_seconds = 0;  // volatile
  RunConfig config;
  std::vector<std::string> label_names;
  std::vector<AggregateResult> results;
};

std::string results_to_string(const ResultsDocument& doc);
void write_results(const ResultsDocument& doc, const std::string& path);

// Unknown fields warn on stderr; a missing required field or a schema
// version mismatch is an error naming the offender.
ResultsDocument read_results(const std::string& path);
ResultsDocument parse_results(const std::string& text);

struct CurveRow {
  int k = 0;
  std::string method;
  double mean_accuracy = 0.0;
  double std_accuracy = 0.0;
};

// Accuracy-versus-k sweep over the trial protocol, sorted by (method, k).
std::vector<CurveRow> emit_curve(const Dataset& ds, const std::vector<MethodSpec>& methods,
                                 const std::vector<int>& k_values, int trials, double train_frac,
                                 std::uint64_t seed);
void write_curve_table(const std::vector<CurveRow>& rows, std::ostream& os);

// Shortest representation that parses back to the same double.
std::string format_double(double x);

}  // namespace gfs::io
