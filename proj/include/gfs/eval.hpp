#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "gfs/baselines.hpp"
#include "gfs/dataset.hpp"
#include "gfs/solver.hpp"

namespace gfs {

// 1-NN under Euclidean distance; ties go to the smaller training index.
// queries is d x q with the same feature layout as the training set.
std::vector<int> knn1_predict(const Dataset& train, const la::Matrix& queries);

double accuracy(const std::vector<int>& predicted, const std::vector<int>& truth);

struct MethodSpec {
  enum class Kind { gfs, fisher, laplacian, hsic, all_features };
  Kind kind = Kind::fisher;
  GfsConfig gfs;                    // gamma used when gamma_grid is empty
  std::vector<double> gamma_grid;   // non-empty -> cross-validate per trial
  int cv_folds = 5;
  LaplacianParams laplacian;

  std::string name() const;
};

struct TrialResult {
  int trial_index = 0;
  std::vector<int> selected_features;  // ascending, unique
  double accuracy = 0.0;
  double gamma_used = 0.0;  // 0 for methods without gamma
  std::optional<SolverTrace> trace;
};

struct AggregateResult {
  std::string method;
  double mean_accuracy = 0.0;
  double std_accuracy = 0.0;  // population std over trials
  std::vector<TrialResult> trials;
};

// Picks the grid value with the best mean stratified-fold accuracy of the
// full select-then-1-NN pipeline; ties go to the earlier grid entry.
double cross_validate_gamma(const Dataset& train, const std::vector<double>& grid, int folds,
                            int num_features, const GfsConfig& base, std::uint64_t seed);

// Feature selection on an already standardized training set.
std::vector<int> select_features_for_method(const Dataset& train, const MethodSpec& method,
                                            int num_features, double gamma,
                                            SolverTrace* trace_out = nullptr);

// Repeated random-split protocol: split, standardize on the training
// half, select features there, score 1-NN on the held-out half.
AggregateResult run_trials(const Dataset& ds, const MethodSpec& method, int num_trials,
                           double train_frac, int num_features, std::uint64_t seed);

}  // namespace gfs
