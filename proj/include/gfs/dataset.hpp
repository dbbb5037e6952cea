#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "gfs/matrix.hpp"

namespace gfs {

// Feature matrix with one sample per column (d features x n samples) and
// integer class labels in 1..c.
struct Dataset {
  la::Matrix features;           // d x n
  std::vector<int> labels;       // length n, values in 1..num_classes
  int num_classes = 0;
  std::vector<std::string> feature_names;  // optional, length d when present

  std::size_t dim() const { return features.rows(); }
  std::size_t samples() const { return features.cols(); }

  // Validates shapes, label range, class coverage and finiteness.
  // num_classes is taken as the largest label.
  static Dataset create(la::Matrix features, std::vector<int> labels,
                        std::vector<std::string> feature_names = {});

  // Column subset. Keeps num_classes from the parent; the subset may
  // legitimately miss classes (e.g. the test half of a split), so no
  // coverage check happens here.
  Dataset take_samples(const std::vector<int>& idx) const;

  // Row subset; feature names follow when present.
  Dataset take_features(const std::vector<int>& idx) const;
};

struct ClassStats {
  std::vector<int> counts;      // n_k, length c
  la::Matrix class_means;       // d x c
  std::vector<double> overall_mean;  // length d
};

struct ScatterPair {
  la::Matrix between;  // S_b, d x d
  la::Matrix total;    // S_t, d x d
};

struct Standardizer {
  std::vector<double> mean;   // per feature
  std::vector<double> scale;  // per feature population std, zeros replaced by 1
};

// Per-class counts, class means and the overall sample mean.
// Throws DataError when a class in 1..num_classes has no samples.
ClassStats class_stats(const Dataset& ds);

// S_b = sum_k n_k (mu_k - mu)(mu_k - mu)^T, S_t = sum_i (x_i - mu)(x_i - mu)^T.
ScatterPair scatter_matrices(const Dataset& ds, const ClassStats& stats);

Standardizer fit_standardizer(const Dataset& train);
Dataset apply_standardizer(const Standardizer& s, const Dataset& ds);

// Shifts every feature row to zero mean across samples.
Dataset center_columns(const Dataset& ds);

// Deterministic random partition. Retries until the training side covers
// every class; throws DataError when that is impossible within the retry
// budget.
std::pair<Dataset, Dataset> split_train_test(const Dataset& ds, double train_frac,
                                             std::uint64_t seed);

}  // namespace gfs
