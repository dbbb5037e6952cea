#pragma once

#include <vector>

#include "gfs/dataset.hpp"

namespace gfs {

enum class ScoreMethod { fisher, laplacian, hsic };

// true when a larger score marks a better feature
bool higher_is_better(ScoreMethod m);
const char* method_name(ScoreMethod m);

struct ScoreVector {
  std::vector<double> scores;  // length d, may contain +infinity, never NaN
  ScoreMethod method;
};

// Per-feature ratio of between-class mean separation to the summed
// within-class population variances. Zero denominator with positive
// numerator gives +infinity; zero over zero gives 0.
ScoreVector fisher_scores(const Dataset& ds);

struct LaplacianParams {
  int k_neighbors = 5;
  double heat_bandwidth = 0.0;  // <= 0 selects the mean squared pairwise distance
};

// Laplacian score on a symmetrized k-NN graph with heat kernel weights.
// Smaller is better. Constant features score +infinity (no local
// structure to preserve).
ScoreVector laplacian_scores(const Dataset& ds, const LaplacianParams& params = {});

// Biased HSIC estimate with linear kernels on both the feature and the
// one-hot labels: trace(C K_j C L) / (n-1)^2. Larger is better.
ScoreVector hsic_scores(const Dataset& ds);

// Indices of the m best features under the method's direction, ties
// broken by smaller index, output sorted ascending.
std::vector<int> top_m(const ScoreVector& sv, int m);

}  // namespace gfs
