#pragma once

#include <cstdint>
#include <vector>

#include "gfs/dataset.hpp"
#include "gfs/matrix.hpp"

namespace gfs {

// Binary feature-selection indicator with exactly m bits set.
struct SelectionIndicator {
  std::vector<std::uint8_t> bits;  // length d
  int m = 0;

  static SelectionIndicator from_indices(std::size_t d, const std::vector<int>& idx);
  std::vector<int> indices() const;  // ascending
  bool operator==(const SelectionIndicator& o) const = default;
};

// Working constraint set with simplex weights.
struct ConstraintSet {
  std::vector<SelectionIndicator> constraints;
  std::vector<double> weights;  // same length, >= 0, sums to 1
};

enum class StopReason { duplicate_constraint, small_gap, iteration_limit };

struct TraceEntry {
  SelectionIndicator chosen;
  double theta = 0.0;  // -inner objective, current estimate of the QCLP value
  double lower = 0.0;
  double upper = 0.0;
  int inner_iterations = 0;
  double inner_objective = 0.0;
};

struct SolverTrace {
  std::vector<TraceEntry> entries;
  StopReason reason = StopReason::iteration_limit;
};

struct GfsConfig {
  double gamma = 100.0;
  int m = 1;
  double inner_tol = 1e-6;
  int inner_max_iter = 100;
  double outer_tol = 1e-4;
  int outer_max_iter = 50;
  double linear_solver_tol = 1e-8;

  void validate() const;  // throws ConfigError
};

struct GfsResult {
  ConstraintSet omega;
  la::Matrix v;  // n x c dual variable
  SolverTrace trace;
};

// Regression target whose entries depend only on class sizes; every
// column sums to zero.
la::Matrix build_target_matrix(const std::vector<int>& labels, int num_classes);

// s_j = ||x^j V||^2 for every feature row j.
std::vector<double> row_scores(const la::Matrix& x, const la::Matrix& v);

// f(V, p) = tr(V^T H) - 1/2 tr(V^T ((1/gamma) sum_{j in p} K_j + I) V),
// evaluated through the data rows without forming any n x n kernel.
double dual_objective(const la::Matrix& v, const SelectionIndicator& p, const la::Matrix& x,
                      const la::Matrix& h, double gamma);

// Weights each feature row by the constraint mixture and solves
// ((1/gamma) X^T D X + I) V = H. Route depends on problem size (small
// active set -> Woodbury, moderate n -> dense Cholesky, else CG); all
// routes verify the relative residual per column.
la::Matrix solve_dual_v(const la::Matrix& x, const la::Matrix& h,
                        const std::vector<double>& feature_weights, double gamma,
                        double linear_solver_tol);
la::Matrix solve_dual_v(const la::Matrix& x, const la::Matrix& h, const ConstraintSet& cs,
                        double gamma, double linear_solver_tol);

// Mixture of the per-feature constraint indicators: w_j = sum_t lambda_t p_j^t.
std::vector<double> mix_feature_weights(const ConstraintSet& cs, std::size_t d);

// Gradient of the constraint-mixture objective in V:
// H - ((1/gamma) X^T diag(w) X + I) V. Zero at the solve_dual_v solution.
la::Matrix dual_gradient_v(const la::Matrix& x, const la::Matrix& h,
                           const std::vector<double>& feature_weights, double gamma,
                           const la::Matrix& v);

// W = (1/gamma) diag(p) X V; rows outside the selection are exactly zero.
la::Matrix recover_primal_w(const la::Matrix& v, const SelectionIndicator& p, const la::Matrix& x,
                            double gamma);

// Gradient of the constraint-mixture objective with respect to the
// simplex weights: component t is -(1/2 gamma) sum_{j in p^t} s_j(V).
std::vector<double> lambda_gradient(const std::vector<SelectionIndicator>& constraints,
                                    const la::Matrix& v, const la::Matrix& x, double gamma);

// Euclidean projection onto the probability simplex (sort and threshold).
std::vector<double> project_simplex(const std::vector<double>& v);

struct InnerResult {
  la::Matrix v;
  std::vector<double> weights;
  double objective = 0.0;  // min over lambda of max over V of the mixture
  int iterations = 0;
};

// Alternates the closed-form V solve with a projected-gradient step on
// the simplex weights (Armijo backtracking) until the objective settles.
// initial_weights, when given, overrides the uniform start.
InnerResult inner_mkl(const std::vector<SelectionIndicator>& constraints, const la::Matrix& x,
                      const la::Matrix& h, double gamma, const GfsConfig& cfg,
                      const std::vector<double>* initial_weights = nullptr);

// Indicator of the m largest s_j, ties to the smaller index.
SelectionIndicator most_violated(const la::Matrix& v, const la::Matrix& x, int m);
SelectionIndicator top_m_indicator(const std::vector<double>& scores, int m);

// Cutting-plane driver. Expects column-centered data.
GfsResult cutting_plane(const Dataset& ds, const GfsConfig& cfg);

// Union of the selected bits across all working constraints, ascending.
std::vector<int> selected_features(const ConstraintSet& cs);

struct SelectKResult {
  std::vector<int> selected;  // exactly k indices, ascending
  int final_m = 0;
  SolverTrace trace;  // trace of the final m run
};

// Grows m until the constraint union reaches k features; an overshoot is
// truncated by the final row scores (descending, ties to smaller index).
SelectKResult select_k_features_detailed(const Dataset& ds, double gamma, int k,
                                         const GfsConfig& base = {});
std::vector<int> select_k_features(const Dataset& ds, double gamma, int k,
                                   const GfsConfig& base = {});

// tr(S_b (S_t + gamma I)^{-1}) restricted to the selected feature rows.
double evaluate_criterion_ratio_trace(const Dataset& ds, const SelectionIndicator& p,
                                      double gamma);

}  // namespace gfs
