#include "gfs/eval.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "gfs/errors.hpp"
#include "gfs/kernels.hpp"
#include "gfs/rng.hpp"

namespace gfs {

std::vector<int> knn1_predict(const Dataset& train, const la::Matrix& queries) {
  if (queries.rows() != train.dim()) throw DataError("query dimension mismatch");
  const std::size_t n = train.samples();
  const std::size_t q = queries.cols();
  const std::size_t d = train.dim();

  // contiguous per-sample rows for the distance kernel
  const la::Matrix train_t = la::transpose(train.features);
  const la::Matrix query_t = la::transpose(queries);

  std::vector<int> labels(q);
  for (std::size_t i = 0; i < q; ++i) {
    double best = std::numeric_limits<double>::infinity();
    std::size_t best_idx = 0;
    for (std::size_t j = 0; j < n; ++j) {
      const double dist = kernels::sqdist(query_t.row(i), train_t.row(j), d);
      if (dist < best) {
        best = dist;
        best_idx = j;
      }
    }
    labels[i] = train.labels[best_idx];
  }
  return labels;
}

double accuracy(const std::vector<int>& predicted, const std::vector<int>& truth) {
  if (predicted.size() != truth.size()) throw DataError("prediction length mismatch");
  if (predicted.empty()) throw DataError("empty prediction vector");
  std::size_t hits = 0;
  for (std::size_t i = 0; i < predicted.size(); ++i)
    if (predicted[i] == truth[i]) ++hits;
  return static_cast<double>(hits) / static_cast<double>(predicted.size());
}

std::string MethodSpec::name() const {
  switch (kind) {
    case Kind::gfs: return "gfs";
    case Kind::fisher: return "fisher";
    case Kind::laplacian: return "laplacian";
    case Kind::hsic: return "hsic";
    case Kind::all_features: return "all";
  }
  return "?";
}

namespace {

// Stratified fold ids: shuffle within each class, then deal round-robin.
// Retries with fresh shuffles until every train side covers every class.
std::vector<int> stratified_folds(const Dataset& ds, int folds, Rng& rng) {
  const std::size_t n = ds.samples();
  std::vector<int> fold_of(n, 0);
  for (int attempt = 0; attempt < 100; ++attempt) {
    for (int k = 1; k <= ds.num_classes; ++k) {
      std::vector<int> members;
      for (std::size_t i = 0; i < n; ++i)
        if (ds.labels[i] == k) members.push_back(static_cast<int>(i));
      rng.shuffle(members);
      for (std::size_t r = 0; r < members.size(); ++r)
        fold_of[static_cast<std::size_t>(members[r])] = static_cast<int>(r) % folds;
    }
    bool ok = true;
    for (int f = 0; f < folds && ok; ++f) {
      std::vector<char> seen(static_cast<std::size_t>(ds.num_classes), 0);
      for (std::size_t i = 0; i < n; ++i)
        if (fold_of[i] != f) seen[static_cast<std::size_t>(ds.labels[i] - 1)] = 1;
      for (char s : seen)
        if (!s) ok = false;
    }
    if (ok) return fold_of;
  }
  throw DataError("stratified folding cannot cover every class");
}

double knn_accuracy_on(const Dataset& train, const Dataset& test, const std::vector<int>& feats) {
  const Dataset train_sub = train.take_features(feats);
  const Dataset test_sub = test.take_features(feats);
  const std::vector<int> pred = knn1_predict(train_sub, test_sub.features);
  return accuracy(pred, test.labels);
}

}  // namespace

std::vector<int> select_features_for_method(const Dataset& train, const MethodSpec& method,
                                            int num_features, double gamma,
                                            SolverTrace* trace_out) {
  switch (method.kind) {
    case MethodSpec::Kind::gfs: {
      const Dataset centered = center_columns(train);
      SelectKResult r = select_k_features_detailed(centered, gamma, num_features, method.gfs);
      if (trace_out != nullptr) *trace_out = std::move(r.trace);
      return r.selected;
    }
    case MethodSpec::Kind::fisher:
      return top_m(fisher_scores(train), num_features);
    case MethodSpec::Kind::laplacian: {
      LaplacianParams p = method.laplacian;
      p.k_neighbors = std::min<int>(p.k_neighbors, static_cast<int>(train.samples()) - 1);
      return top_m(laplacian_scores(train, p), num_features);
    }
    case MethodSpec::Kind::hsic:
      return top_m(hsic_scores(train), num_features);
    case MethodSpec::Kind::all_features: {
      std::vector<int> all(train.dim());
      std::iota(all.begin(), all.end(), 0);
      return all;
    }
  }
  throw ConfigError("unknown method");
}

double cross_validate_gamma(const Dataset& train, const std::vector<double>& grid, int folds,
                            int num_features, const GfsConfig& base, std::uint64_t seed) {
  if (grid.empty()) throw ConfigError("gamma grid is empty");
  if (folds < 2) throw ConfigError("cross-validation needs at least two folds");

  Rng rng(Rng::mix(seed, 0xf01d5ULL));
  const std::vector<int> fold_of = stratified_folds(train, folds, rng);

  double best_gamma = grid.front();
  double best_acc = -1.0;
  MethodSpec gfs_method;
  gfs_method.kind = MethodSpec::Kind::gfs;
  gfs_method.gfs = base;

  for (const double gamma : grid) {
    double acc_sum = 0.0;
    for (int f = 0; f < folds; ++f) {
      std::vector<int> tr_idx, va_idx;
      for (std::size_t i = 0; i < train.samples(); ++i)
        (fold_of[i] == f ? va_idx : tr_idx).push_back(static_cast<int>(i));
      if (va_idx.empty()) continue;
      const Dataset fold_train_raw = train.take_samples(tr_idx);
      const Dataset fold_val_raw = train.take_samples(va_idx);
      const Standardizer st = fit_standardizer(fold_train_raw);
      const Dataset fold_train = apply_standardizer(st, fold_train_raw);
      const Dataset fold_val = apply_standardizer(st, fold_val_raw);
      const std::vector<int> feats =
          select_features_for_method(fold_train, gfs_method, num_features, gamma);
      acc_sum += knn_accuracy_on(fold_train, fold_val, feats);
    }
    const double mean_acc = acc_sum / static_cast<double>(folds);
    if (mean_acc > best_acc) {  // strict: earlier grid entries win ties
      best_acc = mean_acc;
      best_gamma = gamma;
    }
  }
  return best_gamma;
}

AggregateResult run_trials(const Dataset& ds, const MethodSpec& method, int num_trials,
                           double train_frac, int num_features, std::uint64_t seed) {
  if (num_trials < 1) throw ConfigError("need at least one trial");
  if (num_features < 1 || static_cast<std::size_t>(num_features) > ds.dim())
    throw ConfigError("num_features out of range");

  AggregateResult agg;
  agg.method = method.name();
  agg.trials.reserve(static_cast<std::size_t>(num_trials));

  for (int trial = 0; trial < num_trials; ++trial) {
    const std::uint64_t trial_seed = Rng::mix(seed, static_cast<std::uint64_t>(trial));
    auto [train_raw, test_raw] = split_train_test(ds, train_frac, trial_seed);
    const Standardizer st = fit_standardizer(train_raw);
    const Dataset train = apply_standardizer(st, train_raw);
    const Dataset test = apply_standardizer(st, test_raw);

    double gamma = method.gfs.gamma;
    if (method.kind == MethodSpec::Kind::gfs && !method.gamma_grid.empty()) {
      gamma = cross_validate_gamma(train, method.gamma_grid, method.cv_folds, num_features,
                                   method.gfs, trial_seed);
    }

    TrialResult tr;
    tr.trial_index = trial;
    tr.gamma_used = method.kind == MethodSpec::Kind::gfs ? gamma : 0.0;
    SolverTrace trace;
    tr.selected_features = select_features_for_method(
        train, method, num_features, gamma,
        method.kind == MethodSpec::Kind::gfs ? &trace : nullptr);
    if (method.kind == MethodSpec::Kind::gfs) tr.trace = std::move(trace);
    tr.accuracy = knn_accuracy_on(train, test, tr.selected_features);
    agg.trials.push_back(std::move(tr));
  }

  double mean = 0.0;
  for (const TrialResult& t : agg.trials) mean += t.accuracy;
  mean /= static_cast<double>(num_trials);
  double var = 0.0;
  for (const TrialResult& t : agg.trials) {
    const double dv = t.accuracy - mean;
    var += dv * dv;
  }
  var /= static_cast<double>(num_trials);
  agg.mean_accuracy = mean;
  agg.std_accuracy = std::sqrt(var);
  return agg;
}

}  // namespace gfs
