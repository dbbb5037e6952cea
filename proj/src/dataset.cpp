#include "gfs/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "gfs/errors.hpp"
#include "gfs/kernels.hpp"
#include "gfs/rng.hpp"

namespace gfs {

Dataset Dataset::create(la::Matrix features, std::vector<int> labels,
                        std::vector<std::string> feature_names) {
  const std::size_t d = features.rows();
  const std::size_t n = features.cols();
  if (d < 1) throw DataError("dataset needs at least one feature");
  if (n < 2) throw DataError("dataset needs at least two samples");
  if (labels.size() != n) throw DataError("label count does not match sample count");
  if (!feature_names.empty() && feature_names.size() != d)
    throw DataError("feature name count does not match feature count");

  for (std::size_t i = 0; i < features.size(); ++i) {
    if (!std::isfinite(features.data()[i])) throw DataError("non-finite feature value");
  }

  int c = 0;
  for (int y : labels) {
    if (y < 1) throw DataError("labels must be >= 1");
    c = std::max(c, y);
  }
  std::vector<int> seen(static_cast<std::size_t>(c), 0);
  for (int y : labels) seen[static_cast<std::size_t>(y - 1)] = 1;
  for (int k = 0; k < c; ++k) {
    if (!seen[static_cast<std::size_t>(k)])
      throw DataError("class " + std::to_string(k + 1) + " has no samples");
  }

  Dataset ds;
  ds.features = std::move(features);
  ds.labels = std::move(labels);
  ds.num_classes = c;
  ds.feature_names = std::move(feature_names);
  return ds;
}

Dataset Dataset::take_samples(const std::vector<int>& idx) const {
  Dataset out;
  out.features = la::Matrix(dim(), idx.size());
  out.labels.resize(idx.size());
  out.num_classes = num_classes;
  out.feature_names = feature_names;
  for (std::size_t j = 0; j < dim(); ++j) {
    const double* src = features.row(j);
    double* dst = out.features.row(j);
    for (std::size_t i = 0; i < idx.size(); ++i) dst[i] = src[idx[i]];
  }
  for (std::size_t i = 0; i < idx.size(); ++i) out.labels[i] = labels[static_cast<std::size_t>(idx[i])];
  return out;
}

Dataset Dataset::take_features(const std::vector<int>& idx) const {
  Dataset out;
  out.features = la::Matrix(idx.size(), samples());
  out.labels = labels;
  out.num_classes = num_classes;
  if (!feature_names.empty()) {
    out.feature_names.reserve(idx.size());
    for (int j : idx) out.feature_names.push_back(feature_names[static_cast<std::size_t>(j)]);
  }
  for (std::size_t r = 0; r < idx.size(); ++r) {
    const double* src = features.row(static_cast<std::size_t>(idx[r]));
    std::copy(src, src + samples(), out.features.row(r));
  }
  return out;
}

ClassStats class_stats(const Dataset& ds) {
  const std::size_t d = ds.dim();
  const std::size_t n = ds.samples();
  const int c = ds.num_classes;

  ClassStats st;
  st.counts.assign(static_cast<std::size_t>(c), 0);
  st.class_means = la::Matrix(d, static_cast<std::size_t>(c));
  st.overall_mean.assign(d, 0.0);

  for (int y : ds.labels) ++st.counts[static_cast<std::size_t>(y - 1)];
  for (int k = 0; k < c; ++k) {
    if (st.counts[static_cast<std::size_t>(k)] == 0)
      throw DataError("class " + std::to_string(k + 1) + " has no samples");
  }

  for (std::size_t j = 0; j < d; ++j) {
    const double* x = ds.features.row(j);
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      st.class_means(j, static_cast<std::size_t>(ds.labels[i] - 1)) += x[i];
      total += x[i];
    }
    st.overall_mean[j] = total / static_cast<double>(n);
    for (int k = 0; k < c; ++k)
      st.class_means(j, static_cast<std::size_t>(k)) /= static_cast<double>(st.counts[static_cast<std::size_t>(k)]);
  }
  return st;
}

ScatterPair scatter_matrices(const Dataset& ds, const ClassStats& stats) {
  const std::size_t d = ds.dim();
  const std::size_t n = ds.samples();
  const int c = ds.num_classes;

  ScatterPair sp;
  sp.between = la::Matrix(d, d);
  sp.total = la::Matrix(d, d);

  std::vector<double> delta(d);
  for (int k = 0; k < c; ++k) {
    for (std::size_t j = 0; j < d; ++j)
      delta[j] = stats.class_means(j, static_cast<std::size_t>(k)) - stats.overall_mean[j];
    const double w = static_cast<double>(stats.counts[static_cast<std::size_t>(k)]);
    for (std::size_t i = 0; i < d; ++i)
      kernels::axpy(w * delta[i], delta.data(), sp.between.row(i), d);
  }

  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < d; ++j) delta[j] = ds.features(j, i) - stats.overall_mean[j];
    for (std::size_t r = 0; r < d; ++r)
      kernels::axpy(delta[r], delta.data(), sp.total.row(r), d);
  }
  return sp;
}

Standardizer fit_standardizer(const Dataset& train) {
  const std::size_t d = train.dim();
  const std::size_t n = train.samples();
  Standardizer s;
  s.mean.resize(d);
  s.scale.resize(d);
  for (std::size_t j = 0; j < d; ++j) {
    const double* x = train.features.row(j);
    double m = 0.0;
    for (std::size_t i = 0; i < n; ++i) m += x[i];
    m /= static_cast<double>(n);
    double var = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double dv = x[i] - m;
      var += dv * dv;
    }
    var /= static_cast<double>(n);  // population variance
    const double sd = std::sqrt(var);
    s.mean[j] = m;
    s.scale[j] = sd > 0.0 ? sd : 1.0;
  }
  return s;
}

Dataset apply_standardizer(const Standardizer& s, const Dataset& ds) {
  if (s.mean.size() != ds.dim()) throw DataError("standardizer dimension mismatch");
  Dataset out = ds;
  for (std::size_t j = 0; j < ds.dim(); ++j) {
    double* x = out.features.row(j);
    const double m = s.mean[j];
    const double inv = 1.0 / s.scale[j];
    for (std::size_t i = 0; i < ds.samples(); ++i) x[i] = (x[i] - m) * inv;
  }
  return out;
}

Dataset center_columns(const Dataset& ds) {
  Dataset out = ds;
  const std::size_t n = ds.samples();
  for (std::size_t j = 0; j < ds.dim(); ++j) {
    double* x = out.features.row(j);
    double m = 0.0;
    for (std::size_t i = 0; i < n; ++i) m += x[i];
    m /= static_cast<double>(n);
    for (std::size_t i = 0; i < n; ++i) x[i] -= m;
  }
  return out;
}

std::pair<Dataset, Dataset> split_train_test(const Dataset& ds, double train_frac,
                                             std::uint64_t seed) {
  if (!(train_frac > 0.0 && train_frac < 1.0))
    throw ConfigError("train_frac must be in (0, 1)");
  const std::size_t n = ds.samples();
  auto n_train = static_cast<std::size_t>(std::llround(train_frac * static_cast<double>(n)));
  n_train = std::min(std::max<std::size_t>(n_train, 1), n - 1);

  Rng rng(seed);
  constexpr int kMaxRetries = 100;
  for (int attempt = 0; attempt < kMaxRetries; ++attempt) {
    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    rng.shuffle(order);

    std::vector<int> train_idx(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_train));
    std::vector<int> test_idx(order.begin() + static_cast<std::ptrdiff_t>(n_train), order.end());
    std::sort(train_idx.begin(), train_idx.end());
    std::sort(test_idx.begin(), test_idx.end());

    std::vector<int> seen(static_cast<std::size_t>(ds.num_classes), 0);
    for (int i : train_idx) seen[static_cast<std::size_t>(ds.labels[static_cast<std::size_t>(i)] - 1)] = 1;
    if (std::all_of(seen.begin(), seen.end(), [](int v) { return v != 0; })) {
      return {ds.take_samples(train_idx), ds.take_samples(test_idx)};
    }
  }
  throw DataError("could not draw a training split covering every class");
}

}  // namespace gfs
