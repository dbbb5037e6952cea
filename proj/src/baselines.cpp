#include "gfs/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "gfs/errors.hpp"
#include "gfs/kernels.hpp"

namespace gfs {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

bool higher_is_better(ScoreMethod m) { return m != ScoreMethod::laplacian; }

const char* method_name(ScoreMethod m) {
  switch (m) {
    case ScoreMethod::fisher: return "fisher";
    case ScoreMethod::laplacian: return "laplacian";
    case ScoreMethod::hsic: return "hsic";
  }
  return "?";
}

ScoreVector fisher_scores(const Dataset& ds) {
  const ClassStats st = class_stats(ds);
  const std::size_t d = ds.dim();
  const std::size_t n = ds.samples();
  const int c = ds.num_classes;

  ScoreVector sv{std::vector<double>(d, 0.0), ScoreMethod::fisher};
  for (std::size_t j = 0; j < d; ++j) {
    double num = 0.0;
    for (int k = 0; k < c; ++k) {
      const double gap = st.class_means(j, static_cast<std::size_t>(k)) - st.overall_mean[j];
      num += static_cast<double>(st.counts[static_cast<std::size_t>(k)]) * gap * gap;
    }
    // denominator: sum_k n_k * population variance of class k,
    // i.e. the within-class sum of squares of feature j
    double den = 0.0;
    const double* x = ds.features.row(j);
    for (std::size_t i = 0; i < n; ++i) {
      const double dv = x[i] - st.class_means(j, static_cast<std::size_t>(ds.labels[i] - 1));
      den += dv * dv;
    }
    if (den > 0.0) {
      sv.scores[j] = num / den;
    } else {
      sv.scores[j] = num > 0.0 ? kInf : 0.0;
    }
  }
  return sv;
}

ScoreVector laplacian_scores(const Dataset& ds, const LaplacianParams& params) {
  const std::size_t d = ds.dim();
  const std::size_t n = ds.samples();
  const int k = params.k_neighbors;
  if (k < 1 || static_cast<std::size_t>(k) >= n)
    throw ConfigError("laplacian k_neighbors must be in [1, n-1]");

  // samples as contiguous rows for the distance kernel
  la::Matrix xt = la::transpose(ds.features);

  la::Matrix dist2(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    dist2(i, i) = 0.0;
    for (std::size_t j = i + 1; j < n; ++j) {
      const double d2 = kernels::sqdist(xt.row(i), xt.row(j), d);
      dist2(i, j) = d2;
      dist2(j, i) = d2;
    }
  }

  double t = params.heat_bandwidth;
  if (t <= 0.0) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j) acc += dist2(i, j);
    t = 2.0 * acc / static_cast<double>(n * (n - 1));
    if (t <= 0.0) t = 1.0;  // all samples identical
  }

  // symmetrized k-NN adjacency; nearest-neighbor ties go to the smaller index
  std::vector<char> adj(n * n, 0);
  std::vector<int> order(n);
  for (std::size_t i = 0; i < n; ++i) {
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
      return dist2(i, static_cast<std::size_t>(a)) < dist2(i, static_cast<std::size_t>(b));
    });
    int taken = 0;
    for (int cand : order) {
      if (static_cast<std::size_t>(cand) == i) continue;
      adj[i * n + static_cast<std::size_t>(cand)] = 1;
      adj[static_cast<std::size_t>(cand) * n + i] = 1;
      if (++taken == k) break;
    }
  }

  // heat weights with the exponent clamped so every kept edge stays positive
  la::Matrix w(n, n);
  std::vector<double> degree(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      if (!adj[i * n + j]) continue;
      const double wij = std::exp(-std::min(dist2(i, j) / t, 700.0));
      w(i, j) = wij;
      w(j, i) = wij;
      degree[i] += wij;
      degree[j] += wij;
    }
  }
  const double dsum = std::accumulate(degree.begin(), degree.end(), 0.0);

  ScoreVector sv{std::vector<double>(d, 0.0), ScoreMethod::laplacian};
  std::vector<double> f(n);
  for (std::size_t r = 0; r < d; ++r) {
    for (std::size_t i = 0; i < n; ++i) f[i] = ds.features(r, i);
    const double fd1 = kernels::dot(f.data(), degree.data(), n);
    const double shift = fd1 / dsum;
    for (std::size_t i = 0; i < n; ++i) f[i] -= shift;

    double lap = 0.0;  // f~^T L f~ accumulated over edges
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j) {
        if (!adj[i * n + j]) continue;
        const double diff = f[i] - f[j];
        lap += w(i, j) * diff * diff;
      }
    double den = 0.0;  // f~^T D f~
    for (std::size_t i = 0; i < n; ++i) den += degree[i] * f[i] * f[i];

    sv.scores[r] = den > 0.0 ? lap / den : kInf;
  }
  return sv;
}

ScoreVector hsic_scores(const Dataset& ds) {
  const std::size_t d = ds.dim();
  const std::size_t n = ds.samples();
  const int c = ds.num_classes;

  // With a linear kernel K_j = f f^T, centering turns trace(C K_j C L)
  // into sum_k (sum of the centered feature over class k)^2.
  ScoreVector sv{std::vector<double>(d, 0.0), ScoreMethod::hsic};
  const double denom = static_cast<double>(n - 1) * static_cast<double>(n - 1);
  std::vector<double> class_sum(static_cast<std::size_t>(c));
  for (std::size_t j = 0; j < d; ++j) {
    const double* x = ds.features.row(j);
    double mean = 0.0;
    for (std::size_t i = 0; i < n; ++i) mean += x[i];
    mean /= static_cast<double>(n);
    std::fill(class_sum.begin(), class_sum.end(), 0.0);
    for (std::size_t i = 0; i < n; ++i)
      class_sum[static_cast<std::size_t>(ds.labels[i] - 1)] += x[i] - mean;
    double acc = 0.0;
    for (double s : class_sum) acc += s * s;
    sv.scores[j] = acc / denom;
  }
  return sv;
}

std::vector<int> top_m(const ScoreVector& sv, int m) {
  const auto d = static_cast<int>(sv.scores.size());
  if (m < 1 || m > d) throw ConfigError("top_m: m out of range");

  std::vector<int> order(static_cast<std::size_t>(d));
  std::iota(order.begin(), order.end(), 0);
  const bool desc = higher_is_better(sv.method);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    const double sa = sv.scores[static_cast<std::size_t>(a)];
    const double sb = sv.scores[static_cast<std::size_t>(b)];
    if (sa != sb) return desc ? sa > sb : sa < sb;
    return a < b;
  });
  order.resize(static_cast<std::size_t>(m));
  std::sort(order.begin(), order.end());
  return order;
}

}  // namespace gfs
