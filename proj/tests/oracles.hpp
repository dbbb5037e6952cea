// Independent reference implementations used as test oracles. Everything
// here is written with plain loops, explicit dense matrices and Gaussian
// elimination so it shares no code path with the library implementation.
#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <vector>

#include "gfs/dataset.hpp"
#include "gfs/matrix.hpp"
#include "gfs/rng.hpp"
#include "gfs/solver.hpp"

namespace oracle {

using gfs::la::Matrix;

// Gaussian elimination with partial pivoting; solves A X = B.
inline Matrix gauss_solve(Matrix a, Matrix b) {
  const std::size_t n = a.rows();
  if (a.cols() != n || b.rows() != n) throw std::invalid_argument("gauss_solve shape");
  const std::size_t k = b.cols();
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t pivot = col;
    for (std::size_t r = col + 1; r < n; ++r)
      if (std::abs(a(r, col)) > std::abs(a(pivot, col))) pivot = r;
    if (a(pivot, col) == 0.0) throw std::runtime_error("gauss_solve: singular matrix");
    if (pivot != col) {
      for (std::size_t cc = 0; cc < n; ++cc) std::swap(a(col, cc), a(pivot, cc));
      for (std::size_t cc = 0; cc < k; ++cc) std::swap(b(col, cc), b(pivot, cc));
    }
    for (std::size_t r = col + 1; r < n; ++r) {
      const double factor = a(r, col) / a(col, col);
      if (factor == 0.0) continue;
      for (std::size_t cc = col; cc < n; ++cc) a(r, cc) -= factor * a(col, cc);
      for (std::size_t cc = 0; cc < k; ++cc) b(r, cc) -= factor * b(col, cc);
    }
  }
  for (std::size_t col = n; col-- > 0;) {
    for (std::size_t cc = 0; cc < k; ++cc) {
      double acc = b(col, cc);
      for (std::size_t j = col + 1; j < n; ++j) acc -= a(col, j) * b(j, cc);
      b(col, cc) = acc / a(col, col);
    }
  }
  return b;
}

inline Matrix matmul_naive(const Matrix& a, const Matrix& b) {
  Matrix c(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < b.cols(); ++j) {
      double acc = 0.0;
      for (std::size_t k = 0; k < a.cols(); ++k) acc += a(i, k) * b(k, j);
      c(i, j) = acc;
    }
  return c;
}

// sum_{j in p} K_j = X^T diag(p) X materialized as an n x n matrix.
inline Matrix dense_kernel_sum(const Matrix& x, const gfs::SelectionIndicator& p) {
  const std::size_t n = x.cols();
  Matrix k(n, n);
  for (std::size_t j = 0; j < x.rows(); ++j) {
    if (!p.bits[j]) continue;
    for (std::size_t a = 0; a < n; ++a)
      for (std::size_t b = 0; b < n; ++b) k(a, b) += x(j, a) * x(j, b);
  }
  return k;
}

// f(V, p) evaluated against the materialized kernel sum.
inline double dense_dual_objective(const Matrix& v, const gfs::SelectionIndicator& p,
                                   const Matrix& x, const Matrix& h, double gamma) {
  const std::size_t n = x.cols();
  const std::size_t c = v.cols();
  const Matrix k = dense_kernel_sum(x, p);
  double trace_vh = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t cc = 0; cc < c; ++cc) trace_vh += v(i, cc) * h(i, cc);
  // tr(V^T ((1/gamma) K + I) V)
  double quad = 0.0;
  for (std::size_t cc = 0; cc < c; ++cc) {
    for (std::size_t i = 0; i < n; ++i) {
      double kv = 0.0;
      for (std::size_t jj = 0; jj < n; ++jj) kv += k(i, jj) * v(jj, cc);
      quad += v(i, cc) * (kv / gamma + v(i, cc));
    }
  }
  return trace_vh - 0.5 * quad;
}

// mixture objective g(lambda, V) = sum_t lambda_t f(V, p^t), dense route
inline double dense_mixture_objective(const Matrix& v,
                                      const std::vector<gfs::SelectionIndicator>& constraints,
                                      const std::vector<double>& lambda, const Matrix& x,
                                      const Matrix& h, double gamma) {
  double acc = 0.0;
  for (std::size_t t = 0; t < constraints.size(); ++t)
    acc += lambda[t] * dense_dual_objective(v, constraints[t], x, h, gamma);
  return acc;
}

// Ridge restricted to the selected rows: W_p = (X_p X_p^T + gamma I)^{-1} X_p H,
// returned as the full d x c matrix with zero rows elsewhere.
inline Matrix ridge_solution(const Matrix& x, const gfs::SelectionIndicator& p, const Matrix& h,
                             double gamma) {
  const std::vector<int> idx = p.indices();
  const std::size_t m = idx.size();
  const std::size_t n = x.cols();
  const std::size_t c = h.cols();
  Matrix a(m, m);
  for (std::size_t r = 0; r < m; ++r)
    for (std::size_t s = 0; s < m; ++s) {
      double acc = 0.0;
      for (std::size_t i = 0; i < n; ++i)
        acc += x(static_cast<std::size_t>(idx[r]), i) * x(static_cast<std::size_t>(idx[s]), i);
      a(r, s) = acc + (r == s ? gamma : 0.0);
    }
  Matrix b(m, c);
  for (std::size_t r = 0; r < m; ++r)
    for (std::size_t cc = 0; cc < c; ++cc) {
      double acc = 0.0;
      for (std::size_t i = 0; i < n; ++i) acc += x(static_cast<std::size_t>(idx[r]), i) * h(i, cc);
      b(r, cc) = acc;
    }
  const Matrix wp = gauss_solve(std::move(a), std::move(b));
  Matrix w(x.rows(), c);
  for (std::size_t r = 0; r < m; ++r)
    for (std::size_t cc = 0; cc < c; ++cc) w(static_cast<std::size_t>(idx[r]), cc) = wp(r, cc);
  return w;
}

// 1/2 ||X^T diag(p) W - H||_F^2 + gamma/2 ||W||_F^2
inline double ridge_objective(const Matrix& x, const gfs::SelectionIndicator& p, const Matrix& w,
                              const Matrix& h, double gamma) {
  const std::size_t n = x.cols();
  const std::size_t c = h.cols();
  double fit = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t cc = 0; cc < c; ++cc) {
      double pred = 0.0;
      for (std::size_t j = 0; j < x.rows(); ++j)
        if (p.bits[j]) pred += x(j, i) * w(j, cc);
      const double r = pred - h(i, cc);
      fit += r * r;
    }
  double reg = 0.0;
  for (std::size_t j = 0; j < w.rows(); ++j)
    for (std::size_t cc = 0; cc < c; ++cc) reg += w(j, cc) * w(j, cc);
  return 0.5 * fit + 0.5 * gamma * reg;
}

// optimal ridge value for p, minimized over W in closed form
inline double ridge_optimum(const Matrix& x, const gfs::SelectionIndicator& p, const Matrix& h,
                            double gamma) {
  return ridge_objective(x, p, ridge_solution(x, p, h, gamma), h, gamma);
}

// max over V of f(V, p) = 1/2 tr(H^T M_p^{-1} H), dense
inline double dense_max_v_objective(const Matrix& x, const gfs::SelectionIndicator& p,
                                    const Matrix& h, double gamma) {
  const std::size_t n = x.cols();
  Matrix m = dense_kernel_sum(x, p);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) m(i, j) /= gamma;
    m(i, i) += 1.0;
  }
  const Matrix v = gauss_solve(std::move(m), h);
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t cc = 0; cc < h.cols(); ++cc) acc += h(i, cc) * v(i, cc);
  return 0.5 * acc;
}

// Enumerates every m-of-d indicator in lexicographic index order.
inline void enumerate_indicators(std::size_t d, int m,
                                 const std::function<void(const gfs::SelectionIndicator&)>& fn) {
  std::vector<int> idx(static_cast<std::size_t>(m));
  std::function<void(int, int)> rec = [&](int start, int depth) {
    if (depth == m) {
      fn(gfs::SelectionIndicator::from_indices(d, idx));
      return;
    }
    for (int j = start; j <= static_cast<int>(d) - (m - depth); ++j) {
      idx[static_cast<std::size_t>(depth)] = j;
      rec(j + 1, depth + 1);
    }
  };
  rec(0, 0);
  (void)rec;
}

// Target matrix straight from the entry formula, no shared code.
inline Matrix dense_target_matrix(const std::vector<int>& labels, int num_classes) {
  const std::size_t n = labels.size();
  std::vector<double> nk(static_cast<std::size_t>(num_classes), 0.0);
  for (int y : labels) nk[static_cast<std::size_t>(y - 1)] += 1.0;
  Matrix h(n, static_cast<std::size_t>(num_classes));
  for (std::size_t i = 0; i < n; ++i)
    for (int k = 1; k <= num_classes; ++k) {
      const double nkk = nk[static_cast<std::size_t>(k - 1)];
      h(i, static_cast<std::size_t>(k - 1)) =
          labels[i] == k ? std::sqrt(static_cast<double>(n) / nkk) -
                               std::sqrt(nkk / static_cast<double>(n))
                         : -std::sqrt(nkk / static_cast<double>(n));
    }
  return h;
}

// Ratio-trace criterion on the selected rows, via explicit scatter
// matrices and Gaussian elimination.
inline double dense_ratio_trace(const gfs::Dataset& ds, const gfs::SelectionIndicator& p,
                                double gamma) {
  const std::vector<int> idx = p.indices();
  const std::size_t m = idx.size();
  const std::size_t n = ds.samples();
  const int c = ds.num_classes;

  std::vector<double> nk(static_cast<std::size_t>(c), 0.0);
  Matrix mu_k(m, static_cast<std::size_t>(c));
  std::vector<double> mu(m, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const auto k = static_cast<std::size_t>(ds.labels[i] - 1);
    nk[k] += 1.0;
    for (std::size_t r = 0; r < m; ++r) {
      const double v = ds.features(static_cast<std::size_t>(idx[r]), i);
      mu_k(r, k) += v;
      mu[r] += v;
    }
  }
  for (std::size_t r = 0; r < m; ++r) {
    mu[r] /= static_cast<double>(n);
    for (std::size_t k = 0; k < static_cast<std::size_t>(c); ++k) mu_k(r, k) /= nk[k];
  }

  Matrix sb(m, m), st(m, m);
  for (std::size_t k = 0; k < static_cast<std::size_t>(c); ++k)
    for (std::size_t r = 0; r < m; ++r)
      for (std::size_t s = 0; s < m; ++s)
        sb(r, s) += nk[k] * (mu_k(r, k) - mu[r]) * (mu_k(s, k) - mu[s]);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t r = 0; r < m; ++r)
      for (std::size_t s = 0; s < m; ++s)
        st(r, s) += (ds.features(static_cast<std::size_t>(idx[r]), i) - mu[r]) *
                    (ds.features(static_cast<std::size_t>(idx[s]), i) - mu[s]);

  for (std::size_t r = 0; r < m; ++r) st(r, r) += gamma;
  Matrix eye(m, m);
  for (std::size_t r = 0; r < m; ++r) eye(r, r) = 1.0;
  const Matrix inv = gauss_solve(std::move(st), std::move(eye));
  const Matrix prod = matmul_naive(sb, inv);
  double tr = 0.0;
  for (std::size_t r = 0; r < m; ++r) tr += prod(r, r);
  return tr;
}

// Random instance: centered d x n data with c classes, every class
// populated, entries standard normal.
inline gfs::Dataset random_instance(std::size_t d, std::size_t n, int c, gfs::Rng& rng) {
  gfs::la::Matrix x(d, n);
  for (std::size_t i = 0; i < x.size(); ++i) x.data()[i] = rng.normal();
  std::vector<int> labels(n);
  for (std::size_t i = 0; i < n; ++i)
    labels[i] = i < static_cast<std::size_t>(c)
                    ? static_cast<int>(i) + 1
                    : static_cast<int>(rng.below(static_cast<std::uint64_t>(c))) + 1;
  rng.shuffle(labels);
  gfs::Dataset ds = gfs::Dataset::create(std::move(x), std::move(labels));
  return gfs::center_columns(ds);
}

inline Matrix random_matrix(std::size_t r, std::size_t c, gfs::Rng& rng) {
  Matrix m(r, c);
  for (std::size_t i = 0; i < m.size(); ++i) m.data()[i] = rng.normal();
  return m;
}

}  // namespace oracle
