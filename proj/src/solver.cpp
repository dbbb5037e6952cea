#include "gfs/solver.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>

#include "gfs/errors.hpp"
#include "gfs/kernels.hpp"

namespace gfs {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

void GfsConfig::validate() const {
  if (!(gamma > 0.0)) throw ConfigError("gamma must be positive");
  if (m < 1) throw ConfigError("m must be >= 1");
  if (!(inner_tol > 0.0) || !(outer_tol > 0.0) || !(linear_solver_tol > 0.0))
    throw ConfigError("tolerances must be positive");
  if (inner_max_iter < 1 || outer_max_iter < 1)
    throw ConfigError("iteration limits must be >= 1");
}

SelectionIndicator SelectionIndicator::from_indices(std::size_t d, const std::vector<int>& idx) {
  SelectionIndicator p;
  p.bits.assign(d, 0);
  for (int j : idx) {
    if (j < 0 || static_cast<std::size_t>(j) >= d)
      throw ConfigError("feature index out of range");
    if (p.bits[static_cast<std::size_t>(j)]) throw ConfigError("duplicate feature index");
    p.bits[static_cast<std::size_t>(j)] = 1;
  }
  p.m = static_cast<int>(idx.size());
  return p;
}

std::vector<int> SelectionIndicator::indices() const {
  std::vector<int> out;
  out.reserve(static_cast<std::size_t>(m));
  for (std::size_t j = 0; j < bits.size(); ++j)
    if (bits[j]) out.push_back(static_cast<int>(j));
  return out;
}

la::Matrix build_target_matrix(const std::vector<int>& labels, int num_classes) {
  const std::size_t n = labels.size();
  const auto c = static_cast<std::size_t>(num_classes);
  std::vector<double> counts(c, 0.0);
  for (int y : labels) {
    if (y < 1 || y > num_classes) throw DataError("label out of range");
    counts[static_cast<std::size_t>(y - 1)] += 1.0;
  }
  for (double nk : counts)
    if (nk == 0.0) throw DataError("empty class in target matrix");

  la::Matrix h(n, c);
  const auto nn = static_cast<double>(n);
  for (std::size_t k = 0; k < c; ++k) {
    const double off = -std::sqrt(counts[k] / nn);
    const double on = std::sqrt(nn / counts[k]) + off;
    for (std::size_t i = 0; i < n; ++i)
      h(i, k) = (static_cast<std::size_t>(labels[i] - 1) == k) ? on : off;
  }
  return h;
}

std::vector<double> row_scores(const la::Matrix& x, const la::Matrix& v) {
  const std::size_t d = x.rows();
  const std::size_t n = x.cols();
  const std::size_t c = v.cols();
  const la::Matrix vt = la::transpose(v);  // c x n, rows contiguous
  std::vector<double> s(d, 0.0);
  for (std::size_t j = 0; j < d; ++j) {
    double acc = 0.0;
    for (std::size_t k = 0; k < c; ++k) {
      const double z = kernels::dot(x.row(j), vt.row(k), n);
      acc += z * z;
    }
    s[j] = acc;
  }
  return s;
}

double dual_objective(const la::Matrix& v, const SelectionIndicator& p, const la::Matrix& x,
                      const la::Matrix& h, double gamma) {
  const std::size_t n = x.cols();
  const std::size_t c = v.cols();
  const la::Matrix vt = la::transpose(v);
  double kernel_term = 0.0;
  for (std::size_t j = 0; j < p.bits.size(); ++j) {
    if (!p.bits[j]) continue;
    for (std::size_t k = 0; k < c; ++k) {
      const double z = kernels::dot(x.row(j), vt.row(k), n);
      kernel_term += z * z;
    }
  }
  return la::frob_inner(v, h) - 0.5 * la::frob_norm_sq(v) - kernel_term / (2.0 * gamma);
}

std::vector<double> mix_feature_weights(const ConstraintSet& cs, std::size_t d) {
  std::vector<double> w(d, 0.0);
  for (std::size_t t = 0; t < cs.constraints.size(); ++t) {
    const double lt = cs.weights[t];
    if (lt == 0.0) continue;
    for (std::size_t j = 0; j < d; ++j)
      if (cs.constraints[t].bits[j]) w[j] += lt;
  }
  return w;
}

namespace {

// Applies M = I + (1/gamma) X^T diag(w) X to the n x c matrix V through
// the active feature rows; never forms an n x n kernel.
la::Matrix apply_system(const la::Matrix& x, const std::vector<int>& active,
                        const std::vector<double>& w, double gamma, const la::Matrix& v) {
  const std::size_t n = x.cols();
  const std::size_t c = v.cols();
  const la::Matrix vt = la::transpose(v);
  la::Matrix yt = vt;
  std::vector<double> z(c);
  for (int j : active) {
    const double* xj = x.row(static_cast<std::size_t>(j));
    for (std::size_t k = 0; k < c; ++k) z[k] = kernels::dot(xj, vt.row(k), n);
    const double scale = w[static_cast<std::size_t>(j)] / gamma;
    for (std::size_t k = 0; k < c; ++k) kernels::axpy(scale * z[k], xj, yt.row(k), n);
  }
  return la::transpose(yt);
}

// Largest per-column relative residual of M V = H.
double system_residual(const la::Matrix& x, const std::vector<int>& active,
                       const std::vector<double>& w, double gamma, const la::Matrix& v,
                       const la::Matrix& h, la::Matrix* out_residual) {
  const la::Matrix mv = apply_system(x, active, w, gamma, v);
  const std::size_t n = h.rows();
  const std::size_t c = h.cols();
  double worst = 0.0;
  if (out_residual != nullptr) *out_residual = la::Matrix(n, c);
  for (std::size_t k = 0; k < c; ++k) {
    double rr = 0.0, hh = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double r = h(i, k) - mv(i, k);
      if (out_residual != nullptr) (*out_residual)(i, k) = r;
      rr += r * r;
      hh += h(i, k) * h(i, k);
    }
    const double rel = std::sqrt(rr) / std::max(std::sqrt(hh), 1e-300);
    worst = std::max(worst, rel);
  }
  return worst;
}

}  // namespace

la::Matrix dual_gradient_v(const la::Matrix& x, const la::Matrix& h,
                           const std::vector<double>& feature_weights, double gamma,
                           const la::Matrix& v) {
  std::vector<int> active;
  for (std::size_t j = 0; j < feature_weights.size(); ++j)
    if (feature_weights[j] != 0.0) active.push_back(static_cast<int>(j));
  const la::Matrix mv = apply_system(x, active, feature_weights, gamma, v);
  la::Matrix g(h.rows(), h.cols());
  for (std::size_t i = 0; i < g.size(); ++i) g.data()[i] = h.data()[i] - mv.data()[i];
  return g;
}

la::Matrix solve_dual_v(const la::Matrix& x, const la::Matrix& h,
                        const std::vector<double>& feature_weights, double gamma,
                        double linear_solver_tol) {
  const std::size_t d = x.rows();
  const std::size_t n = x.cols();
  const std::size_t c = h.cols();
  if (feature_weights.size() != d) throw ConfigError("feature weight length mismatch");
  if (h.rows() != n) throw ConfigError("target matrix row count mismatch");

  std::vector<int> active;
  for (std::size_t j = 0; j < d; ++j)
    if (feature_weights[j] > 0.0) active.push_back(static_cast<int>(j));
  const std::size_t s = active.size();

  if (s == 0) return h;  // system is the identity

  std::function<la::Matrix(const la::Matrix&)> direct;

  if (2 * s <= n && s <= 512) {
    // Woodbury route: factor the s x s capacitance I + C C^T with
    // C = diag(sqrt(w/gamma)) X_active.
    la::Matrix cmat(s, n);
    for (std::size_t a = 0; a < s; ++a) {
      const double* xj = x.row(static_cast<std::size_t>(active[a]));
      const double f = std::sqrt(feature_weights[static_cast<std::size_t>(active[a])] / gamma);
      for (std::size_t i = 0; i < n; ++i) cmat(a, i) = f * xj[i];
    }
    la::Matrix cap(s, s);
    for (std::size_t a = 0; a < s; ++a) {
      for (std::size_t b = a; b < s; ++b) {
        const double v = kernels::dot(cmat.row(a), cmat.row(b), n);
        cap(a, b) = v;
        cap(b, a) = v;
      }
      cap(a, a) += 1.0;
    }
    if (!la::cholesky_factor(cap)) throw SolverError("capacitance factorization failed");
    direct = [cmat = std::move(cmat), cap = std::move(cap), s, n, c](const la::Matrix& rhs) {
      const la::Matrix rt = la::transpose(rhs);  // c x n
      la::Matrix z(s, c);
      for (std::size_t a = 0; a < s; ++a)
        for (std::size_t k = 0; k < c; ++k) z(a, k) = kernels::dot(cmat.row(a), rt.row(k), n);
      la::cholesky_solve_in_place(cap, z);
      la::Matrix vt = rt;
      for (std::size_t a = 0; a < s; ++a)
        for (std::size_t k = 0; k < c; ++k) kernels::axpy(-z(a, k), cmat.row(a), vt.row(k), n);
      return la::transpose(vt);
    };
  } else if (n <= 512) {
    la::Matrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    for (int j : active) {
      const double* xj = x.row(static_cast<std::size_t>(j));
      const double scale = feature_weights[static_cast<std::size_t>(j)] / gamma;
      for (std::size_t i = 0; i < n; ++i) kernels::axpy(scale * xj[i], xj, m.row(i), n);
    }
    if (!la::cholesky_factor(m)) throw SolverError("dual system factorization failed");
    direct = [m = std::move(m)](const la::Matrix& rhs) {
      la::Matrix v = rhs;
      la::cholesky_solve_in_place(m, v);
      return v;
    };
  } else {
    // CG per column through the row-space operator.
    la::Matrix v(n, c);
    std::vector<double> b(n), xcol(n, 0.0);
    const auto apply_col = [&](const double* in, double* out) {
      std::copy(in, in + n, out);
      for (int j : active) {
        const double* xj = x.row(static_cast<std::size_t>(j));
        const double z = kernels::dot(xj, in, n);
        kernels::axpy(feature_weights[static_cast<std::size_t>(j)] / gamma * z, xj, out, n);
      }
    };
    const int max_iter = static_cast<int>(10 * n + 200);
    for (std::size_t k = 0; k < c; ++k) {
      for (std::size_t i = 0; i < n; ++i) b[i] = h(i, k);
      std::fill(xcol.begin(), xcol.end(), 0.0);
      const la::CgResult r =
          la::cg_solve(apply_col, std::span<const double>(b), std::span<double>(xcol),
                       linear_solver_tol, max_iter);
      if (!r.converged)
        throw SolverError("conjugate gradient did not converge", r.rel_residual);
      for (std::size_t i = 0; i < n; ++i) v(i, k) = xcol[i];
    }
    return v;
  }

  la::Matrix v = direct(h);
  la::Matrix residual;
  double rel = system_residual(x, active, feature_weights, gamma, v, h, &residual);
  if (rel > linear_solver_tol) {
    // one round of iterative refinement before giving up
    const la::Matrix correction = direct(residual);
    for (std::size_t i = 0; i < v.size(); ++i) v.data()[i] += correction.data()[i];
    rel = system_residual(x, active, feature_weights, gamma, v, h, nullptr);
    if (rel > linear_solver_tol)
      throw SolverError("dual linear system residual too large", rel);
  }
  return v;
}

la::Matrix solve_dual_v(const la::Matrix& x, const la::Matrix& h, const ConstraintSet& cs,
                        double gamma, double linear_solver_tol) {
  return solve_dual_v(x, h, mix_feature_weights(cs, x.rows()), gamma, linear_solver_tol);
}

la::Matrix recover_primal_w(const la::Matrix& v, const SelectionIndicator& p, const la::Matrix& x,
                            double gamma) {
  const std::size_t d = x.rows();
  const std::size_t n = x.cols();
  const std::size_t c = v.cols();
  const la::Matrix vt = la::transpose(v);
  la::Matrix w(d, c);
  for (std::size_t j = 0; j < d; ++j) {
    if (!p.bits[j]) continue;  // unselected rows stay exactly zero
    for (std::size_t k = 0; k < c; ++k)
      w(j, k) = kernels::dot(x.row(j), vt.row(k), n) / gamma;
  }
  return w;
}

std::vector<double> lambda_gradient(const std::vector<SelectionIndicator>& constraints,
                                    const la::Matrix& v, const la::Matrix& x, double gamma) {
  const std::vector<double> s = row_scores(x, v);
  std::vector<double> grad(constraints.size(), 0.0);
  for (std::size_t t = 0; t < constraints.size(); ++t) {
    double acc = 0.0;
    for (std::size_t j = 0; j < s.size(); ++j)
      if (constraints[t].bits[j]) acc += s[j];
    grad[t] = -acc / (2.0 * gamma);
  }
  return grad;
}

std::vector<double> project_simplex(const std::vector<double>& v) {
  const std::size_t n = v.size();
  std::vector<double> u(v);
  std::sort(u.begin(), u.end(), std::greater<>());
  double cumulative = 0.0;
  double tau = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    cumulative += u[i];
    const double candidate = (cumulative - 1.0) / static_cast<double>(i + 1);
    if (u[i] - candidate > 0.0) tau = candidate;
  }
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = std::max(v[i] - tau, 0.0);
  return out;
}

InnerResult inner_mkl(const std::vector<SelectionIndicator>& constraints, const la::Matrix& x,
                      const la::Matrix& h, double gamma, const GfsConfig& cfg,
                      const std::vector<double>* initial_weights) {
  const std::size_t t_count = constraints.size();
  if (t_count == 0) throw ConfigError("inner solve needs at least one constraint");

  std::vector<double> lambda;
  if (initial_weights != nullptr) {
    if (initial_weights->size() != t_count)
      throw ConfigError("initial weight length mismatch");
    lambda = project_simplex(*initial_weights);
  } else {
    lambda.assign(t_count, 1.0 / static_cast<double>(t_count));
  }

  ConstraintSet cs{constraints, lambda};
  la::Matrix v = solve_dual_v(x, h, cs, gamma, cfg.linear_solver_tol);
  double objective = 0.5 * la::frob_inner(h, v);

  InnerResult res;
  res.iterations = 0;

  for (int it = 1; it <= cfg.inner_max_iter; ++it) {
    res.iterations = it;
    if (t_count == 1) break;  // one-point simplex, nothing to update

    const std::vector<double> grad = lambda_gradient(constraints, v, x, gamma);

    bool accepted = false;
    std::vector<double> lambda_next;
    la::Matrix v_next;
    double objective_next = 0.0;
    double step = 1.0;
    for (int bt = 0; bt <= 30; ++bt) {
      std::vector<double> trial(t_count);
      for (std::size_t t = 0; t < t_count; ++t) trial[t] = lambda[t] - step * grad[t];
      trial = project_simplex(trial);

      double move = 0.0, descent = 0.0;
      for (std::size_t t = 0; t < t_count; ++t) {
        const double dlt = trial[t] - lambda[t];
        move += std::abs(dlt);
        descent += grad[t] * dlt;
      }
      if (move <= 1e-14) break;  // projected step is a fixed point

      cs.weights = trial;
      la::Matrix v_trial = solve_dual_v(x, h, cs, gamma, cfg.linear_solver_tol);
      const double obj_trial = 0.5 * la::frob_inner(h, v_trial);
      if (obj_trial <= objective + 1e-4 * descent) {
        accepted = true;
        lambda_next = std::move(trial);
        v_next = std::move(v_trial);
        objective_next = obj_trial;
        break;
      }
      step *= 0.5;
    }

    if (!accepted) break;  // stationary point of the projected step

    const double change = std::abs(objective_next - objective) / std::max(1.0, std::abs(objective));
    lambda = std::move(lambda_next);
    v = std::move(v_next);
    objective = objective_next;
    if (change < cfg.inner_tol) break;
  }

  res.v = std::move(v);
  res.weights = std::move(lambda);
  res.objective = objective;
  return res;
}

SelectionIndicator top_m_indicator(const std::vector<double>& scores, int m) {
  const std::size_t d = scores.size();
  if (m < 1 || static_cast<std::size_t>(m) > d) throw ConfigError("indicator m out of range");
  std::vector<int> order(d);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    const double sa = scores[static_cast<std::size_t>(a)];
    const double sb = scores[static_cast<std::size_t>(b)];
    if (sa != sb) return sa > sb;
    return a < b;
  });
  order.resize(static_cast<std::size_t>(m));
  std::sort(order.begin(), order.end());
  return SelectionIndicator::from_indices(d, order);
}

SelectionIndicator most_violated(const la::Matrix& v, const la::Matrix& x, int m) {
  return top_m_indicator(row_scores(x, v), m);
}

GfsResult cutting_plane(const Dataset& ds, const GfsConfig& cfg) {
  cfg.validate();
  const la::Matrix& x = ds.features;
  const std::size_t d = ds.dim();
  const std::size_t n = ds.samples();
  if (static_cast<std::size_t>(cfg.m) > d) throw ConfigError("m exceeds feature count");

  const la::Matrix h = build_target_matrix(ds.labels, ds.num_classes);
  const auto c = static_cast<std::size_t>(ds.num_classes);

  la::Matrix v0(n, c);
  v0.fill(1.0 / static_cast<double>(n));

  GfsResult result;
  result.omega.constraints.push_back(most_violated(v0, x, cfg.m));
  result.trace.reason = StopReason::iteration_limit;

  double lower = -kInf;
  double upper = kInf;

  for (int t = 1; t <= cfg.outer_max_iter; ++t) {
    const InnerResult inner =
        inner_mkl(result.omega.constraints, x, h, cfg.gamma, cfg);
    if (!std::isfinite(inner.objective))
      throw SolverError("non-finite inner objective");
    result.omega.weights = inner.weights;
    result.v = inner.v;

    // lower bound candidate from the newest constraint alone
    const SelectionIndicator& newest = result.omega.constraints.back();
    {
      std::vector<double> w(d, 0.0);
      for (std::size_t j = 0; j < d; ++j) w[j] = newest.bits[j] ? 1.0 : 0.0;
      const la::Matrix v_single = solve_dual_v(x, h, w, cfg.gamma, cfg.linear_solver_tol);
      lower = std::max(lower, -0.5 * la::frob_inner(h, v_single));
    }

    const std::vector<double> s = row_scores(x, inner.v);
    std::vector<double> top(s);
    std::nth_element(top.begin(), top.begin() + (cfg.m - 1), top.end(), std::greater<>());
    double top_sum = 0.0;
    for (int j = 0; j < cfg.m; ++j) top_sum += top[static_cast<std::size_t>(j)];
    const double upper_candidate = -la::frob_inner(inner.v, h) +
                                   0.5 * la::frob_norm_sq(inner.v) +
                                   top_sum / (2.0 * cfg.gamma);
    upper = std::min(upper, upper_candidate);

    result.trace.entries.push_back({newest, -inner.objective, lower, upper, inner.iterations,
                                    inner.objective});

    const SelectionIndicator next = top_m_indicator(s, cfg.m);
    if (std::find(result.omega.constraints.begin(), result.omega.constraints.end(), next) !=
        result.omega.constraints.end()) {
      result.trace.reason = StopReason::duplicate_constraint;
      break;
    }
    // violation of the would-be constraint, measured against the current
    // inner value: (-f(V, p_new)) - (-objective)
    const double gap = inner.objective + upper_candidate;
    if (gap <= cfg.outer_tol * std::max(1.0, std::abs(inner.objective))) {
      result.trace.reason = StopReason::small_gap;
      break;
    }
    if (t == cfg.outer_max_iter) break;
    result.omega.constraints.push_back(next);
  }
  return result;
}

std::vector<int> selected_features(const ConstraintSet& cs) {
  if (cs.constraints.empty()) throw ConfigError("empty constraint set");
  const std::size_t d = cs.constraints.front().bits.size();
  std::vector<std::uint8_t> mask(d, 0);
  for (const SelectionIndicator& p : cs.constraints)
    for (std::size_t j = 0; j < d; ++j) mask[j] |= p.bits[j];
  std::vector<int> out;
  for (std::size_t j = 0; j < d; ++j)
    if (mask[j]) out.push_back(static_cast<int>(j));
  return out;
}

SelectKResult select_k_features_detailed(const Dataset& ds, double gamma, int k,
                                         const GfsConfig& base) {
  const auto d = static_cast<int>(ds.dim());
  if (k < 1 || k > d) throw ConfigError("k must be in [1, d]");

  SelectKResult out;
  if (k == d) {
    out.selected.resize(static_cast<std::size_t>(d));
    std::iota(out.selected.begin(), out.selected.end(), 0);
    out.final_m = d;
    return out;
  }

  for (int m = 1; m <= d; ++m) {
    GfsConfig cfg = base;
    cfg.gamma = gamma;
    cfg.m = m;
    GfsResult res = cutting_plane(ds, cfg);
    std::vector<int> pool = selected_features(res.omega);
    if (static_cast<int>(pool.size()) >= k || m == d) {
      if (static_cast<int>(pool.size()) > k) {
        const std::vector<double> s = row_scores(ds.features, res.v);
        std::stable_sort(pool.begin(), pool.end(), [&](int a, int b) {
          const double sa = s[static_cast<std::size_t>(a)];
          const double sb = s[static_cast<std::size_t>(b)];
          if (sa != sb) return sa > sb;
          return a < b;
        });
        pool.resize(static_cast<std::size_t>(k));
        std::sort(pool.begin(), pool.end());
      }
      out.selected = std::move(pool);
      out.final_m = m;
      out.trace = std::move(res.trace);
      return out;
    }
  }
  throw SolverError("feature schedule failed to reach k");  // unreachable
}

std::vector<int> select_k_features(const Dataset& ds, double gamma, int k,
                                   const GfsConfig& base) {
  return select_k_features_detailed(ds, gamma, k, base).selected;
}

double evaluate_criterion_ratio_trace(const Dataset& ds, const SelectionIndicator& p,
                                      double gamma) {
  if (!(gamma > 0.0)) throw ConfigError("gamma must be positive");
  const Dataset sub = ds.take_features(p.indices());
  const ClassStats st = class_stats(sub);
  const ScatterPair sp = scatter_matrices(sub, st);
  const std::size_t m = sub.dim();

  la::Matrix a = sp.total;
  for (std::size_t i = 0; i < m; ++i) a(i, i) += gamma;
  if (!la::cholesky_factor(a)) throw SolverError("regularized scatter not positive definite");

  la::Matrix deltas(m, static_cast<std::size_t>(ds.num_classes));
  for (int k = 0; k < ds.num_classes; ++k)
    for (std::size_t j = 0; j < m; ++j)
      deltas(j, static_cast<std::size_t>(k)) =
          st.class_means(j, static_cast<std::size_t>(k)) - st.overall_mean[j];

  la::Matrix solved = deltas;
  la::cholesky_solve_in_place(a, solved);

  double value = 0.0;
  for (int k = 0; k < ds.num_classes; ++k) {
    double acc = 0.0;
    for (std::size_t j = 0; j < m; ++j)
      acc += deltas(j, static_cast<std::size_t>(k)) * solved(j, static_cast<std::size_t>(k));
    value += static_cast<double>(st.counts[static_cast<std::size_t>(k)]) * acc;
  }
  return value;
}

}  // namespace gfs
