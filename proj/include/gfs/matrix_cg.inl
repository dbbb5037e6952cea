#pragma once

#include <cmath>

#include "gfs/kernels.hpp"

namespace gfs::la {

template <typename ApplyFn>
CgResult cg_solve(ApplyFn&& apply, std::span<const double> b, std::span<double> x, double rel_tol,
                  int max_iter) {
  const std::size_t n = b.size();
  std::vector<double> r(n), p(n), ap(n);

  apply(x.data(), ap.data());
  for (std::size_t i = 0; i < n; ++i) r[i] = b[i] - ap[i];
  p.assign(r.begin(), r.end());

  const double bnorm = std::sqrt(kernels::nrm2sq(b.data(), n));
  const double stop = rel_tol * (bnorm > 0.0 ? bnorm : 1.0);

  double rr = kernels::nrm2sq(r.data(), n);
  CgResult res;
  if (std::sqrt(rr) <= stop) {
    res.converged = true;
    res.rel_residual = bnorm > 0.0 ? std::sqrt(rr) / bnorm : std::sqrt(rr);
    return res;
  }

  for (int it = 0; it < max_iter; ++it) {
    apply(p.data(), ap.data());
    const double pap = kernels::dot(p.data(), ap.data(), n);
    if (pap <= 0.0) break;  // operator lost positive definiteness
    const double alpha = rr / pap;
    kernels::axpy(alpha, p.data(), x.data(), n);
    kernels::axpy(-alpha, ap.data(), r.data(), n);
    const double rr_new = kernels::nrm2sq(r.data(), n);
    res.iterations = it + 1;
    if (std::sqrt(rr_new) <= stop) {
      rr = rr_new;
      res.converged = true;
      break;
    }
    const double beta = rr_new / rr;
    rr = rr_new;
    for (std::size_t i = 0; i < n; ++i) p[i] = r[i] + beta * p[i];
  }
  res.rel_residual = bnorm > 0.0 ? std::sqrt(rr) / bnorm : std::sqrt(rr);
  return res;
}

}  // namespace gfs::la
