#include "gfs/matrix.hpp"

#include <cmath>
#include <stdexcept>

#include "gfs/kernels.hpp"

namespace gfs::la {

Matrix transpose(const Matrix& a) {
  Matrix t(a.cols(), a.rows());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) t(j, i) = a(i, j);
  return t;
}

Matrix matmul(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.rows()) throw std::invalid_argument("matmul: shape mismatch");
  const Matrix bt = transpose(b);
  Matrix c(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < bt.rows(); ++j)
      c(i, j) = kernels::dot(a.row(i), bt.row(j), a.cols());
  return c;
}

double frob_inner(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols())
    throw std::invalid_argument("frob_inner: shape mismatch");
  return kernels::dot(a.data(), b.data(), a.size());
}

double frob_norm_sq(const Matrix& a) { return kernels::nrm2sq(a.data(), a.size()); }

bool cholesky_factor(Matrix& a) {
  const std::size_t n = a.rows();
  if (a.cols() != n) throw std::invalid_argument("cholesky_factor: matrix not square");
  for (std::size_t j = 0; j < n; ++j) {
    double d = a(j, j) - kernels::nrm2sq(a.row(j), j);
    if (!(d > 0.0)) return false;
    d = std::sqrt(d);
    a(j, j) = d;
    for (std::size_t i = j + 1; i < n; ++i) {
      a(i, j) = (a(i, j) - kernels::dot(a.row(i), a.row(j), j)) / d;
    }
    for (std::size_t k = j + 1; k < n; ++k) a(j, k) = 0.0;
  }
  return true;
}

void cholesky_solve_in_place(const Matrix& chol, Matrix& b) {
  const std::size_t n = chol.rows();
  if (b.rows() != n) throw std::invalid_argument("cholesky_solve: shape mismatch");
  const std::size_t k = b.cols();
  // forward: L y = b
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < i; ++j) kernels::axpy(-chol(i, j), b.row(j), b.row(i), k);
    const double inv = 1.0 / chol(i, i);
    for (std::size_t c = 0; c < k; ++c) b(i, c) *= inv;
  }
  // backward: L^T x = y
  for (std::size_t ii = n; ii-- > 0;) {
    for (std::size_t j = ii + 1; j < n; ++j) kernels::axpy(-chol(j, ii), b.row(j), b.row(ii), k);
    const double inv = 1.0 / chol(ii, ii);
    for (std::size_t c = 0; c < k; ++c) b(ii, c) *= inv;
  }
}

}  // namespace gfs::la
