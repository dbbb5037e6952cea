#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace gfs::la {

// Dense row-major matrix. Rows are contiguous so the kernel layer can
// stream them directly.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), v_(rows * cols, 0.0) {}

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t size() const { return v_.size(); }

  double& operator()(std::size_t i, std::size_t j) { return v_[i * cols_ + j]; }
  double operator()(std::size_t i, std::size_t j) const { return v_[i * cols_ + j]; }

  double* row(std::size_t i) { return v_.data() + i * cols_; }
  const double* row(std::size_t i) const { return v_.data() + i * cols_; }
  std::span<double> row_span(std::size_t i) { return {row(i), cols_}; }
  std::span<const double> row_span(std::size_t i) const { return {row(i), cols_}; }

  double* data() { return v_.data(); }
  const double* data() const { return v_.data(); }

  void fill(double x) { v_.assign(v_.size(), x); }

  bool operator==(const Matrix& o) const = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> v_;
};

Matrix transpose(const Matrix& a);

// C = A * B, computed row by row against a transposed copy of B.
Matrix matmul(const Matrix& a, const Matrix& b);

// tr(A^T B) = elementwise inner product.
double frob_inner(const Matrix& a, const Matrix& b);
double frob_norm_sq(const Matrix& a);

// In-place lower Cholesky of a symmetric positive definite matrix.
// Returns false when a non-positive pivot is hit.
bool cholesky_factor(Matrix& a);

// Solves L L^T X = B with B overwritten by X (B is n x k).
void cholesky_solve_in_place(const Matrix& chol, Matrix& b);

struct CgResult {
  int iterations = 0;
  double rel_residual = 0.0;
  bool converged = false;
};

// Conjugate gradient for an SPD operator given as y = A(x). Solves a
// single right-hand side; x holds the initial guess on entry.
template <typename ApplyFn>
CgResult cg_solve(ApplyFn&& apply, std::span<const double> b, std::span<double> x, double rel_tol,
                  int max_iter);

}  // namespace gfs::la

#include "gfs/matrix_cg.inl"
