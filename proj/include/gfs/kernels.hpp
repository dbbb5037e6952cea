#pragma once

#include <cstddef>

namespace gfs::kernels {

// Dispatch table for the data-parallel inner loops everything else is
// built on. One scalar reference implementation exists for every entry;
// vector variants must agree with it up to floating-point reassociation.
struct Ops {
  // sum_i a[i]*b[i]
  double (*dot)(const double* a, const double* b, std::size_t n);
  // sum_i a[i]^2
  double (*nrm2sq)(const double* a, std::size_t n);
  // sum_i (a[i]-b[i])^2
  double (*sqdist)(const double* a, const double* b, std::size_t n);
  // y[i] += alpha * x[i]
  void (*axpy)(double alpha, const double* x, double* y, std::size_t n);
  const char* name;
};

const Ops& scalar_ops();

// Null when the binary was not built for x86-64 or the CPU lacks AVX2+FMA.
const Ops* avx2_ops_or_null();

// Table selected at first use: AVX2 when available, otherwise scalar.
// GFS_KERNEL_ISA=scalar|avx2 in the environment overrides the choice
// (falls back to scalar when the requested ISA is unavailable).
const Ops& active();

inline double dot(const double* a, const double* b, std::size_t n) {
  return active().dot(a, b, n);
}
inline double nrm2sq(const double* a, std::size_t n) { return active().nrm2sq(a, n); }
inline double sqdist(const double* a, const double* b, std::size_t n) {
  return active().sqdist(a, b, n);
}
inline void axpy(double alpha, const double* x, double* y, std::size_t n) {
  active().axpy(alpha, x, y, n);
}

}  // namespace gfs::kernels
