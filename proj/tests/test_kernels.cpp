#include <doctest.h>

#include <cmath>
#include <cstring>
#include <vector>

#include "gfs/kernels.hpp"
#include "gfs/rng.hpp"

namespace {

std::vector<double> random_vec(std::size_t n, gfs::Rng& rng) {
  std::vector<double> v(n);
  for (double& x : v) x = rng.normal();
  return v;
}

// lengths covering every remainder path of the 8/4/1 unrolling
const std::size_t kLengths[] = {0, 1, 2, 3, 4, 5, 7, 8, 9, 11, 15, 16, 17, 31, 64, 100, 1023};

}  // namespace

TEST_CASE("scalar kernels match naive loops") {
  gfs::Rng rng(11);
  const auto& ops = gfs::kernels::scalar_ops();
  for (std::size_t n : kLengths) {
    const auto a = random_vec(n, rng);
    const auto b = random_vec(n, rng);
    double dot = 0.0, nrm = 0.0, sq = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      dot += a[i] * b[i];
      nrm += a[i] * a[i];
      const double d = a[i] - b[i];
      sq += d * d;
    }
    CHECK(ops.dot(a.data(), b.data(), n) == doctest::Approx(dot).epsilon(1e-14));
    CHECK(ops.nrm2sq(a.data(), n) == doctest::Approx(nrm).epsilon(1e-14));
    CHECK(ops.sqdist(a.data(), b.data(), n) == doctest::Approx(sq).epsilon(1e-14));

    auto y = random_vec(n, rng);
    auto y_ref = y;
    ops.axpy(0.37, a.data(), y.data(), n);
    for (std::size_t i = 0; i < n; ++i) y_ref[i] += 0.37 * a[i];
    for (std::size_t i = 0; i < n; ++i) CHECK(y[i] == doctest::Approx(y_ref[i]).epsilon(1e-14));
  }
}

TEST_CASE("avx2 kernels agree with the scalar reference") {
  const auto* vec = gfs::kernels::avx2_ops_or_null();
  if (vec == nullptr) return;  // host without AVX2
  const auto& ref = gfs::kernels::scalar_ops();

  gfs::Rng rng(23);
  for (std::size_t n : kLengths) {
    for (int rep = 0; rep < 4; ++rep) {
      const auto a = random_vec(n, rng);
      const auto b = random_vec(n, rng);
      const double scale = static_cast<double>(n) + 1.0;
      CHECK(vec->dot(a.data(), b.data(), n) ==
            doctest::Approx(ref.dot(a.data(), b.data(), n)).epsilon(1e-13 * scale));
      CHECK(vec->nrm2sq(a.data(), n) ==
            doctest::Approx(ref.nrm2sq(a.data(), n)).epsilon(1e-13 * scale));
      CHECK(vec->sqdist(a.data(), b.data(), n) ==
            doctest::Approx(ref.sqdist(a.data(), b.data(), n)).epsilon(1e-13 * scale));

      auto y1 = random_vec(n, rng);
      auto y2 = y1;
      vec->axpy(-1.25, a.data(), y1.data(), n);
      ref.axpy(-1.25, a.data(), y2.data(), n);
      // fma vs separate multiply-add differ by at most one rounding
      for (std::size_t i = 0; i < n; ++i)
        CHECK(y1[i] == doctest::Approx(y2[i]).epsilon(1e-15));
    }
  }
}

TEST_CASE("active dispatch names a known table") {
  const auto& ops = gfs::kernels::active();
  const bool known = std::strcmp(ops.name, "scalar") == 0 || std::strcmp(ops.name, "avx2") == 0;
  CHECK(known);
  const double a[3] = {1.0, 2.0, 3.0};
  CHECK(gfs::kernels::nrm2sq(a, 3) == doctest::Approx(14.0));
}
