#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>

#include "doctest.h"
#include "meshopt/complex_matrix.hpp"
#include "meshopt/network.hpp"
#include "test_support.hpp"

using namespace meshopt;

TEST_CASE("eigh on diagonal matrices") {
  ComplexMatrix d(2, 2);
  d(0, 0) = 3.0;
  d(1, 1) = 1.0;
  const EigenDecomposition ed = eigh(HermitianMatrix(d));
  CHECK(ed.eigenvalues[0] == doctest::Approx(3.0).epsilon(1e-12));
  CHECK(ed.eigenvalues[1] == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(std::abs(ed.basis(0, 0)) == doctest::Approx(1.0));
  CHECK(std::abs(ed.basis(1, 1)) == doctest::Approx(1.0));
  CHECK(std::abs(ed.basis(0, 1)) == doctest::Approx(0.0));
}

TEST_CASE("eigh on identity") {
  for (int n : {1, 3, 5}) {
    const EigenDecomposition ed = eigh(HermitianMatrix::identity(n));
    for (double lam : ed.eigenvalues) CHECK(lam == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("eigh on [[2, i], [-i, 2]] gives 3 and 1") {
  // Roots of lambda^2 - 4 lambda + 3.
  ComplexMatrix m(2, 2);
  m(0, 0) = 2.0;
  m(0, 1) = Complex(0, 1);
  m(1, 0) = Complex(0, -1);
  m(1, 1) = 2.0;
  const EigenDecomposition ed = eigh(HermitianMatrix(m));
  CHECK(ed.eigenvalues[0] == doctest::Approx(3.0).epsilon(1e-10));
  CHECK(ed.eigenvalues[1] == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("non-square input is rejected") {
  CHECK_THROWS_AS(HermitianMatrix(ComplexMatrix(2, 3)), std::invalid_argument);
}

TEST_CASE("reconstruction, unitarity, ordering over random matrices") {
  Rng rng(123);
  for (int trial = 0; trial < 1000; ++trial) {
    const int n = 1 + trial % 8;
    const HermitianMatrix a = testsup::random_hermitian(rng, n, 1.0 + trial % 5);
    const EigenDecomposition ed = eigh(a);

    const ComplexMatrix recon = ed.reconstruct();
    const double rel =
        (recon - a.matrix()).frobenius_norm() / std::max(a.matrix().frobenius_norm(), 1e-300);
    CHECK(rel <= 1e-9);

    const ComplexMatrix gram = ed.basis.adjoint() * ed.basis;
    CHECK((gram - ComplexMatrix::identity(n)).frobenius_norm() <= 1e-9);

    for (int i = 0; i + 1 < n; ++i) CHECK(ed.eigenvalues[i] >= ed.eigenvalues[i + 1]);
  }
}

TEST_CASE("psd_clip spec values") {
  ComplexMatrix d(2, 2);
  d(0, 0) = 4.0;
  d(1, 1) = -2.0;
  const HermitianMatrix clipped = psd_clip(HermitianMatrix(d));
  CHECK(clipped(0, 0).real() == doctest::Approx(4.0).epsilon(1e-10));
  CHECK(clipped(1, 1).real() == doctest::Approx(0.0));
  CHECK(std::abs(clipped(0, 1)) <= 1e-12);

  // [[0,1],[1,0]]: keep the +1 eigenvector outer product.
  ComplexMatrix x(2, 2);
  x(0, 1) = 1.0;
  x(1, 0) = 1.0;
  const HermitianMatrix half = psd_clip(HermitianMatrix(x));
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j)
      CHECK(half(i, j).real() == doctest::Approx(0.5).epsilon(1e-10));
}

TEST_CASE("psd_clip fixes PSD input and is idempotent") {
  Rng rng(77);
  for (int trial = 0; trial < 50; ++trial) {
    const int n = 2 + trial % 4;
    const HermitianMatrix p = testsup::random_psd(rng, n);
    CHECK(frobenius_dist(psd_clip(p), p) <= 1e-9 * std::max(1.0, p.frobenius_norm()));

    const HermitianMatrix h = testsup::random_hermitian(rng, n);
    const HermitianMatrix once = psd_clip(h);
    CHECK(frobenius_dist(psd_clip(once), once) <= 1e-9 * std::max(1.0, once.frobenius_norm()));
  }
}

TEST_CASE("frobenius_dist spec values") {
  Rng rng(5);
  const HermitianMatrix a = testsup::random_hermitian(rng, 3);
  CHECK(frobenius_dist(a, a) == 0.0);

  ComplexMatrix d1(2, 2), d0(2, 2);
  d1(0, 0) = 1.0;
  CHECK(frobenius_dist(HermitianMatrix(d1), HermitianMatrix(d0)) == doctest::Approx(1.0));

  const HermitianMatrix i2 = HermitianMatrix::identity(2);
  const HermitianMatrix neg = -1.0 * HermitianMatrix::identity(2);
  CHECK(frobenius_dist(i2, neg) == doctest::Approx(std::sqrt(8.0)));

  CHECK_THROWS_AS(frobenius_dist(HermitianMatrix(2), HermitianMatrix(3)),
                  std::invalid_argument);
}

TEST_CASE("logdet2_I_plus spec values") {
  CHECK(logdet2_I_plus(HermitianMatrix(2)) == doctest::Approx(0.0));

  ComplexMatrix d(2, 2);
  d(0, 0) = 1.0;
  d(1, 1) = 3.0;
  CHECK(logdet2_I_plus(HermitianMatrix(d)) == doctest::Approx(3.0).epsilon(1e-12));

  CHECK(logdet2_I_plus(HermitianMatrix::scaled_identity(1, 3.0)) ==
        doctest::Approx(2.0).epsilon(1e-12));

  CHECK_THROWS_AS(logdet2_I_plus(HermitianMatrix::scaled_identity(2, -0.5)), NotPsdError);
}

TEST_CASE("logdet2_I_plus matches direct determinant on dims <= 3") {
  Rng rng(2024);
  for (int trial = 0; trial < 200; ++trial) {
    const int n = 1 + trial % 3;
    const HermitianMatrix a = testsup::random_psd(rng, n, 1.0 + trial % 3);
    ComplexMatrix ipa = ComplexMatrix::identity(n) + a.matrix();
    const double direct = std::log2(testsup::det_small(ipa).real());
    CHECK(logdet2_I_plus(a) == doctest::Approx(direct).epsilon(1e-9));
  }
}
