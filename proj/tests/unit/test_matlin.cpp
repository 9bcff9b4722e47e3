#include <cmath>
#include <limits>

#include <doctest.h>

#include "robustdx/matlin.hpp"
#include "support/expect.hpp"
#include "support/generators.hpp"

using namespace robustdx;

namespace {

Matrix tridiagonal(Index n, double diag, double off) {
  Matrix m = Matrix::Zero(n, n);
  for (Index i = 0; i < n; ++i) {
    m(i, i) = diag;
    if (i + 1 < n) m(i, i + 1) = m(i + 1, i) = off;
  }
  return m;
}

}  // namespace

TEST_CASE("SymMatrix symmetrizes and rejects gross asymmetry") {
  Matrix m(2, 2);
  m << 1.0, 2.0, 2.0 + 1e-12, 3.0;
  const SymMatrix s(m);
  CHECK(s(0, 1) == s(1, 0));

  m(1, 0) = 2.5;
  CHECK_ERROR_CODE(SymMatrix(m), ErrorCode::NotSymmetric);
  CHECK_ERROR_CODE(SymMatrix(Matrix(2, 3)), ErrorCode::DimMismatch);
}

TEST_CASE("sym_eigen closed forms") {
  const EigenDecomposition id = sym_eigen(SymMatrix::identity(3));
  for (Index i = 0; i < 3; ++i) CHECK(id.values(i) == doctest::Approx(1.0));

  Matrix m(2, 2);
  m << 2, 1, 1, 2;
  const EigenDecomposition ed = sym_eigen(SymMatrix(m));
  CHECK(ed.values(0) == doctest::Approx(3.0).epsilon(1e-14));
  CHECK(ed.values(1) == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("sym_eigen matches the tridiagonal Toeplitz formula") {
  // eigenvalues of tridiag(b, a, b) of size n: a + 2b cos(k pi / (n + 1))
  const EigenDecomposition ed = sym_eigen(SymMatrix(tridiagonal(4, 1.0, 0.4)));
  for (int k = 1; k <= 4; ++k) {
    CHECK(ed.values(k - 1) == doctest::Approx(1.0 + 0.8 * std::cos(k * M_PI / 5.0)).epsilon(1e-13));
  }
}

TEST_CASE("sym_eigen rejects non-finite input") {
  Matrix m = Matrix::Identity(3, 3);
  m(1, 1) = std::numeric_limits<double>::quiet_NaN();
  CHECK_ERROR_CODE(sym_eigen(SymMatrix(m)), ErrorCode::NonFinite);
  CHECK_ERROR_CODE(matrix_norm(SymMatrix(m), NormKind::RowSumInf), ErrorCode::NonFinite);
}

TEST_CASE("property: eigendecomposition reconstructs and is orthonormal") {
  Rng rng(1);
  for (int trial = 0; trial < 500; ++trial) {
    const Index n = testgen::uniform_int(rng, 1, 12);
    const SymMatrix s = trial % 2 ? testgen::random_symmetric(rng, n) : testgen::random_psd(rng, n);
    const EigenDecomposition ed = sym_eigen(s);
    const Matrix& v = ed.vectors;
    const double rec = (v * ed.values.asDiagonal() * v.transpose() - s.matrix()).norm();
    CHECK(rec <= 1e-10 * std::max(1.0, s.frobenius()));
    CHECK((v.transpose() * v - Matrix::Identity(n, n)).norm() <= 1e-10);
    for (Index i = 1; i < n; ++i) CHECK(ed.values(i - 1) >= ed.values(i));
  }
}

TEST_CASE("matrix_norm examples") {
  for (NormKind k : {NormKind::Spectral, NormKind::RowSumInf, NormKind::ColSumOne}) {
    CHECK(matrix_norm(SymMatrix::identity(5), k) == 1.0);
  }
  Matrix m(2, 2);
  m << 1, 0.5, 0.5, 1;
  CHECK(matrix_norm(SymMatrix(m), NormKind::Spectral) == doctest::Approx(1.5).epsilon(1e-14));
  CHECK(matrix_norm(SymMatrix(m), NormKind::RowSumInf) == 1.5);

  // Spectral is the largest |eigenvalue|, also for indefinite input.
  CHECK(matrix_norm(SymMatrix::diagonal(Vector::Ones(2) * -3.0), NormKind::Spectral) == doctest::Approx(3.0));
}

TEST_CASE("property: row and column sums bound the spectral norm of PSD matrices") {
  Rng rng(2);
  for (int trial = 0; trial < 1000; ++trial) {
    const Index n = testgen::uniform_int(rng, 1, 10);
    const SymMatrix c = testgen::random_psd(rng, n);
    const double spec = matrix_norm(c, NormKind::Spectral);
    CHECK(matrix_norm(c, NormKind::RowSumInf) >= spec - 1e-10);
    CHECK(matrix_norm(c, NormKind::ColSumOne) >= spec - 1e-10);
  }
}

TEST_CASE("is_psd and loewner_leq examples") {
  CHECK(is_psd(SymMatrix::identity(2), 0.0));
  Vector d(2);
  d << 1.0, -0.1;
  CHECK_FALSE(is_psd(SymMatrix::diagonal(d), 1e-10));
  CHECK(is_psd(SymMatrix(tridiagonal(5, 1.0, 0.4))));

  CHECK(loewner_leq(SymMatrix::identity(3), SymMatrix::identity(3, 2.0)));
  Vector a(2), b(2);
  a << 1, 3;
  b << 2, 2;
  CHECK_FALSE(loewner_leq(SymMatrix::diagonal(a), SymMatrix::diagonal(b)));
  CHECK_ERROR_CODE(loewner_leq(SymMatrix::identity(2), SymMatrix::identity(3)), ErrorCode::DimMismatch);
}

TEST_CASE("property: spectral bound equals Loewner bound") {
  Rng rng(3);
  for (int trial = 0; trial < 600; ++trial) {
    const Index n = testgen::uniform_int(rng, 1, 8);
    const SymMatrix c = testgen::random_psd(rng, n);
    for (double u : {0.5, 1.0, 2.0}) {
      const double eta2 = matrix_norm(c, NormKind::Spectral) * u;
      CHECK((matrix_norm(c, NormKind::Spectral) <= eta2) == loewner_leq(c, SymMatrix::identity(n, eta2)));
    }
  }
}

TEST_CASE("psd_sqrt") {
  CHECK(psd_sqrt(SymMatrix::identity(3)).matrix().isApprox(Matrix::Identity(3, 3)));
  Vector d(2);
  d << 4, 9;
  const SymMatrix r = psd_sqrt(SymMatrix::diagonal(d));
  CHECK(r(0, 0) == doctest::Approx(2.0));
  CHECK(r(1, 1) == doctest::Approx(3.0));
  CHECK(std::abs(r(0, 1)) < 1e-14);

  d << 1, -0.5;
  CHECK_ERROR_CODE(psd_sqrt(SymMatrix::diagonal(d)), ErrorCode::NotPSD);

  Rng rng(4);
  for (int trial = 0; trial < 200; ++trial) {
    const Index n = testgen::uniform_int(rng, 1, 8);
    const Matrix a = testgen::gaussian(rng, n, n);
    const SymMatrix s = symmetrize(a.transpose() * a);
    const SymMatrix root = psd_sqrt(s);
    CHECK((root.matrix() * root.matrix() - s.matrix()).norm() <= 1e-9 * std::max(1.0, s.frobenius()));
  }
}

TEST_CASE("spd_inverse refuses singular and ill-conditioned input") {
  Vector d(2);
  d << 1.0, 1e-14;
  CHECK_ERROR_CODE(spd_inverse(SymMatrix::diagonal(d), ErrorCode::SingularMoment), ErrorCode::SingularMoment);
  d << 2.0, 4.0;
  const SymMatrix inv = spd_inverse(SymMatrix::diagonal(d), ErrorCode::SingularCov);
  CHECK(inv(0, 0) == doctest::Approx(0.5));
  CHECK(inv(1, 1) == doctest::Approx(0.25));
}
