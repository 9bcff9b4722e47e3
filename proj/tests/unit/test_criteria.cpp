#include <cmath>

#include <doctest.h>

#include "robustdx/criteria.hpp"
#include "support/expect.hpp"
#include "support/generators.hpp"

using namespace robustdx;

namespace {

SymMatrix diag(std::initializer_list<double> values) {
  Vector d(static_cast<Index>(values.size()));
  Index i = 0;
  for (double v : values) d(i++) = v;
  return SymMatrix::diagonal(d);
}

std::vector<Criterion> all_criteria(const DesignSpace& space, Rng& rng) {
  const Index p = space.params();
  const Matrix g = testgen::gaussian(rng, p, p);
  return {Criterion::A(), Criterion::D(), Criterion::E(), Criterion::L(symmetrize(g.transpose() * g)),
          Criterion::I(space)};
}

}  // namespace

TEST_CASE("phi examples") {
  CHECK(phi(Criterion::A(), diag({1, 2, 3})) == doctest::Approx(6.0));
  CHECK(phi(Criterion::D(), diag({2, 3})) == doctest::Approx(6.0).epsilon(1e-14));
  CHECK(phi(Criterion::E(), diag({1, 4})) == doctest::Approx(4.0));
  const SymMatrix s = diag({0.5, 1.5, 2.0});
  CHECK(phi(Criterion::L(SymMatrix::identity(3)), s) == doctest::Approx(phi(Criterion::A(), s)));
  CHECK(phi(Criterion::D(), diag({1.0, 0.0})) == 0.0);
}

TEST_CASE("phi preconditions") {
  CHECK_ERROR_CODE(phi(Criterion::A(), diag({1.0, -1.0})), ErrorCode::NotPSD);
  CHECK_ERROR_CODE(Criterion::L(diag({1.0, -1.0})), ErrorCode::NotPSD);
  CHECK_ERROR_CODE(phi(Criterion::L(SymMatrix::identity(2)), SymMatrix::identity(3)), ErrorCode::DimMismatch);
}

TEST_CASE("design_loss examples") {
  Matrix x(2, 2);
  x << 1, -1, 1, 1;
  CHECK(design_loss(Criterion::A(), x, SymMatrix::identity(2)) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(design_loss(Criterion::A(), x, SymMatrix::identity(2, 2.5)) == doctest::Approx(2.5).epsilon(1e-15));
  for (double rho : {-0.9, -0.2, 0.4, 0.95}) {
    Matrix c(2, 2);
    c << 1, rho, rho, 1;
    CHECK(design_loss(Criterion::A(), x, SymMatrix(c)) == doctest::Approx(1.0).epsilon(1e-14));
  }
}

TEST_CASE("I-criterion is the integrated prediction variance") {
  Rng rng(30);
  for (int trial = 0; trial < 200; ++trial) {
    const Index p = testgen::uniform_int(rng, 1, 4);
    const DesignSpace space = testgen::random_space(rng, p, testgen::uniform_int(rng, static_cast<int>(p), 9));
    const SymMatrix s = testgen::random_psd(rng, p);
    double sum = 0.0;
    for (Index i = 0; i < space.size(); ++i) sum += space.regressor(i).dot(s.matrix() * space.regressor(i));
    CHECK(std::abs(phi(Criterion::I(space), s) - sum) <= 1e-10 * std::max(1.0, std::abs(sum)));
  }
}

TEST_CASE("monotone_pair_check examples") {
  CHECK(monotone_pair_check(Criterion::A(), SymMatrix::identity(2), SymMatrix::identity(2, 2.0)));
  Vector v(2);
  v << 0.3, -1.2;
  const SymMatrix bumped = SymMatrix::identity(2) + symmetrize(v * v.transpose());
  CHECK(monotone_pair_check(Criterion::D(), SymMatrix::identity(2), bumped));
  CHECK(phi(Criterion::D(), bumped) == doctest::Approx(1.0 + v.squaredNorm()).epsilon(1e-14));
  CHECK_FALSE(monotone_pair_check(Criterion::A(), SymMatrix::identity(2, 2.0), SymMatrix::identity(2)));
}

TEST_CASE("property: Loewner-ordered pairs keep their order under every criterion") {
  Rng rng(31);
  for (int trial = 0; trial < 1000; ++trial) {
    const Index p = testgen::uniform_int(rng, 1, 5);
    const DesignSpace space = testgen::random_space(rng, p, p + 2);
    const SymMatrix s1 = testgen::random_psd(rng, p);
    const Matrix a = testgen::gaussian(rng, testgen::uniform_int(rng, 1, static_cast<int>(p)), p);
    const SymMatrix s2 = s1 + symmetrize(a.transpose() * a);
    REQUIRE(loewner_leq(s1, s2));
    for (const Criterion& c : all_criteria(space, rng)) CHECK_MESSAGE(monotone_pair_check(c, s1, s2), c.name());

    // Weyl: sorted eigenvalues dominate one by one.
    const Vector e1 = sym_eigen(s1).values;
    const Vector e2 = sym_eigen(s2).values;
    for (Index i = 0; i < p; ++i) CHECK(e2(i) >= e1(i) - 1e-10 * std::max(1.0, std::abs(e1(i))));
  }
}

TEST_CASE("property: log-space determinant") {
  Rng rng(32);
  for (int trial = 0; trial < 300; ++trial) {
    const Index p = testgen::uniform_int(rng, 1, 8);
    const SymMatrix s = testgen::random_pd(rng, p);
    const Vector ev = sym_eigen(s).values;
    const double expect = std::exp(ev.array().log().sum());
    CHECK(std::abs(phi(Criterion::D(), s) - expect) <= 1e-9 * expect);
    CHECK(std::abs(phi(Criterion::D(), s) - s.matrix().determinant()) <= 1e-9 * expect);
  }
  // Tiny but positive eigenvalues must not underflow to zero early.
  const SymMatrix tiny = SymMatrix::identity(20, 1e-20);
  CHECK(phi(Criterion::D(), tiny) == 0.0);  // 1e-400 underflows the double range
  CHECK(phi(Criterion::D(), SymMatrix::identity(20, 1e-15)) == doctest::Approx(1e-300).epsilon(1e-10));
}

TEST_CASE("property: homogeneity") {
  Rng rng(33);
  for (int trial = 0; trial < 300; ++trial) {
    const Index p = testgen::uniform_int(rng, 1, 4);
    const DesignSpace space = testgen::random_space(rng, p, p + 3);
    // Full rank, so the D value is not rounding noise on a zero determinant.
    const SymMatrix s = testgen::random_pd(rng, p);
    const double t = std::exp(rng.uniform(-2.0, 2.0));
    for (const Criterion& c : all_criteria(space, rng)) {
      const double base = phi(c, s);
      const double scaled = phi(c, s.scaled(t));
      const double factor = c.kind() == Criterion::Kind::D ? std::pow(t, static_cast<double>(p)) : t;
      CHECK_MESSAGE(std::abs(scaled - factor * base) <= 1e-10 * std::max(1.0, std::abs(factor * base)), c.name());
    }
  }
}
