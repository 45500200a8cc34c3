#include <complex>

#include "doctest.h"
#include "krein/pencil.hpp"
#include "oracles.hpp"

using namespace krein;

namespace {

Matrix m2(Complex a, Complex b, Complex c, Complex d) {
  Matrix m(2, 2);
  m << a, b, c, d;
  return m;
}

}  // namespace

TEST_CASE("validate_pencil accepts Hermitian/skew-Hermitian structure") {
  const Matrix a0 = m2(-1.0, Complex(0.0, 2.0), Complex(0.0, -2.0), 3.0);
  const Matrix a1 = m2(Complex(0.0, 0.5), 1.0, -1.0, 0.0);
  const Matrix a2 = m2(2.0, 0.0, 0.0, 1.0);

  const StarEvenPencil lin = validate_pencil({a0, a1});
  CHECK(lin.degree() == 1);
  CHECK(lin.dim() == 2);

  const StarEvenPencil quad = validate_pencil({a0, a1, a2});
  CHECK(quad.degree() == 2);

  const PencilCheck rep = validate_report({a0, a1, a2});
  CHECK(rep.ok);
  CHECK(rep.leading_sigma_min > 0.9);
}

TEST_CASE("validate_pencil rejects broken structure with specific errors") {
  const Matrix herm = m2(1.0, 0.0, 0.0, 2.0);
  const Matrix skew = m2(0.0, 1.0, -1.0, 0.0);

  SUBCASE("non-Hermitian even coefficient") {
    const Matrix bad = m2(1.0, 1.0, 0.0, 2.0);
    CHECK_THROWS_AS(validate_pencil({bad, skew}), SymmetryViolation);
  }
  SUBCASE("non-skew odd coefficient") {
    CHECK_THROWS_AS(validate_pencil({herm, herm}), SymmetryViolation);
  }
  SUBCASE("singular leading coefficient") {
    const Matrix sing = m2(0.0, 0.0, 0.0, 0.0);
    CHECK_THROWS_AS(validate_pencil({herm, skew, sing}), SingularLeadingCoefficient);
  }
  SUBCASE("unsupported degree") {
    CHECK_THROWS_AS(validate_pencil({herm}), Error);
    CHECK_THROWS_AS(validate_pencil({herm, skew, herm, skew}), Error);
  }
  SUBCASE("validate_report never throws") {
    const PencilCheck rep = validate_report({herm, herm});
    CHECK_FALSE(rep.ok);
    CHECK_FALSE(rep.message.empty());
    CHECK(rep.symmetry_err.size() == 2);
    CHECK(rep.symmetry_err[1] > 0.1);
  }
}

TEST_CASE("evaluate and evaluate_derivative match Horner by hand") {
  const Matrix a0 = m2(-1.0, Complex(0.0, 2.0), Complex(0.0, -2.0), 3.0);
  const Matrix a1 = m2(Complex(0.0, 0.5), 1.0, -1.0, 0.0);
  const Matrix a2 = m2(2.0, 0.0, 0.0, 1.0);
  const StarEvenPencil p = validate_pencil({a0, a1, a2});

  const Complex lam(0.3, -1.7);
  const Matrix want = a0 + lam * a1 + lam * lam * a2;
  CHECK((evaluate(p, lam) - want).norm() < 1e-14);
  const Matrix dwant = a1 + 2.0 * lam * a2;
  CHECK((evaluate_derivative(p, lam) - dwant).norm() < 1e-14);
  CHECK(residual_scale(p, lam) > 0.0);
}

TEST_CASE("star-even structure makes P(iz) Hermitian") {
  std::mt19937_64 rng(12345);
  for (int trial = 0; trial < 20; ++trial) {
    const int dim = 2 + static_cast<int>(rng() % 5);
    const int degree = 1 + static_cast<int>(rng() % 2);
    const StarEvenPencil p = oracle::random_pencil(rng, dim, degree);
    const double z = -3.0 + 6.0 * static_cast<double>(rng() % 1000) / 999.0;
    const Matrix piz = evaluate(p, Complex(0.0, z));
    CHECK((piz - piz.adjoint()).norm() < 1e-12 * (1.0 + piz.norm()));
  }
}

TEST_CASE("is_real_pencil distinguishes real from complex coefficients") {
  const Matrix herm = m2(1.0, 0.5, 0.5, 2.0);
  const Matrix skew = m2(0.0, 1.0, -1.0, 0.0);
  CHECK(is_real_pencil(validate_pencil({herm, skew})));
  const Matrix cherm = m2(1.0, Complex(0.0, 1.0), Complex(0.0, -1.0), 2.0);
  CHECK_FALSE(is_real_pencil(validate_pencil({cherm, skew})));
}
