#include <algorithm>
#include <cmath>
#include <complex>

#include "doctest.h"
#include "krein/krein_matrix.hpp"
#include "krein/subspace.hpp"
#include "oracles.hpp"

using namespace krein;

namespace {

Matrix scalar(double v) {
  Matrix m(1, 1);
  m(0, 0) = v;
  return m;
}

Matrix diag2(double a, double b) {
  Matrix m = Matrix::Zero(2, 2);
  m(0, 0) = a;
  m(1, 1) = b;
  return m;
}

Matrix sympl2() {
  Matrix j(2, 2);
  j << 0.0, 1.0, -1.0, 0.0;
  return j;
}

std::vector<double> linspace(double a, double b, int n) {
  std::vector<double> g(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i) g[static_cast<size_t>(i)] = a + (b - a) * i / (n - 1);
  return g;
}

}  // namespace

TEST_CASE("scalar quadratic pencil gives K(z) = z + z^3 exactly") {
  // P(lambda) = -1 + lambda^2 on a 1-dim space: S is the whole space, no
  // Schur complement survives, so K(z) = -z (-1 - z^2).
  const StarEvenPencil p = validate_pencil({scalar(-1.0), scalar(0.0), scalar(1.0)});
  const Subspace s = select_subspace(p.coeffs[0]);
  CHECK(s.size() == 1);
  for (double z : {0.25, -0.8, 1.7, 3.0}) {
    const KreinEvaluation ev = krein_matrix_at(p, s, z);
    REQUIRE(ev.projected_invertible);
    CHECK(ev.matrix(0, 0).real() == doctest::Approx(z + z * z * z).epsilon(1e-13));
    CHECK(std::abs(ev.matrix(0, 0).imag()) < 1e-14);
    const KreinEvaluation der = krein_matrix_derivative(p, s, z);
    CHECK(der.matrix(0, 0).real() == doctest::Approx(1.0 + 3.0 * z * z).epsilon(1e-13));
  }
}

TEST_CASE("negative definite pair: zeros at +-sqrt(2) with slope -4/3") {
  const StarEvenPencil p = validate_pencil({diag2(-1.0, -2.0), sympl2()});
  const Subspace s = select_subspace(p.coeffs[0]);
  CHECK(s.size() == 2);
  KreinCurveSet curves = trace_branches(p, s, linspace(-2.0, 2.0, 401));
  locate_zeros(p, s, curves);
  REQUIRE(curves.zeros.size() == 2);
  const double s2 = std::sqrt(2.0);
  CHECK(curves.zeros.front().z == doctest::Approx(-s2).epsilon(1e-9));
  CHECK(curves.zeros.back().z == doctest::Approx(s2).epsilon(1e-9));
  for (const KreinZero& zero : curves.zeros) {
    CHECK(zero.slope == doctest::Approx(-4.0 / 3.0).epsilon(1e-6));
    CHECK(zero.signature == 1);
    CHECK_FALSE(zero.degenerate);
  }
}

TEST_CASE("hermiticity for real z and empty subspace rejection") {
  std::mt19937_64 rng(31);
  const StarEvenPencil p = oracle::random_pencil(rng, 4, 2);
  Subspace s;
  try {
    s = select_subspace(p.coeffs[0]);
  } catch (const EmptySubspace&) {
    return;  // random A_0 happened to be positive definite; nothing to check
  }
  for (double z : {0.3, -1.1, 2.4}) {
    const KreinEvaluation ev = krein_matrix_at(p, s, z);
    if (!ev.projected_invertible) continue;
    CHECK((ev.matrix - ev.matrix.adjoint()).norm() < 1e-10 * (1.0 + ev.matrix.norm()));
  }
  CHECK_THROWS_AS(select_subspace(Matrix::Identity(3, 3)), EmptySubspace);
}

TEST_CASE("poles sit where the complement block degenerates") {
  // A_0 = diag(-1, 2), A_1 = J, A_2 = I: complement block 2 - z^2 vanishes at
  // +-sqrt(2) while det P(iz) = z^4 - 2z^2 - 2 vanishes at +-sqrt(1+sqrt(3)).
  const StarEvenPencil p =
      validate_pencil({diag2(-1.0, 2.0), sympl2(), Matrix::Identity(2, 2)});
  const Subspace s = select_subspace(p.coeffs[0]);
  REQUIRE(s.size() == 1);

  const std::vector<KreinPole> poles = locate_poles(p, s, -2.0, 2.0);
  REQUIRE(poles.size() == 2);
  const double s2 = std::sqrt(2.0);
  CHECK(poles.front().z == doctest::Approx(-s2).epsilon(1e-8));
  CHECK(poles.back().z == doctest::Approx(s2).epsilon(1e-8));
  for (const KreinPole& pole : poles) {
    CHECK_FALSE(pole.removable);
    CHECK_FALSE(pole.carries_full_eigenfunction);
  }

  KreinCurveSet curves = trace_branches(p, s, linspace(-2.0, 2.0, 801));
  locate_zeros(p, s, curves);
  const double zstar = std::sqrt(1.0 + std::sqrt(3.0));
  std::vector<double> clean;
  for (const KreinZero& zero : curves.zeros)
    if (!zero.degenerate) clean.push_back(zero.z);
  REQUIRE(clean.size() == 2);
  CHECK(clean.front() == doctest::Approx(-zstar).epsilon(1e-9));
  CHECK(clean.back() == doctest::Approx(zstar).epsilon(1e-9));
}

TEST_CASE("small-z reduction reproduces closed forms") {
  // Degree 1, S = span(e1): M0 = -0.01, K1 = [iJ]_11 = 0,
  // K2 = -J_12 (A_0|_perp)^{-1} J_21 = 1.
  const StarEvenPencil lin = validate_pencil({diag2(-0.01, 1.0), sympl2()});
  const Subspace s = select_subspace(lin.coeffs[0]);
  REQUIRE(s.size() == 1);
  const SmallZReduction red = small_z_reduction(lin, s);
  CHECK(red.m0(0, 0).real() == doctest::Approx(-0.01).epsilon(1e-12));
  CHECK(std::abs(red.k1(0, 0)) < 1e-12);
  CHECK(red.k2(0, 0).real() == doctest::Approx(1.0).epsilon(1e-12));

  // interaction model: M0 v = alpha K2 v -> alpha = -0.01, lambda = +-0.1 real
  const std::vector<Complex> lams = interaction_eigenvalues(red.m0, red.k2);
  REQUIRE(lams.size() == 2);
  for (const Complex& l : lams) {
    CHECK(std::abs(l.imag()) < 1e-12);
    CHECK(std::abs(std::abs(l.real()) - 0.1) < 1e-12);
  }
}

TEST_CASE("quadratic small-z model predicts the small pair to leading order") {
  // P = diag(-0.01, 1) + lambda J + lambda^2 I: exact small pair at
  // +-sqrt((sqrt(4.0001) - 1.99)/2) ~ +-0.070798; model predicts
  // +-sqrt(0.01/2) = +-0.070711.
  const StarEvenPencil p =
      validate_pencil({diag2(-0.01, 1.0), sympl2(), Matrix::Identity(2, 2)});
  const Subspace s = select_subspace(p.coeffs[0]);
  const SmallZReduction red = small_z_reduction(p, s);
  CHECK(red.k2(0, 0).real() == doctest::Approx(2.0).epsilon(1e-12));
  const std::vector<Complex> lams = interaction_eigenvalues(red.m0, red.k2);
  REQUIRE(lams.size() == 2);
  const double exact = std::sqrt((std::sqrt(4.0001) - 1.99) / 2.0);
  for (const Complex& l : lams) {
    CHECK(std::abs(l.imag()) < 1e-12);
    CHECK(std::abs(std::abs(l.real()) - exact) / exact < 5e-3);
  }
}

TEST_CASE("zeros and signatures match the determinant-grid oracle") {
  std::mt19937_64 rng(2024);
  int matched_zeros = 0;
  for (int trial = 0; trial < 20; ++trial) {
    const int dim = 2 + static_cast<int>(rng() % 3);
    const int degree = 1 + static_cast<int>(rng() % 2);
    const StarEvenPencil p = oracle::random_pencil(rng, dim, degree);

    Subspace s;
    try {
      s = select_subspace(p.coeffs[0]);
    } catch (const EmptySubspace&) {
      continue;
    }

    double zmax = 1.0;
    for (const Complex& l : polynomial_eigenvalues(p)) zmax = std::max(zmax, std::abs(l));
    zmax = 1.1 * zmax + 0.1;

    KreinCurveSet curves = trace_branches(p, s, linspace(-zmax, zmax, 2001));
    locate_zeros(p, s, curves);
    std::vector<double> zeros;
    for (const KreinZero& z : curves.zeros)
      if (!z.degenerate) zeros.push_back(z.z);

    const std::vector<double> heights = oracle::imaginary_heights(p, -zmax, zmax, 8001);
    std::vector<double> nonzero_heights;
    for (double h : heights)
      if (std::abs(h) > 1e-6) nonzero_heights.push_back(h);

    REQUIRE(zeros.size() == nonzero_heights.size());
    std::sort(zeros.begin(), zeros.end());
    for (size_t i = 0; i < zeros.size(); ++i) {
      CHECK(std::abs(zeros[i] - nonzero_heights[i]) < 1e-8);
      ++matched_zeros;
    }
    for (const KreinZero& z : curves.zeros) {
      if (z.degenerate) continue;
      CHECK(z.signature == oracle::definition_krein_index(p, z.z));
    }
  }
  CHECK(matched_zeros > 10);
}

TEST_CASE("analytic derivative agrees with central differences") {
  std::mt19937_64 rng(555);
  int checked = 0;
  for (int draw = 0; draw < 400 && checked < 10; ++draw) {
    const int dim = 2 + static_cast<int>(rng() % 3);
    const int degree = 1 + static_cast<int>(rng() % 2);
    const StarEvenPencil p = oracle::random_pencil(rng, dim, degree);
    Subspace s;
    try {
      s = select_subspace(p.coeffs[0]);
    } catch (const EmptySubspace&) {
      continue;
    }
    const double z = -2.0 + 4.0 * static_cast<double>(rng() % 10000) / 9999.0;
    const KreinEvaluation at = krein_matrix_at(p, s, z);
    if (!at.projected_invertible || at.cond_estimate > 1e6) continue;
    const KreinEvaluation der = krein_matrix_derivative(p, s, z);
    const double h = 1e-5 * std::max(1.0, std::abs(z));
    const Matrix fd =
        (krein_matrix_at(p, s, z + h).matrix - krein_matrix_at(p, s, z - h).matrix) / (2.0 * h);
    CHECK((der.matrix - fd).norm() / der.matrix.norm() < 1e-6);
    ++checked;
  }
  CHECK(checked == 10);
}
