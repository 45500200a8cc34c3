#include <algorithm>
#include <cmath>
#include <complex>

#include "doctest.h"
#include "krein/spectrum.hpp"
#include "oracles.hpp"

using namespace krein;

namespace {

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

const PolyEigenvalue& nearest(const SpectrumReport& rep, Complex target) {
  REQUIRE(!rep.eigenvalues.empty());
  const auto it = std::min_element(rep.eigenvalues.begin(), rep.eigenvalues.end(),
                                   [&](const PolyEigenvalue& a, const PolyEigenvalue& b) {
                                     return std::abs(a.lambda - target) < std::abs(b.lambda - target);
                                   });
  return *it;
}

}  // namespace

TEST_CASE("saddle A_0 gives a real pair counted once in k_r") {
  const SpectrumReport rep = polynomial_spectrum(validate_pencil({diag2(-1.0, 1.0), sympl2()}));
  REQUIRE(rep.eigenvalues.size() == 2);
  CHECK(nearest(rep, Complex(1.0, 0.0)).on_real_axis);
  CHECK(std::abs(nearest(rep, Complex(1.0, 0.0)).lambda - 1.0) < 1e-12);
  CHECK(std::abs(nearest(rep, Complex(-1.0, 0.0)).lambda + 1.0) < 1e-12);
  CHECK(rep.census.k_r == 1);
  CHECK(rep.census.k_c == 0);
  CHECK(rep.census.k_i_minus == 0);
  CHECK(rep.all_semisimple);
  for (const auto& e : rep.eigenvalues) CHECK(e.residual < 1e-10);
}

TEST_CASE("definite A_0 gives a positive-signature imaginary pair") {
  const SpectrumReport rep = polynomial_spectrum(validate_pencil({diag2(1.0, 2.0), sympl2()}));
  const double s2 = std::sqrt(2.0);
  for (const auto& e : rep.eigenvalues) {
    CHECK(e.on_imaginary_axis);
    CHECK(std::abs(std::abs(e.lambda.imag()) - s2) < 1e-12);
    REQUIRE(e.krein_index.has_value());
    CHECK(*e.krein_index == 0);
  }
  CHECK(rep.census.total() == 0);
}

TEST_CASE("negative definite A_0 gives a negative-signature imaginary pair") {
  const SpectrumReport rep = polynomial_spectrum(validate_pencil({diag2(-1.0, -2.0), sympl2()}));
  for (const auto& e : rep.eigenvalues) {
    CHECK(e.on_imaginary_axis);
    REQUIRE(e.krein_index.has_value());
    CHECK(*e.krein_index == 1);
  }
  CHECK(rep.census.k_i_minus == 2);
  CHECK(rep.census.k_r == 0);
}

TEST_CASE("clusters report algebraic and geometric multiplicity") {
  // two decoupled copies of the negative-signature pair: +-i sqrt(2) twice
  Matrix a0 = Matrix::Zero(4, 4), a1 = Matrix::Zero(4, 4);
  a0.topLeftCorner(2, 2) = diag2(-1.0, -2.0);
  a0.bottomRightCorner(2, 2) = diag2(-1.0, -2.0);
  a1.topLeftCorner(2, 2) = sympl2();
  a1.bottomRightCorner(2, 2) = sympl2();
  const SpectrumReport rep = polynomial_spectrum(validate_pencil({a0, a1}));
  REQUIRE(rep.eigenvalues.size() == 2);  // clustered
  for (const auto& e : rep.eigenvalues) {
    CHECK(e.algebraic == 2);
    CHECK(e.geometric == 2);
    REQUIRE(e.krein_index.has_value());
    CHECK(*e.krein_index == 2);
  }
  CHECK(rep.census.k_i_minus == 4);
  CHECK(rep.all_semisimple);
}

TEST_CASE("quadratic pencil splits into real and imaginary pairs") {
  const Matrix a2 = Matrix::Identity(2, 2);
  const SpectrumReport rep =
      polynomial_spectrum(validate_pencil({diag2(-1.0, 4.0), Matrix::Zero(2, 2), a2}));
  REQUIRE(rep.eigenvalues.size() == 4);
  CHECK(std::abs(nearest(rep, Complex(1.0, 0.0)).lambda - 1.0) < 1e-12);
  const PolyEigenvalue& imag = nearest(rep, Complex(0.0, 2.0));
  CHECK(std::abs(imag.lambda - Complex(0.0, 2.0)) < 1e-12);
  REQUIRE(imag.krein_index.has_value());
  CHECK(*imag.krein_index == 0);  // -z [iP'(iz)] = 2 z^2 > 0 on the eigenspace
  CHECK(rep.census.k_r == 1);
  CHECK(rep.census.total() == 1);
}

TEST_CASE("origin clusters stay out of the census and semisimplicity verdict") {
  const SpectrumReport rep = polynomial_spectrum(validate_pencil({diag2(0.0, -1.0), sympl2()}));
  REQUIRE(rep.eigenvalues.size() == 1);
  const PolyEigenvalue& zero = rep.eigenvalues.front();
  CHECK(zero.origin_cluster);
  CHECK(zero.algebraic == 2);
  CHECK(zero.geometric == 1);
  CHECK_FALSE(zero.krein_index.has_value());
  CHECK(rep.census.total() == 0);
  CHECK(rep.all_semisimple);  // only the origin is defective
}

TEST_CASE("zero_lambda window demotes small pairs to kernel bookkeeping") {
  Tolerances tol;
  tol.zero_lambda = 0.2;
  const SpectrumReport rep =
      polynomial_spectrum(validate_pencil({diag2(-0.01, 1.0), sympl2()}), tol);
  CHECK(rep.census.total() == 0);  // the +-0.1 pair is treated as spread kernel
  for (const auto& e : rep.eigenvalues) {
    CHECK(e.origin_cluster);
    CHECK_FALSE(e.krein_index.has_value());
  }
}

TEST_CASE("band filter excludes tagged eigenvalues from the census") {
  const BandFilter band = [](Complex z) { return std::abs(z.imag()) >= 1.2; };
  const SpectrumReport rep =
      polynomial_spectrum(validate_pencil({diag2(-1.0, -2.0), sympl2()}), Tolerances{}, band);
  for (const auto& e : rep.eigenvalues) CHECK(e.essential_band);
  CHECK(rep.census.total() == 0);
}

TEST_CASE("spectrum is symmetric under lambda -> -conj(lambda)") {
  std::mt19937_64 rng(777);
  for (int trial = 0; trial < 10; ++trial) {
    const int dim = 2 + static_cast<int>(rng() % 5);
    const int degree = 1 + static_cast<int>(rng() % 2);
    const StarEvenPencil p = oracle::random_pencil(rng, dim, degree);
    const std::vector<Complex> lams = polynomial_eigenvalues(p);
    for (const Complex& lam : lams) {
      const Complex mirror = -std::conj(lam);
      double best = 1e300;
      for (const Complex& other : lams) best = std::min(best, std::abs(other - mirror));
      CHECK(best < 1e-8 * (1.0 + std::abs(lam)));
    }
  }
}

TEST_CASE("reported Krein indices match the definition oracle") {
  std::mt19937_64 rng(424242);
  int checked = 0;
  for (int trial = 0; trial < 25; ++trial) {
    const int dim = 2 + static_cast<int>(rng() % 4);
    const int degree = 1 + static_cast<int>(rng() % 2);
    const StarEvenPencil p = oracle::random_pencil(rng, dim, degree);
    const SpectrumReport rep = polynomial_spectrum(p);
    for (const auto& e : rep.eigenvalues) {
      if (!e.krein_index.has_value() || e.algebraic != 1) continue;
      const double z = e.lambda.imag();
      CHECK(*e.krein_index == oracle::definition_krein_index(p, z));
      ++checked;
    }
  }
  CHECK(checked > 20);  // the ensemble actually exercised the comparison
}

TEST_CASE("eigenvalue list and clustered report agree") {
  std::mt19937_64 rng(99);
  const StarEvenPencil p = oracle::random_pencil(rng, 5, 2);
  std::vector<Complex> plain = polynomial_eigenvalues(p);
  const SpectrumReport rep = polynomial_spectrum(p);
  int total_mult = 0;
  for (const auto& e : rep.eigenvalues) {
    total_mult += e.algebraic;
    double best = 1e300;
    for (const Complex& l : plain) best = std::min(best, std::abs(l - e.lambda));
    CHECK(best < 1e-7 * (1.0 + std::abs(e.lambda)));
  }
  CHECK(total_mult == static_cast<int>(plain.size()));
  CHECK(total_mult == p.dim() * p.degree());
}
