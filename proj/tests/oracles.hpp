#pragma once

// Independent cross-checks shared by the unit and acceptance tests.  Each
// helper deliberately avoids the library code path it is used to verify
// (determinant grids instead of companion eigensolves, null-vector quadratic
// forms instead of branch slopes, dense scans instead of golden-section
// minimization), so agreement between the two is evidence rather than
// tautology.

#include <algorithm>
#include <cmath>
#include <complex>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "krein/pencil.hpp"

namespace oracle {

using krein::Complex;
using krein::Matrix;
using krein::StarEvenPencil;

/// det P(iz).  P(iz) is Hermitian for real z, so the determinant is real up
/// to roundoff; the real part is returned.
inline double pencil_det(const StarEvenPencil& p, double z) {
  return krein::evaluate(p, Complex(0.0, z)).determinant().real();
}

/// Heights z of the purely imaginary polynomial eigenvalues iz inside
/// [z_lo, z_hi], found by sign-change bisection of det P(iz) over a dense
/// grid.  Even-multiplicity roots produce no sign change and are missed, so
/// callers restrict to simple-spectrum pencils.
inline std::vector<double> imaginary_heights(const StarEvenPencil& p, double z_lo, double z_hi,
                                             int grid_points = 4001, double z_tol = 1e-12) {
  std::vector<double> roots;
  double prev_z = z_lo;
  double prev_g = pencil_det(p, z_lo);
  for (int i = 1; i < grid_points; ++i) {
    const double z = z_lo + (z_hi - z_lo) * i / (grid_points - 1);
    const double g = pencil_det(p, z);
    if (prev_g == 0.0) {
      roots.push_back(prev_z);
    } else if (g != 0.0 && std::signbit(g) != std::signbit(prev_g)) {
      double a = prev_z, b = z, ga = prev_g;
      while (b - a > z_tol) {
        const double mid = 0.5 * (a + b);
        const double gm = pencil_det(p, mid);
        if (gm == 0.0) {
          a = b = mid;
          break;
        }
        if (std::signbit(gm) == std::signbit(ga)) {
          a = mid;
          ga = gm;
        } else {
          b = mid;
        }
      }
      roots.push_back(0.5 * (a + b));
    }
    prev_z = z;
    prev_g = g;
  }
  return roots;
}

/// Krein index of the simple eigenvalue iz* straight from the definition:
/// take the null vector v of P(iz*) (eigenvector of the Hermitian matrix for
/// its smallest-magnitude eigenvalue) and count the sign of
/// v^H (-z* [i P'(iz*)]) v.  Returns 1 for a negative form, 0 for positive.
inline int definition_krein_index(const StarEvenPencil& p, double z_star) {
  const Matrix piz = krein::evaluate(p, Complex(0.0, z_star));
  Eigen::SelfAdjointEigenSolver<Matrix> es(piz);
  Eigen::Index which = 0;
  es.eigenvalues().cwiseAbs().minCoeff(&which);
  const krein::Vector v = es.eigenvectors().col(which);
  const Matrix form = -z_star * (Complex(0.0, 1.0) * krein::evaluate_derivative(p, Complex(0.0, z_star)));
  const double q = (v.adjoint() * form * v).value().real();
  return q < 0.0 ? 1 : 0;
}

inline Matrix random_hermitian(std::mt19937_64& rng, int dim) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  Matrix b(dim, dim);
  for (int i = 0; i < dim; ++i)
    for (int j = 0; j < dim; ++j) b(i, j) = Complex(gauss(rng), gauss(rng));
  return 0.5 * (b + b.adjoint());
}

inline Matrix random_skew_hermitian(std::mt19937_64& rng, int dim) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  Matrix b(dim, dim);
  for (int i = 0; i < dim; ++i)
    for (int j = 0; j < dim; ++j) b(i, j) = Complex(gauss(rng), gauss(rng));
  return 0.5 * (b - b.adjoint());
}

/// Random star-even pencil of the given degree (1 or 2) whose leading
/// coefficient and A_0 are kept safely invertible (smallest singular value
/// >= min_sigma) by redrawing, so the index formulas apply without kernel
/// bookkeeping and the spectrum stays numerically clean.
inline StarEvenPencil random_pencil(std::mt19937_64& rng, int dim, int degree,
                                    double min_sigma = 0.2) {
  const auto sigma_min = [](const Matrix& m) {
    return Eigen::JacobiSVD<Matrix>(m).singularValues().minCoeff();
  };
  StarEvenPencil p;
  p.coeffs.resize(static_cast<size_t>(degree) + 1);
  do {
    p.coeffs[0] = random_hermitian(rng, dim);
  } while (sigma_min(p.coeffs[0]) < min_sigma);
  p.coeffs[1] = random_skew_hermitian(rng, dim);
  if (degree == 2) {
    do {
      p.coeffs[2] = random_hermitian(rng, dim);
    } while (sigma_min(p.coeffs[2]) < min_sigma);
  } else {
    while (sigma_min(p.coeffs[1]) < min_sigma) p.coeffs[1] = random_skew_hermitian(rng, dim);
  }
  return p;
}

/// Dense-scan minimum of c r + sqrt(1 + r^4) over r in [-10, 0], refined by
/// three rounds of grid shrinking around the argmin (no derivative, no
/// golden section).
inline double band_minimum_brute(double c, int samples = 200001) {
  double lo = -10.0, hi = 0.0;
  double best_r = 0.0;
  for (int round = 0; round < 3; ++round) {
    double best = std::numeric_limits<double>::infinity();
    for (int i = 0; i < samples; ++i) {
      const double r = lo + (hi - lo) * i / (samples - 1);
      const double v = c * r + std::sqrt(1.0 + r * r * r * r);
      if (v < best) {
        best = v;
        best_r = r;
      }
    }
    const double h = (hi - lo) / (samples - 1);
    lo = best_r - 2.0 * h;
    hi = best_r + 2.0 * h;
  }
  return c * best_r + std::sqrt(1.0 + best_r * best_r * best_r * best_r);
}

}  // namespace oracle
