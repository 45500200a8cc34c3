#pragma once

#include <vector>

#include "krein/types.hpp"

namespace krein {

/// Matrix polynomial P(lambda) = sum_j lambda^j A_j whose even coefficients
/// are Hermitian and odd coefficients skew-Hermitian.  That structure makes
/// P(iz) Hermitian for real z and forces the eigenvalue symmetry
/// lambda -> -conj(lambda): the spectrum is mirrored across the imaginary
/// axis, so stability questions reduce to counting what sits on the axis and
/// how it got there.
struct StarEvenPencil {
  std::vector<Matrix> coeffs;  ///< coeffs[j] multiplies lambda^j; degree = coeffs.size()-1

  int degree() const { return static_cast<int>(coeffs.size()) - 1; }
  Eigen::Index dim() const { return coeffs.empty() ? 0 : coeffs.front().rows(); }
};

/// Per-coefficient structure diagnostics produced by validate_report.
struct PencilCheck {
  bool ok = false;
  double max_coeff_norm = 0.0;       ///< largest operator-norm estimate among coefficients
  std::vector<double> symmetry_err;  ///< per-coefficient Hermitian/skew deviation (absolute)
  double leading_sigma_min = 0.0;    ///< smallest singular value of the leading coefficient
  double leading_sigma_max = 0.0;
  std::string message;
};

/// Checks shapes, (skew-)Hermitian structure of each coefficient and
/// invertibility of the leading coefficient.  Never throws.
PencilCheck validate_report(const std::vector<Matrix>& coeffs, const Tolerances& tol = {});

/// Same checks, but throws SymmetryViolation / SingularLeadingCoefficient on
/// failure and returns the validated pencil on success.  Degrees 1 and 2 are
/// supported.
StarEvenPencil validate_pencil(const std::vector<Matrix>& coeffs, const Tolerances& tol = {});

/// P(lambda).
Matrix evaluate(const StarEvenPencil& p, Complex lambda);

/// dP/dlambda (lambda).
Matrix evaluate_derivative(const StarEvenPencil& p, Complex lambda);

/// Scale factor sum_j |lambda|^j ||A_j|| used to normalize residuals.
double residual_scale(const StarEvenPencil& p, Complex lambda);

/// True when every coefficient has negligible imaginary part, in which case
/// real linear algebra paths are valid.
bool is_real_pencil(const StarEvenPencil& p, double tol = 1e-14);

}  // namespace krein
