#include "krein/pencil.hpp"

#include <Eigen/SVD>
#include <sstream>

namespace krein {

namespace {

// Hermitian deviation for even j, skew deviation for odd j.
double structure_error(const Matrix& a, int j) {
  if (j % 2 == 0) return (a - a.adjoint()).cwiseAbs().maxCoeff();
  return (a + a.adjoint()).cwiseAbs().maxCoeff();
}

}  // namespace

PencilCheck validate_report(const std::vector<Matrix>& coeffs, const Tolerances& tol) {
  PencilCheck out;
  if (coeffs.size() < 2 || coeffs.size() > 3) {
    out.message = "expected 2 or 3 coefficient matrices (degree 1 or 2), got " +
                  std::to_string(coeffs.size());
    return out;
  }
  const Eigen::Index n = coeffs.front().rows();
  for (const auto& a : coeffs) {
    if (a.rows() != n || a.cols() != n) {
      out.message = "coefficient matrices must be square and of equal size";
      return out;
    }
  }
  if (n == 0) {
    out.message = "empty pencil";
    return out;
  }
  for (const auto& a : coeffs)
    out.max_coeff_norm = std::max(out.max_coeff_norm, a.cwiseAbs().maxCoeff());

  std::ostringstream msg;
  bool sym_ok = true;
  for (size_t j = 0; j < coeffs.size(); ++j) {
    const double err = structure_error(coeffs[j], static_cast<int>(j));
    out.symmetry_err.push_back(err);
    if (err > tol.sym * std::max(1.0, out.max_coeff_norm)) {
      sym_ok = false;
      msg << "coefficient " << j << (j % 2 == 0 ? " not Hermitian" : " not skew-Hermitian")
          << " (deviation " << err << "); ";
    }
  }

  Eigen::JacobiSVD<Matrix> svd(coeffs.back());
  out.leading_sigma_max = svd.singularValues()(0);
  out.leading_sigma_min = svd.singularValues()(svd.singularValues().size() - 1);
  const bool lead_ok = out.leading_sigma_min > tol.rank * out.leading_sigma_max;
  if (!lead_ok)
    msg << "leading coefficient numerically singular (sigma_min " << out.leading_sigma_min
        << ", sigma_max " << out.leading_sigma_max << "); ";

  out.ok = sym_ok && lead_ok;
  out.message = msg.str();
  return out;
}

StarEvenPencil validate_pencil(const std::vector<Matrix>& coeffs, const Tolerances& tol) {
  const PencilCheck check = validate_report(coeffs, tol);
  if (!check.ok) {
    // Distinguish the two throw sites so callers can react specifically.
    for (size_t j = 0; j < check.symmetry_err.size(); ++j)
      if (check.symmetry_err[j] > tol.sym * std::max(1.0, check.max_coeff_norm))
        throw SymmetryViolation(check.message);
    if (check.leading_sigma_min <= tol.rank * check.leading_sigma_max)
      throw SingularLeadingCoefficient(check.message);
    throw SymmetryViolation(check.message.empty() ? "invalid pencil" : check.message);
  }
  return StarEvenPencil{coeffs};
}

Matrix evaluate(const StarEvenPencil& p, Complex lambda) {
  Matrix acc = p.coeffs.back();
  for (int j = p.degree() - 1; j >= 0; --j) acc = (acc * lambda + p.coeffs[j]).eval();
  return acc;
}

Matrix evaluate_derivative(const StarEvenPencil& p, Complex lambda) {
  // Horner form of sum_j j lambda^{j-1} A_j.
  const int n = p.degree();
  Matrix acc = Complex(n, 0) * p.coeffs[n];
  for (int j = n - 1; j >= 1; --j) acc = (acc * lambda + Complex(j, 0) * p.coeffs[j]).eval();
  return acc;
}

double residual_scale(const StarEvenPencil& p, Complex lambda) {
  double s = 0.0, pw = 1.0;
  for (const auto& a : p.coeffs) {
    s += pw * a.cwiseAbs().maxCoeff() * static_cast<double>(a.rows());
    pw *= std::abs(lambda);
  }
  return std::max(s, 1e-300);
}

bool is_real_pencil(const StarEvenPencil& p, double tol) {
  double scale = 0.0;
  for (const auto& a : p.coeffs) scale = std::max(scale, a.cwiseAbs().maxCoeff());
  for (const auto& a : p.coeffs)
    if (a.imag().cwiseAbs().maxCoeff() > tol * std::max(1.0, scale)) return false;
  return true;
}

}  // namespace krein
