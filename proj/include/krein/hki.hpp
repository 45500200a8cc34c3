#pragma once

#include <optional>
#include <string>
#include <vector>

#include "krein/spectrum.hpp"

namespace krein {

/// Count of negative eigenvalues of a Hermitian matrix, with the eigenvalues
/// retained for reporting.  Eigenvalues inside (-zero_tol, zero_tol) are
/// counted as kernel and flagged.
struct NegativeIndex {
  int count = 0;
  int kernel_dim = 0;
  bool near_zero_warning = false;  ///< an eigenvalue sits within 10x of the cut
  RealVector eigenvalues;
};

NegativeIndex negative_index(const Matrix& h, double zero_tol);

/// Result of the kernel-reduced index formulas.  For degree 1:
///   K = n(A_0) - n(constraint),  constraint = [-A_1 A_0^{-1} A_1]|_ker(A_0);
/// for degree 2:
///   K = n(A_0) + n(A_2) - n(constraint),
///   constraint = [A_2 - A_1 A_0^{-1} A_1]|_ker(A_0);
/// with A_0^{-1} acting on the orthogonal complement of the kernel.  The
/// formula equals k_r + k_c + k_i^- whenever the point spectrum is
/// semi-simple and the genericity conditions hold.
struct IndexReport {
  int k_ham = 0;
  int n_a0 = 0;
  int n_a2 = 0;          ///< degree 2 only
  int n_constraint = 0;  ///< 0 when the kernel is trivial
  int kernel_dim = 0;
  RealVector constraint_eigenvalues;
  std::vector<std::string> notes;
};

/// Kernel detection uses |eigenvalue| <= kernel_tol; pass a structural
/// tolerance when the operator scale makes the relative default meaningless
/// (fourth-derivative stencils).  kernel_tol <= 0 selects
/// tol.zero_subspace * ||A_0||.
IndexReport hki_linear(const Matrix& a0, const Matrix& a1, const Tolerances& tol = {},
                       double kernel_tol = -1.0);

IndexReport hki_quadratic(const Matrix& a0, const Matrix& a1, const Matrix& a2,
                          const Tolerances& tol = {}, double kernel_tol = -1.0);

/// Comparison of the formula count against the census of an actual spectrum
/// report.
struct CensusCheck {
  bool consistent = false;
  bool census_reliable = false;  ///< all nonzero point eigenvalues semi-simple
  int formula = 0;
  IndexCensus census;
  std::vector<std::string> detail;
};

CensusCheck census_check(const IndexReport& formula, const SpectrumReport& spectrum);

}  // namespace krein
