#pragma once

#include <optional>
#include <vector>

#include "krein/pencil.hpp"
#include "krein/spectrum.hpp"
#include "krein/subspace.hpp"

namespace krein {

/// One evaluation of the scaled Krein matrix
///   K_S(z) = -z [ P(iz)|_S - P(iz)|_{S,S⊥} (P(iz)|_{S⊥})^{-1} P(iz)|_{S⊥,S} ],
/// the Schur complement of the pencil at lambda = iz compressed to S.  For
/// real z it is Hermitian wherever the projected block is invertible; its
/// eigenvalue branches vanish exactly at the imaginary eigenvalues of the
/// pencil whose eigenvectors are visible from S, and the sign of the slope
/// there encodes the Krein signature.
struct KreinEvaluation {
  double z = 0.0;
  Matrix matrix;                    ///< n_S x n_S
  bool projected_invertible = false;
  double cond_estimate = 0.0;       ///< LU-based condition estimate of the projected block
};

KreinEvaluation krein_matrix_at(const StarEvenPencil& p, const Subspace& s, double z,
                                const Tolerances& tol = {});

/// Analytic d/dz of the scaled Krein matrix via the resolvent identity
///   K'(z) = [iP'] |_S + B^H W^{-1} D W^{-1} B - E^H W^{-1} B - B^H W^{-1} E,
/// with W = P(iz)|_{S⊥}, B = P(iz)|_{S⊥,S}, D = [iP'(iz)]|_{S⊥},
/// E = [iP'(iz)]|_{S⊥,S}, combined with the product rule for the -z prefactor.
KreinEvaluation krein_matrix_derivative(const StarEvenPencil& p, const Subspace& s, double z,
                                        const Tolerances& tol = {});

/// A located zero of one Krein eigenvalue branch.
struct KreinZero {
  double z = 0.0;
  int branch = 0;
  double slope = 0.0;       ///< dr_j/dz at the zero (scaled convention)
  int signature = 0;        ///< 0 if slope > 0, 1 if slope < 0 (negative Krein index count)
  bool degenerate = false;  ///< |slope| <= tol.slope: signature unreliable
  double residual = 0.0;    ///< |r_j(z*)|
};

/// A pole of the Krein matrix: z where the projected pencil is singular.
struct KreinPole {
  double z = 0.0;
  bool removable = false;                ///< det K_S stays bounded through it
  bool carries_full_eigenfunction = false;  ///< iz is a pencil eigenvalue with eigenvector in S⊥
  double det_growth = 0.0;               ///< |det| amplification over the refinement ladder
};

/// Krein eigenvalue branches traced over a z grid with eigenvector-overlap
/// matching (greedy assignment; overlap below tol.overlap marks a
/// discontinuity), invalid evaluations recorded as gaps.
struct KreinCurveSet {
  std::vector<double> grid;
  std::vector<bool> valid;                  ///< per grid point
  std::vector<std::vector<double>> branches;  ///< branches[j][k]; NaN where invalid
  std::vector<int> discontinuities;         ///< grid indices where matching broke down
  std::vector<KreinZero> zeros;
  std::vector<KreinPole> poles;
  int n_branches() const { return static_cast<int>(branches.size()); }
};

KreinCurveSet trace_branches(const StarEvenPencil& p, const Subspace& s,
                             const std::vector<double>& grid, const Tolerances& tol = {});

/// Bisection refinement of every sign change in the traced branches (brackets
/// containing z = 0 are skipped: K_S(0) = 0 identically).  Appends to
/// curves.zeros.
void locate_zeros(const StarEvenPencil& p, const Subspace& s, KreinCurveSet& curves,
                  const Tolerances& tol = {});

/// Poles inside [z_min, z_max] from the spectrum of the complement-projected
/// pencil, classified by a bounded-determinant ratio test (three refinement
/// levels, growth factor 10).
std::vector<KreinPole> locate_poles(const StarEvenPencil& p, const Subspace& s, double z_min,
                                    double z_max, const Tolerances& tol = {});

/// Coefficients of the small-z model K_S(z)/(-z) = M0 + z K1 - z^2 K2 + O(z^3)
/// for a spectral-origin subspace S of A_0:
///   M0 = diag(source eigenvalues), K1 = [iA_1]|_S,
///   K2 = [A_2]|_S - [A_1]|_{S,S⊥} ([A_0]|_{S⊥})^{-1} [A_1]|_{S⊥,S}
/// (degree 1 uses A_2 = 0, making K2 the constraint matrix of the
/// kernel-reduced index formula when S is the kernel).
struct SmallZReduction {
  Matrix m0;
  Matrix k1;
  Matrix k2;
};

SmallZReduction small_z_reduction(const StarEvenPencil& p, const Subspace& s,
                                  const Tolerances& tol = {});

/// Small polynomial eigenvalues of the reduced quadratic model: solves
/// M0 v = alpha K2 v and returns lambda = +-i sqrt(alpha) for each alpha.
std::vector<Complex> interaction_eigenvalues(const Matrix& m0, const Matrix& k2,
                                             const Tolerances& tol = {});

}  // namespace krein
