#pragma once

#include "krein/types.hpp"

namespace krein {

/// Orthonormal test subspace S for the Krein matrix, together with an
/// orthonormal basis of its orthogonal complement.  For spectral origins the
/// complement is the complementary set of eigenvectors of A_0 (exactly
/// A_0-invariant); user-supplied bases get a QR completion.
struct Subspace {
  enum class Origin { NegativePlusKernel, SmallEigs, UserSupplied };

  Matrix basis;       ///< dim x n_S, orthonormal columns
  Matrix complement;  ///< dim x (dim - n_S), orthonormal columns
  Origin origin = Origin::UserSupplied;
  RealVector source_eigenvalues;  ///< A_0 eigenvalues tied to basis columns (spectral origins)

  Eigen::Index dim() const { return basis.rows(); }
  Eigen::Index size() const { return basis.cols(); }
};

/// S = span of eigenvectors of the Hermitian matrix a0 with eigenvalue
/// < tol.zero_subspace * ||a0|| (negative space plus numerical kernel).
/// Throws EmptySubspace when no eigenvalue qualifies.
Subspace select_subspace(const Matrix& a0, const Tolerances& tol = {});

/// S = span of eigenvectors with |eigenvalue| <= window (absolute).  Used for
/// the small-eigenvalue reductions where the interesting group sits near 0.
Subspace select_small_subspace(const Matrix& a0, double window);

/// Wraps a user basis: orthonormalizes it and builds the complement by QR
/// completion.
Subspace subspace_from_basis(const Matrix& basis);

}  // namespace krein
