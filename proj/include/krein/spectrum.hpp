#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "krein/pencil.hpp"

namespace krein {

/// One eigenvalue cluster of the polynomial problem P(lambda)v = 0.
struct PolyEigenvalue {
  Complex lambda;                 ///< cluster representative, after axis snapping
  int algebraic = 1;              ///< cluster size among the dim*degree roots
  int geometric = 1;              ///< dim - rank(P(lambda))
  Matrix eigenvectors;            ///< orthonormal columns spanning the (numerical) eigenspace
  double residual = 0.0;          ///< max_j ||P(lambda)v_j|| / residual_scale
  bool on_imaginary_axis = false; ///< Re lambda snapped to 0
  bool on_real_axis = false;      ///< Im lambda snapped to 0
  std::optional<int> krein_index; ///< negative count of -z0 [iP'(iz0)] on the eigenspace;
                                  ///< set for nonzero imaginary semi-simple eigenvalues
  bool essential_band = false;    ///< tagged by the caller's band filter; excluded from census
  bool origin_cluster = false;    ///< lambda == 0 or |lambda| <= tol.zero_lambda: kernel
                                  ///< bookkeeping, excluded from the census
};

/// Index census over the point spectrum (band-tagged and zero eigenvalues excluded).
struct IndexCensus {
  int k_r = 0;        ///< positive real eigenvalues, with algebraic multiplicity
  int k_c = 0;        ///< eigenvalues with positive real part off both axes
  int k_i_minus = 0;  ///< sum of Krein indices over purely imaginary nonzero eigenvalues
  int total() const { return k_r + k_c + k_i_minus; }
};

struct SpectrumReport {
  StarEvenPencil pencil;
  std::vector<PolyEigenvalue> eigenvalues;  ///< sorted by (Im, Re)
  IndexCensus census;
  bool all_semisimple = true;      ///< every nonzero cluster has geometric == algebraic
  std::vector<std::string> notes;  ///< non-fatal diagnostics (unindexed clusters, ...)
};

/// Predicate marking eigenvalues that belong to a known essential-spectrum
/// band of the underlying (pre-discretization) operator; they are excluded
/// from the index census.
using BandFilter = std::function<bool(Complex)>;

/// Dense polynomial eigensolve via companion linearization of
/// A_n^{-1}-scaled coefficients, with axis snapping (relative tol.pair),
/// single-linkage clustering (tol.cluster * max|lambda|) and Krein indices for
/// the imaginary point spectrum.
///
/// Large problems (dim * degree > 600) run the companion Schur form
/// values-only and recover eigenvectors by inverse iteration for the
/// non-band clusters; band-tagged clusters then carry no eigenvectors and
/// are assumed semi-simple (they never enter the census).  Clusters with
/// |lambda| <= tol.zero_lambda are reported but treated like the kernel:
/// no Krein index, excluded from the census — discretizations spread an
/// exact kernel into a small symmetric pair, and the window keeps that
/// artifact out of the instability count.
SpectrumReport polynomial_spectrum(const StarEvenPencil& p, const Tolerances& tol = {},
                                   const BandFilter& band = nullptr);

/// Eigenvalues only (no vectors, no clustering) — cheap path for parameter scans.
std::vector<Complex> polynomial_eigenvalues(const StarEvenPencil& p);

/// Krein index of a purely imaginary nonzero eigenvalue lambda0 = i z0 with
/// orthonormal eigenspace basis V: the number of negative eigenvalues of the
/// Hermitian matrix V^H (-z0 [i P'(i z0)]) V.  For degree 1 this equals the
/// negative count of A_0 on the eigenspace; for degree 2, of A_0 + z0^2 A_2.
int krein_index_of(const StarEvenPencil& p, Complex lambda0, const Matrix& eigenvectors,
                   const Tolerances& tol = {});

}  // namespace krein
