#pragma once

#include <optional>
#include <string>
#include <vector>

#include "krein/hki.hpp"
#include "krein/krein_matrix.hpp"
#include "krein/pencil.hpp"
#include "krein/spectrum.hpp"
#include "krein/subspace.hpp"

namespace krein {

/// Periodic finite-difference grid on [-L, L) with N points.
struct BridgeGrid {
  int n = 512;                ///< number of points (even)
  double half_length = 30.0;  ///< L
  double spacing() const { return 2.0 * half_length / n; }
  double x(int i) const { return -half_length + i * spacing(); }
};

void validate_grid(const BridgeGrid& grid);

/// Dense circulant matrix of the 6th-order-accurate central stencil for
/// d^order/dx^order, periodic wrap.  order 1 is skew-symmetric, orders 2 and
/// 4 are symmetric.
RealMatrix periodic_derivative(const BridgeGrid& grid, int order);

/// Decay/oscillation rates of the tails of a pulse travelling at speed c:
/// the roots of mu^4 + c^2 mu^2 + 1 = 0 are +-alpha +- i beta with
/// alpha = sqrt(2 - c^2)/2, beta = sqrt(2 + c^2)/2 (so alpha^2 + beta^2 = 1).
struct LinearRates {
  double alpha = 0.0;
  double beta = 0.0;
};

/// Throws OutOfRange unless 0 < c < sqrt(2).
LinearRates linear_rates(double c);

/// Essential spectrum of the travelling quadratic pencil: {i r : |r| >= rho}
/// with rho = min over real r of c r + sqrt(1 + r^4), found by golden-section
/// search on r in [-10, 0] (the function is unimodal there for c > 0).
struct EssentialBand {
  double rho = 0.0;
  double argmin_r = 0.0;  ///< minimizing wavenumber
};

EssentialBand essential_band(double c);

/// Left edge 1 - c^4/4 of the essential spectrum of the scalar operator
/// d^4/dx^4 + c^2 d^2/dx^2 + 1.
double a0_band_edge(double c);

/// A converged travelling-wave profile: the scalar field U sampled on the
/// grid, satisfying U'''' + c^2 U'' + e^U - 1 = 0 to residual_norm.
struct PulseProfile {
  RealVector u;
  double c = 0.0;
  double residual_norm = 0.0;
  double alpha = 0.0, beta = 0.0;  ///< linear_rates(c)
  std::vector<double> peaks;       ///< peak abscissae, ascending (measured)
  bool primary = true;
  std::vector<int> ks;             ///< phase offsets k_1..k_{n-1} (multi only)
  int m = 0;                       ///< separation index (multi only)
  double x_tilde = 0.0;            ///< calibrated phase shift (multi only)
  double guess_remainder = 0.0;    ///< ||converged - sum of translates||_inf (multi only)
  int pulse_count() const { return static_cast<int>(ks.size()) + 1; }
  /// Half of the minimum consecutive peak distance; 0 for a single peak.
  double x_min() const;
};

/// Newton solve of the travelling-wave equation on the periodic grid from
/// the tail-rate ansatz a e^{-alpha|x|} cos(beta x), the amplitude a chosen
/// by a coarse line search over both signs; the converged profile is
/// recentred so its peak sits on the x = 0 grid point and symmetrized.
/// Falls back to continuation in c from a nearby speed if the direct solve
/// diverges.  Throws WrongBranch if every candidate collapses to zero,
/// NewtonDivergence if none converges.
PulseProfile solve_primary_pulse(double c, const BridgeGrid& grid);

/// Primary-pulse family over an increasing speed grid, with the momentum
/// c ||dU/dx||^2 and d''(c) = -d/dc (c ||dU/dx||^2) by centred differences
/// (one-sided at the ends).
struct PulseFamily {
  BridgeGrid grid;
  std::vector<double> c_grid;
  std::vector<PulseProfile> profiles;
  RealVector momentum;
  RealVector d2;
  /// Index of the c_grid entry nearest to c.
  int index_of(double c) const;
  /// Centred-difference dU/dc at an interior index.
  RealVector profile_derivative(int i) const;
};

/// Continuation in c: each converged profile seeds the next speed.  Checks
/// the momentum for continuation jumps (relative jump > 0.25 throws
/// WrongBranch).
PulseFamily build_family(double c_min, double c_max, int count, const BridgeGrid& grid);

/// n-pulse construction: initial guess = sum of primary translates with
/// consecutive peak distances 2 X_j, X_j = (pi/beta)(2m + k_j) + X~, where
/// the phase shift X~ is calibrated by minimizing the first Newton
/// correction over a scan of X~ in [0, pi/beta); Newton-refined, peaks
/// re-measured.  ks empty returns the primary unchanged.  Throws
/// PulseCollapse when the converged profile has fewer peaks than requested.
PulseProfile construct_multipulse(const PulseProfile& primary, const BridgeGrid& grid, int m,
                                  const std::vector<int>& ks);

/// The symmetric operator D4 + c^2 D2 + diag(e^U) on the grid.
RealMatrix a0_matrix(const PulseProfile& profile, const BridgeGrid& grid);

/// The quadratic travelling pencil I lambda^2 + (-2c D1) lambda + A_0(U).
StarEvenPencil bridge_pencil(const PulseProfile& profile, const BridgeGrid& grid);

/// One small eigenvalue of A_0(U) with its eigenvector.
struct SmallEigenvalue {
  double nu = 0.0;
  RealVector vector;    ///< l2-orthonormal grid eigenvector
  bool kernel = false;  ///< best overlap with dU/dx: the translation direction
};

/// Full Hermitian eigensolve of A_0(U): all eigenvalues ascending, the
/// small-magnitude ones (|nu| < delta_report) classified, the most negative
/// eigenvalue, and the measured edge of the discretized essential band.
struct A0Report {
  RealVector eigenvalues;
  std::vector<SmallEigenvalue> small;  ///< ascending by nu
  double delta_report = 0.0;
  double band_edge = 0.0;           ///< smallest eigenvalue above half the analytic edge
  double band_edge_analytic = 0.0;  ///< 1 - c^4/4
  double lambda_minus = 0.0;        ///< most negative eigenvalue
  double gap_above_small = 0.0;     ///< |nearest eigenvalue outside the small window|
  std::vector<std::string> notes;
};

/// delta_report < 0 selects max(1e-3, 10 e^{-2 alpha X_min}) for
/// multi-pulses (measured X_min) and 1e-3 for the primary.
A0Report a0_spectrum(const PulseProfile& profile, const BridgeGrid& grid,
                     double delta_report = -1.0);

/// Companion eigensolve of the travelling pencil.  Eigenvalues with
/// |Im lambda| >= 0.98 rho(c) are tagged essential-band and excluded from
/// the census; |lambda| <= kernel_window is treated as kernel bookkeeping
/// (the discretization spreads the translation kernel into a small
/// symmetric pair).
SpectrumReport quadratic_spectrum(const PulseProfile& profile, const BridgeGrid& grid,
                                  const Tolerances& tol = {}, double kernel_window = 0.0);

/// One predicted small polynomial eigenvalue pair from a measured small
/// eigenvalue nu of A_0: nu < 0 gives the imaginary pair
/// +-i ||dU/dx|| sqrt(|nu|/d''), negative signature; nu > 0 the real pair
/// +-||dU/dx|| sqrt(nu/d''); the kernel maps to lambda = 0 (its magnitude
/// still records where the discrete artifact pair sits).
struct PredictedEigenvalue {
  double nu = 0.0;
  bool kernel = false;
  bool imaginary_pair = false;
  Complex lambda;          ///< +i branch of the pair (0 for the kernel)
  double magnitude = 0.0;  ///< ||dU/dx|| sqrt(|nu|/d'')
  int signature = 0;       ///< 1 for negative-signature imaginary pairs
  bool unstable = false;   ///< real pair
};

/// Throws NegativeD2 when the family's d''(c) <= 0 at the nearest grid
/// speed (the criterion does not apply).
std::vector<PredictedEigenvalue> interaction_prediction(const PulseFamily& family, double c,
                                                        const std::vector<SmallEigenvalue>& nus);

/// Convenience overload: plain eigenvalues, |nu| <= 1e-12 marks the kernel.
std::vector<PredictedEigenvalue> interaction_prediction(const PulseFamily& family, double c,
                                                        const std::vector<double>& nus);

/// |lambda| window that separates the discrete kernel-artifact pair from the
/// predicted interaction pairs: geometric midpoint when the artifact lies
/// below every interaction magnitude, 1.5x the artifact otherwise, 0 when
/// there is no kernel entry.
double kernel_window_from(const std::vector<PredictedEigenvalue>& preds);

/// Numerical verification that the scaled Krein matrix restricted to the
/// small-eigenvalue subspace is diagonal to leading order:
///   -K(z)/z  ~  ||dU/dx||^2 diag(nu_j) + d''(c) I z^2,
/// in the normalization <s_i, s_j> = ||dU/dx||^2 delta_ij.  Reports the
/// per-diagonal cubic least-squares fit over a dyadic z set, the fitted z^2
/// coefficient against the family d''(c), the K_1 magnitude, the
/// off-diagonal-to-diagonal ratio, and the K_2 diagonal against the
/// quadrature value -2c <d^2U/dx^2, dU/dc>.
struct KreinDiagonalReport {
  std::vector<double> z_points;
  RealMatrix curves;                  ///< row i: diag of -K(z_i)/z (normalized)
  std::vector<double> fitted_constant;  ///< per-diagonal fit: a_j ~ ||dU/dx||^2 nu_j
  std::vector<double> fitted_d2;        ///< per-diagonal fit: c_j ~ d''(c)
  std::vector<double> nu_scaled;        ///< ||dU/dx||^2 nu_j
  double family_d2 = 0.0;
  double d2_relative_error = 0.0;  ///< |fit - family| / family, worst diagonal
  double k1_magnitude = 0.0;       ///< max |(K_1)_{jk}|, normalized
  double offdiag_ratio = 0.0;      ///< max offdiag / max diag of -K(z)/z over the z set
  double k2_paper_diag = 0.0;      ///< mean_j ||dU/dx||^2 ((K_2)_{jj} - 1)
  double k2_quadrature = 0.0;      ///< -2c <d^2U/dx^2, dU/dc>
  double dxu_norm2 = 0.0;
  double x_min = 0.0;
  double odd_even_inner = 0.0;     ///< <dU/dx, dU/dc>, vanishes by parity
  double by_parts_gap = 0.0;       ///< |d'' - (2c<d^2U/dx^2,dU/dc> - ||dU/dx||^2)|
  std::vector<std::string> notes;
};

struct KreinDiagonalOptions {
  std::vector<double> z_points;  ///< empty: dyadic set around the largest predicted magnitude
};

KreinDiagonalReport verify_krein_diagonal(const PulseProfile& multi, const PulseFamily& family,
                                          const KreinDiagonalOptions& opt = {});

}  // namespace krein
