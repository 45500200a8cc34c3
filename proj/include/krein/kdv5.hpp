#pragma once

#include <vector>

#include "krein/krein_matrix.hpp"
#include "krein/pencil.hpp"
#include "krein/spectrum.hpp"

namespace krein {

/// Fifth-order KdV model parameters in the rescaled traveling frame.  The
/// linear symbol is p(ik) = (2/15)k^4 + b k^2, the bifurcation wavespeed is
/// c0 = 2/15 + b (so that d(+-1, 0) = 0), and ell is the base spatial
/// scaling (1 at zero amplitude).
struct Kdv5Params {
  double b = -8.0 / 15.0;
  double c0 = 2.0 / 15.0 - 8.0 / 15.0;
  double ell = 1.0;
  int modes = 32;  ///< Fourier truncation: indices -modes..modes

  static Kdv5Params with_b(double b_value) {
    Kdv5Params p;
    p.b = b_value;
    p.c0 = 2.0 / 15.0 + b_value;
    return p;
  }
};

/// Throws ConfigInvalid when c0 is inconsistent with b, ResonanceDetected
/// when d(k, 0) vanishes for some integer 2 <= |k| <= modes (a higher
/// harmonic resonating with the primary one).
void validate_params(const Kdv5Params& p);

/// Steady dispersion function d(n, mu) = (2/15) l^4 (n+mu)^4 + b l^2 (n+mu)^2 - c0.
double dispersion(int n, double mu, const Kdv5Params& p);

/// Purely imaginary spectral curve height z_n(mu) = -(n+mu) d(n,mu); the
/// eigenvalue of the zero-amplitude Bloch pencil for mode n is i z_n(mu).
double dispersion_z(int n, double mu, const Kdv5Params& p);

struct DispersionPoint {
  double mu = 0;
  double z = 0;
  bool negative_signature = false;  ///< d(n, mu) < 0: Krein-eigenvalue-zero branch
};

struct DispersionCurve {
  int n = 0;
  std::vector<DispersionPoint> points;
};

std::vector<DispersionCurve> dispersion_curves(const std::vector<double>& mu_grid, int n_min,
                                               int n_max, const Kdv5Params& p);

/// A crossing of a negative-signature dispersion curve with a
/// positive-signature one: the zero-amplitude location of a potential
/// Hamiltonian-Hopf instability bubble.
struct CollisionPrediction {
  double mu = 0;  ///< crossing parameter, bisected to 1e-10
  double z = 0;   ///< common curve height at the crossing
  int n_pos = 0;  ///< mode on the positive-signature (pole) branch
  int n_neg = 0;  ///< mode on the negative-signature (zero) branch
};

/// Scans all mode pairs in [n_min, n_max] over (mu_min, mu_max) for
/// opposite-signature crossings; same-signature crossings and crossings at
/// z ~ 0 are not reported.
std::vector<CollisionPrediction> predict_collisions(const Kdv5Params& p, int n_min, int n_max,
                                                    double mu_min, double mu_max,
                                                    int grid_points = 2000);

/// Real even 2*pi-periodic wave; coefficient k of exp(iky) is coeffs(|k|),
/// so the cos(y) amplitude is 2 * coeffs(1).
struct PeriodicWave {
  RealVector coeffs;         ///< U_0..U_M
  double epsilon = 0;        ///< pinned cos(y) amplitude 2 U_1
  double ell = 1;            ///< wavenumber correction solved with the profile
  double residual_norm = 0;  ///< max-norm Galerkin residual
  int iterations = 0;

  int modes() const { return static_cast<int>(coeffs.size()) - 1; }
  double coefficient(int k) const {
    const int a = k < 0 ? -k : k;
    return a < coeffs.size() ? coeffs(a) : 0.0;
  }
};

/// Newton iteration on the Fourier-Galerkin system for
/// L_ell u - c0 u + f_ell(u) = 0 with f_ell(u) = (3/2)u^2 +
/// (ell^2/2)(u_y)^2 + ell^2 u u_yy, in the unknowns (U_0..U_M, ell) with the
/// amplitude pinned by 2 U_1 = amplitude_target.  Continuation in amplitude
/// is used when a direct solve stalls.  Converges to residual 1e-12.
/// Throws NewtonDivergence (with the last residual in the message) or
/// ResonanceDetected.
PeriodicWave solve_periodic_wave(const Kdv5Params& p, double amplitude_target, int M = -1);

/// Bloch pencil A_0 + lambda A_1 at Floquet parameter mu in (0, 1/2]:
/// A_0 = Galerkin matrix of L_ell,mu - c0 + f_ell'(U) over exp(iny),
/// n = -M..M, and A_1 = diag(1/(i(n+mu))).  The Frechet derivative
/// f_ell'(U)v = 3Uv + ell^2 U_y Dv + ell^2 (v U_yy + U D^2 v) uses the Bloch
/// derivative D = d/dy + i mu on v and plain d/dy on the wave.  M defaults
/// to the wave's truncation; a larger M zero-pads the wave.
StarEvenPencil bloch_pencil(const PeriodicWave& wave, double mu, const Kdv5Params& p, int M = -1);

/// Closed-form zero-amplitude eigenvalues lambda_n = -i (n+mu) d(n,mu).
std::vector<Complex> zero_amplitude_eigenvalues(double mu, const Kdv5Params& p, int M);

struct BlochSample {
  double mu = 0;
  double max_re = 0;  ///< max over the pencil spectrum of Re(lambda)
  int n_a0 = 0;       ///< negative count of A_0(mu)
};

struct BubbleInterval {
  double mu_lo = 0;
  double mu_hi = 0;
  double peak_mu = 0;
  double peak_re = 0;
  bool found = false;
};

struct BlochScan {
  std::vector<BlochSample> samples;
  std::vector<BubbleInterval> bubbles;  ///< contiguous runs with max_re > tol_unstable
};

/// Eigenvalue sweep over a mu grid; bubbles collect the contiguous sample
/// runs exceeding tol_unstable, with the per-run argmax recorded.
BlochScan bloch_scan(const PeriodicWave& wave, const std::vector<double>& mu_grid,
                     const Kdv5Params& p, double tol_unstable, int M = -1);

/// Growth-rate maximum of the pencil spectrum at a single mu.
double bloch_max_re(const PeriodicWave& wave, double mu, const Kdv5Params& p, int M = -1);

/// Locates one instability bubble near mu_seed: a dense scan over
/// [mu_seed - half_width, mu_seed + half_width] finds samples above
/// tol_unstable, the edges are bisected to mu_edge_tol, and the peak is
/// refined by golden-section search.  found = false when the whole window
/// stays below threshold.
BubbleInterval refine_bubble(const PeriodicWave& wave, const Kdv5Params& p, double mu_seed,
                             double half_width, double tol_unstable, double mu_edge_tol = 1e-6,
                             int scan_points = 81, int M = -1);

/// Krein-matrix diagnostics for the Bloch pencil at fixed mu: the subspace
/// is the span of the nonpositive eigenvectors of A_0(mu), branches are
/// traced over [z_lo, z_hi], and zeros/poles are located on that window.
KreinCurveSet kdv5_krein_curves(const PeriodicWave& wave, double mu, const Kdv5Params& p,
                                double z_lo, double z_hi, int grid_points,
                                const Tolerances& tol = {}, int M = -1);

}  // namespace krein
