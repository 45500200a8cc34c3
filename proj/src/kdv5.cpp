#include "krein/kdv5.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "krein/parallel.hpp"
#include "krein/subspace.hpp"

namespace krein {

namespace {

// Fourier symbol of the steady linear operator at wavenumber kappa,
// L(kappa) = (2/15) l^4 kappa^4 + b l^2 kappa^2 - c0.
double lin_symbol(double ell, double kappa, const Kdv5Params& p) {
  const double k2 = kappa * kappa;
  const double l2 = ell * ell;
  return (2.0 / 15.0) * l2 * l2 * k2 * k2 + p.b * l2 * k2 - p.c0;
}

double lin_symbol_dell(double ell, double kappa, const Kdv5Params& p) {
  const double k2 = kappa * kappa;
  return (8.0 / 15.0) * ell * ell * ell * k2 * k2 + 2.0 * p.b * ell * k2;
}

// Symmetrized quadratic-form kernel of the Galerkin nonlinearity:
// f_l(u)_k = sum_m gtilde(k, m) U_{k-m} U_m.
double gtilde(double ell, int k, int m) {
  const int j = k - m;
  return 1.5 - 0.5 * ell * ell * static_cast<double>(m * j + m * m + j * j);
}

double gtilde_dell(double ell, int k, int m) {
  const int j = k - m;
  return -ell * static_cast<double>(m * j + m * m + j * j);
}

struct NewtonOutcome {
  bool converged = false;
  RealVector x;  // (U_0..U_M, ell)
  double residual = 0;
  int iterations = 0;
};

RealVector galerkin_residual(const RealVector& x, double amplitude_target, int M,
                             const Kdv5Params& p) {
  const double ell = x(M + 1);
  auto ucoef = [&](int k) {
    const int a = k < 0 ? -k : k;
    return a <= M ? x(a) : 0.0;
  };
  RealVector g(M + 2);
  for (int k = 0; k <= M; ++k) {
    double conv = 0;
    for (int m = std::max(-M, k - M); m <= M; ++m)
      conv += gtilde(ell, k, m) * ucoef(k - m) * ucoef(m);
    g(k) = lin_symbol(ell, k, p) * x(k) + conv;
  }
  g(M + 1) = 2.0 * x(1) - amplitude_target;
  return g;
}

RealMatrix galerkin_jacobian(const RealVector& x, int M, const Kdv5Params& p) {
  const double ell = x(M + 1);
  auto ucoef = [&](int k) {
    const int a = k < 0 ? -k : k;
    return a <= M ? x(a) : 0.0;
  };
  RealMatrix jac = RealMatrix::Zero(M + 2, M + 2);
  for (int k = 0; k <= M; ++k) {
    jac(k, k) += lin_symbol(ell, k, p);
    jac(k, 0) += 2.0 * gtilde(ell, k, 0) * ucoef(k);
    for (int q = 1; q <= M; ++q)
      jac(k, q) += 2.0 * (gtilde(ell, k, q) * ucoef(k - q) + gtilde(ell, k, -q) * ucoef(k + q));
    double dl = lin_symbol_dell(ell, k, p) * x(k);
    for (int m = std::max(-M, k - M); m <= M; ++m)
      dl += gtilde_dell(ell, k, m) * ucoef(k - m) * ucoef(m);
    jac(k, M + 1) = dl;
  }
  jac(M + 1, 1) = 2.0;
  return jac;
}

NewtonOutcome newton_solve(RealVector x, double amplitude_target, int M, const Kdv5Params& p) {
  NewtonOutcome out;
  double prev = std::numeric_limits<double>::infinity();
  int worse = 0;
  for (int it = 0; it < 60; ++it) {
    const RealVector g = galerkin_residual(x, amplitude_target, M, p);
    const double r = g.cwiseAbs().maxCoeff();
    out.residual = r;
    out.iterations = it;
    if (!std::isfinite(r)) return out;
    if (r <= 1e-12) {
      out.converged = true;
      out.x = x;
      return out;
    }
    worse = r > prev ? worse + 1 : 0;
    if (worse >= 3) return out;
    prev = r;
    const RealMatrix jac = galerkin_jacobian(x, M, p);
    const RealVector step = jac.partialPivLu().solve(-g);
    if (!step.allFinite()) return out;
    x += step;
  }
  return out;
}

PeriodicWave wave_from(const RealVector& x, double amplitude_target, int M,
                       const NewtonOutcome& out) {
  PeriodicWave w;
  w.coeffs = x.segment(0, M + 1);
  w.ell = x(M + 1);
  w.epsilon = amplitude_target;
  w.residual_norm = out.residual;
  w.iterations = out.iterations;
  return w;
}

}  // namespace

void validate_params(const Kdv5Params& p) {
  if (!(p.ell > 0) || p.modes < 2)
    throw ConfigInvalid("kdv5 parameters need ell > 0 and modes >= 2");
  if (std::abs(p.c0 - (2.0 / 15.0 + p.b)) > 1e-12 * std::max(1.0, std::abs(p.b)))
    throw ConfigInvalid("c0 must equal 2/15 + b (primary-harmonic bifurcation point)");
  for (int k = 2; k <= p.modes; ++k) {
    if (std::abs(dispersion(k, 0.0, p)) < 1e-8) {
      std::ostringstream msg;
      msg << "harmonic k=" << k << " resonates with the primary mode (d(k,0) ~ 0)";
      throw ResonanceDetected(msg.str());
    }
  }
}

double dispersion(int n, double mu, const Kdv5Params& p) {
  return lin_symbol(p.ell, n + mu, p);
}

double dispersion_z(int n, double mu, const Kdv5Params& p) {
  return -(n + mu) * dispersion(n, mu, p);
}

std::vector<DispersionCurve> dispersion_curves(const std::vector<double>& mu_grid, int n_min,
                                               int n_max, const Kdv5Params& p) {
  std::vector<DispersionCurve> out;
  for (int n = n_min; n <= n_max; ++n) {
    DispersionCurve curve;
    curve.n = n;
    curve.points.reserve(mu_grid.size());
    for (double mu : mu_grid) {
      DispersionPoint pt;
      pt.mu = mu;
      pt.z = dispersion_z(n, mu, p);
      pt.negative_signature = dispersion(n, mu, p) < 0;
      curve.points.push_back(pt);
    }
    out.push_back(std::move(curve));
  }
  return out;
}

std::vector<CollisionPrediction> predict_collisions(const Kdv5Params& p, int n_min, int n_max,
                                                    double mu_min, double mu_max,
                                                    int grid_points) {
  std::vector<CollisionPrediction> out;
  const double dmu = (mu_max - mu_min) / (grid_points - 1);
  for (int na = n_min; na <= n_max; ++na) {
    for (int nb = na + 1; nb <= n_max; ++nb) {
      auto gap = [&](double mu) { return dispersion_z(na, mu, p) - dispersion_z(nb, mu, p); };
      for (int i = 0; i + 1 < grid_points; ++i) {
        double lo = mu_min + i * dmu, hi = mu_min + (i + 1) * dmu;
        double glo = gap(lo), ghi = gap(hi);
        if (glo == 0.0) ghi = glo;  // endpoint hits are caught by the neighbor cell
        if (!(glo * ghi < 0)) continue;
        for (int it = 0; it < 200 && hi - lo > 1e-10; ++it) {
          const double mid = (lo + hi) / 2, gm = gap(mid);
          if (gm == 0.0) {
            lo = hi = mid;
          } else if (gm * glo < 0) {
            hi = mid;
          } else {
            lo = mid;
            glo = gm;
          }
        }
        const double mu_star = (lo + hi) / 2;
        const double da = dispersion(na, mu_star, p), db = dispersion(nb, mu_star, p);
        if ((da < 0) == (db < 0)) continue;  // same signature: no Hamiltonian-Hopf candidate
        CollisionPrediction c;
        c.mu = mu_star;
        c.z = dispersion_z(na, mu_star, p);
        if (std::abs(c.z) < 1e-8) continue;  // origin crossings carry no signature data
        c.n_pos = da < 0 ? nb : na;
        c.n_neg = da < 0 ? na : nb;
        out.push_back(c);
      }
    }
  }
  std::sort(out.begin(), out.end(),
            [](const CollisionPrediction& a, const CollisionPrediction& b) { return a.mu < b.mu; });
  return out;
}

PeriodicWave solve_periodic_wave(const Kdv5Params& p, double amplitude_target, int M) {
  validate_params(p);
  if (M < 0) M = p.modes;
  RealVector x = RealVector::Zero(M + 2);
  x(M + 1) = p.ell;
  if (amplitude_target == 0.0) {
    NewtonOutcome trivial;
    trivial.converged = true;
    return wave_from(x, 0.0, M, trivial);
  }

  // Direct Newton from the linearized seed; on failure, continuation in the
  // pinned amplitude with dyadic step refinement.
  for (int pieces = 1; pieces <= 64; pieces *= 2) {
    RealVector start = RealVector::Zero(M + 2);
    start(M + 1) = p.ell;
    NewtonOutcome out;
    bool ok = true;
    for (int s = 1; s <= pieces; ++s) {
      const double target = amplitude_target * s / pieces;
      start(1) = target / 2.0;  // re-pin the amplitude coordinate for the next leg
      out = newton_solve(start, target, M, p);
      if (!out.converged) {
        ok = false;
        break;
      }
      start = out.x;
    }
    if (ok) return wave_from(out.x, amplitude_target, M, out);
    if (pieces == 64) {
      std::ostringstream msg;
      msg << "periodic-wave Newton diverged at amplitude " << amplitude_target
          << " (last residual " << out.residual << ")";
      throw NewtonDivergence(msg.str());
    }
  }
  throw NewtonDivergence("periodic-wave continuation exhausted");
}

StarEvenPencil bloch_pencil(const PeriodicWave& wave, double mu, const Kdv5Params& p, int M) {
  if (!(mu > 0.0) || mu > 0.5)
    throw ConfigInvalid("Bloch parameter must lie in (0, 1/2]");
  if (M < 0) M = wave.modes();
  const int dim = 2 * M + 1;
  const double ell = wave.ell;
  Matrix a0 = Matrix::Zero(dim, dim);
  Matrix a1 = Matrix::Zero(dim, dim);
  for (int n = -M; n <= M; ++n) {
    const int i = n + M;
    a0(i, i) = lin_symbol(ell, n + mu, p);
    a1(i, i) = Complex(0.0, -1.0) / (n + mu);
    for (int m = -M; m <= M; ++m) {
      const double uk = wave.coefficient(n - m);
      if (uk == 0.0) continue;
      const double a = n + mu, b = m + mu;
      a0(n + M, m + M) += uk * (3.0 - ell * ell * (a * a - a * b + b * b));
    }
  }
  StarEvenPencil pencil;
  pencil.coeffs = {a0, a1};
  return pencil;
}

std::vector<Complex> zero_amplitude_eigenvalues(double mu, const Kdv5Params& p, int M) {
  std::vector<Complex> out;
  out.reserve(2 * M + 1);
  for (int n = -M; n <= M; ++n) out.emplace_back(0.0, -(n + mu) * dispersion(n, mu, p));
  return out;
}

double bloch_max_re(const PeriodicWave& wave, double mu, const Kdv5Params& p, int M) {
  const StarEvenPencil pencil = bloch_pencil(wave, mu, p, M);
  double max_re = 0;
  for (const Complex& lam : polynomial_eigenvalues(pencil))
    max_re = std::max(max_re, lam.real());
  return max_re;
}

BlochScan bloch_scan(const PeriodicWave& wave, const std::vector<double>& mu_grid,
                     const Kdv5Params& p, double tol_unstable, int M) {
  BlochScan scan;
  scan.samples.resize(mu_grid.size());
  parallel_for(mu_grid.size(), [&](std::size_t i) {
    const double mu = mu_grid[i];
    const StarEvenPencil pencil = bloch_pencil(wave, mu, p, M);
    BlochSample s;
    s.mu = mu;
    for (const Complex& lam : polynomial_eigenvalues(pencil))
      s.max_re = std::max(s.max_re, lam.real());
    Eigen::SelfAdjointEigenSolver<Matrix> es(pencil.coeffs[0], Eigen::EigenvaluesOnly);
    for (Eigen::Index j = 0; j < es.eigenvalues().size(); ++j)
      if (es.eigenvalues()(j) < 0) ++s.n_a0;
    scan.samples[i] = s;
  });
  // Contiguous unstable runs.
  std::size_t i = 0;
  while (i < scan.samples.size()) {
    if (scan.samples[i].max_re <= tol_unstable) {
      ++i;
      continue;
    }
    BubbleInterval b;
    b.found = true;
    b.mu_lo = scan.samples[i].mu;
    b.peak_mu = scan.samples[i].mu;
    b.peak_re = scan.samples[i].max_re;
    while (i < scan.samples.size() && scan.samples[i].max_re > tol_unstable) {
      if (scan.samples[i].max_re > b.peak_re) {
        b.peak_re = scan.samples[i].max_re;
        b.peak_mu = scan.samples[i].mu;
      }
      b.mu_hi = scan.samples[i].mu;
      ++i;
    }
    scan.bubbles.push_back(b);
  }
  return scan;
}

BubbleInterval refine_bubble(const PeriodicWave& wave, const Kdv5Params& p, double mu_seed,
                             double half_width, double tol_unstable, double mu_edge_tol,
                             int scan_points, int M) {
  BubbleInterval out;
  const double lo = std::max(1e-3, mu_seed - half_width);
  const double hi = std::min(0.5, mu_seed + half_width);
  auto f = [&](double mu) { return bloch_max_re(wave, mu, p, M); };

  std::vector<double> mus(scan_points), vals(scan_points);
  for (int i = 0; i < scan_points; ++i) mus[i] = lo + (hi - lo) * i / (scan_points - 1);
  parallel_for(mus.size(), [&](std::size_t i) { vals[i] = f(mus[i]); });

  int best = 0;
  for (int i = 1; i < scan_points; ++i)
    if (vals[i] > vals[best]) best = i;
  if (vals[best] <= tol_unstable) return out;
  out.found = true;

  auto bisect_edge = [&](double inside, double outside) {
    for (int it = 0; it < 80 && std::abs(outside - inside) > mu_edge_tol; ++it) {
      const double mid = (inside + outside) / 2;
      (f(mid) > tol_unstable ? inside : outside) = mid;
    }
    return (inside + outside) / 2;
  };
  int l = best;
  while (l > 0 && vals[l - 1] > tol_unstable) --l;
  out.mu_lo = l == 0 ? mus[0] : bisect_edge(mus[l], mus[l - 1]);
  int r = best;
  while (r + 1 < scan_points && vals[r + 1] > tol_unstable) ++r;
  out.mu_hi = r == scan_points - 1 ? mus[r] : bisect_edge(mus[r], mus[r + 1]);

  // Golden-section peak refinement around the best sample.
  double a = best > 0 ? mus[best - 1] : mus[best];
  double b = best + 1 < scan_points ? mus[best + 1] : mus[best];
  const double gr = (std::sqrt(5.0) - 1.0) / 2.0;
  double x1 = b - gr * (b - a), x2 = a + gr * (b - a);
  double f1 = f(x1), f2 = f(x2);
  for (int it = 0; it < 60 && b - a > 1e-9; ++it) {
    if (f1 < f2) {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + gr * (b - a);
      f2 = f(x2);
    } else {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - gr * (b - a);
      f1 = f(x1);
    }
  }
  out.peak_mu = (a + b) / 2;
  out.peak_re = f(out.peak_mu);
  if (vals[best] > out.peak_re) {
    out.peak_re = vals[best];
    out.peak_mu = mus[best];
  }
  return out;
}

KreinCurveSet kdv5_krein_curves(const PeriodicWave& wave, double mu, const Kdv5Params& p,
                                double z_lo, double z_hi, int grid_points,
                                const Tolerances& tol, int M) {
  const StarEvenPencil pencil = bloch_pencil(wave, mu, p, M);
  const Subspace s = select_subspace(pencil.coeffs[0], tol);
  std::vector<double> grid(grid_points);
  for (int i = 0; i < grid_points; ++i)
    grid[i] = z_lo + (z_hi - z_lo) * i / (grid_points - 1);
  KreinCurveSet curves = trace_branches(pencil, s, grid, tol);
  locate_zeros(pencil, s, curves, tol);
  curves.poles = locate_poles(pencil, s, z_lo, z_hi, tol);
  return curves;
}

}  // namespace krein
