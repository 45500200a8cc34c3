#include "krein/krein_matrix.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/LU>
#include <algorithm>
#include <cmath>
#include <limits>

namespace krein {

namespace {

struct Blocks {
  Matrix a;   // S^H P S
  Matrix b;   // Q^H P S
  Eigen::PartialPivLU<Matrix> w_lu;  // LU of Q^H P Q
  double rcond = 0.0;
  bool invertible = false;
};

Blocks project_blocks(const StarEvenPencil& p, const Subspace& s, double z,
                      const Tolerances& tol) {
  const Matrix pl = evaluate(p, Complex(0, z));
  Blocks blk;
  blk.a = s.basis.adjoint() * pl * s.basis;
  if (s.complement.cols() == 0) {
    blk.invertible = true;
    blk.rcond = 1.0;
    return blk;
  }
  blk.b = s.complement.adjoint() * pl * s.basis;
  const Matrix w = s.complement.adjoint() * pl * s.complement;
  blk.w_lu.compute(w);
  blk.rcond = blk.w_lu.rcond();
  blk.invertible = std::isfinite(blk.rcond) && blk.rcond > 1.0 / tol.cond_max &&
                   blk.w_lu.determinant() != Complex(0, 0);
  return blk;
}

// Greedy max-overlap assignment of new eigenvector columns to previous ones.
// Returns perm[new_index] = branch slot, plus the worst matched overlap.
std::pair<std::vector<int>, double> match_branches(const Matrix& prev, const Matrix& next) {
  const int n = static_cast<int>(prev.cols());
  Eigen::MatrixXd overlap = (prev.adjoint() * next).cwiseAbs();
  std::vector<int> perm(n, -1);
  std::vector<bool> row_used(n, false), col_used(n, false);
  double worst = 1.0;
  for (int it = 0; it < n; ++it) {
    double best = -1.0;
    int bi = -1, bj = -1;
    for (int i = 0; i < n; ++i) {
      if (row_used[i]) continue;
      for (int j = 0; j < n; ++j) {
        if (col_used[j]) continue;
        if (overlap(i, j) > best) {
          best = overlap(i, j);
          bi = i;
          bj = j;
        }
      }
    }
    perm[bj] = bi;
    row_used[bi] = col_used[bj] = true;
    worst = std::min(worst, best);
  }
  return {perm, worst};
}

struct EigenSorted {
  RealVector values;
  Matrix vectors;
};

EigenSorted hermitian_eig(const Matrix& m) {
  Eigen::SelfAdjointEigenSolver<Matrix> es((m + m.adjoint()) / 2.0);
  return {es.eigenvalues(), es.eigenvectors()};
}

}  // namespace

KreinEvaluation krein_matrix_at(const StarEvenPencil& p, const Subspace& s, double z,
                                const Tolerances& tol) {
  Blocks blk = project_blocks(p, s, z, tol);
  KreinEvaluation out;
  out.z = z;
  out.projected_invertible = blk.invertible;
  out.cond_estimate = blk.rcond > 0 ? 1.0 / blk.rcond : std::numeric_limits<double>::infinity();
  if (!blk.invertible) return out;
  if (s.complement.cols() == 0)
    out.matrix = -z * blk.a;
  else
    out.matrix = -z * (blk.a - blk.b.adjoint() * blk.w_lu.solve(blk.b));
  return out;
}

KreinEvaluation krein_matrix_derivative(const StarEvenPencil& p, const Subspace& s, double z,
                                        const Tolerances& tol) {
  Blocks blk = project_blocks(p, s, z, tol);
  KreinEvaluation out;
  out.z = z;
  out.projected_invertible = blk.invertible;
  out.cond_estimate = blk.rcond > 0 ? 1.0 / blk.rcond : std::numeric_limits<double>::infinity();
  if (!blk.invertible) return out;

  const Matrix ipd = Complex(0, 1) * evaluate_derivative(p, Complex(0, z));
  const Matrix f = s.basis.adjoint() * ipd * s.basis;
  Matrix k_unscaled, kprime_unscaled;
  if (s.complement.cols() == 0) {
    k_unscaled = blk.a;
    kprime_unscaled = f;
  } else {
    const Matrix e = s.complement.adjoint() * ipd * s.basis;
    const Matrix dmat = s.complement.adjoint() * ipd * s.complement;
    const Matrix x = blk.w_lu.solve(blk.b);  // W^{-1} B
    k_unscaled = blk.a - blk.b.adjoint() * x;
    kprime_unscaled = f + x.adjoint() * dmat * x - e.adjoint() * x - x.adjoint() * e;
  }
  out.matrix = -k_unscaled - z * kprime_unscaled;
  return out;
}

KreinCurveSet trace_branches(const StarEvenPencil& p, const Subspace& s,
                             const std::vector<double>& grid, const Tolerances& tol) {
  KreinCurveSet cs;
  cs.grid = grid;
  const int n = static_cast<int>(s.size());
  cs.branches.assign(n, std::vector<double>(grid.size(), std::numeric_limits<double>::quiet_NaN()));
  cs.valid.assign(grid.size(), false);

  Matrix prev_vectors;
  std::vector<int> prev_slot(n);  // eigen index -> branch slot at the last valid point
  bool have_prev = false;

  for (size_t k = 0; k < grid.size(); ++k) {
    KreinEvaluation ev = krein_matrix_at(p, s, grid[k], tol);
    if (!ev.projected_invertible) continue;
    cs.valid[k] = true;
    EigenSorted eg = hermitian_eig(ev.matrix);
    std::vector<int> slot(n);
    if (!have_prev) {
      for (int j = 0; j < n; ++j) slot[j] = j;
    } else {
      auto [perm, worst] = match_branches(prev_vectors, eg.vectors);
      if (worst < tol.overlap) {
        cs.discontinuities.push_back(static_cast<int>(k));
        for (int j = 0; j < n; ++j) slot[j] = j;  // re-label by sort order
      } else {
        // perm[j] = previous eigen index; inherit its branch slot.
        for (int j = 0; j < n; ++j) slot[j] = prev_slot[static_cast<size_t>(perm[j])];
      }
    }
    for (int j = 0; j < n; ++j) cs.branches[static_cast<size_t>(slot[j])][k] = eg.values(j);
    prev_vectors = eg.vectors;
    prev_slot = slot;
    have_prev = true;
  }
  return cs;
}

namespace {

// r value of the branch continuing v_ref at z, along with the updated vector.
std::pair<double, Vector> branch_value(const StarEvenPencil& p, const Subspace& s, double z,
                                       const Vector& v_ref, const Tolerances& tol) {
  KreinEvaluation ev = krein_matrix_at(p, s, z, tol);
  if (!ev.projected_invertible)
    return {std::numeric_limits<double>::quiet_NaN(), v_ref};
  EigenSorted eg = hermitian_eig(ev.matrix);
  Eigen::Index best = 0;
  double best_ov = -1.0;
  for (Eigen::Index j = 0; j < eg.vectors.cols(); ++j) {
    const double ov = std::abs(v_ref.dot(eg.vectors.col(j)));
    if (ov > best_ov) {
      best_ov = ov;
      best = j;
    }
  }
  return {eg.values(best), eg.vectors.col(best)};
}

}  // namespace

void locate_zeros(const StarEvenPencil& p, const Subspace& s, KreinCurveSet& curves,
                  const Tolerances& tol) {
  const int nb = curves.n_branches();
  for (int j = 0; j < nb; ++j) {
    const auto& br = curves.branches[static_cast<size_t>(j)];
    for (size_t k = 0; k + 1 < curves.grid.size(); ++k) {
      if (!curves.valid[k] || !curves.valid[k + 1]) continue;
      const double ra = br[k], rb = br[k + 1];
      if (std::isnan(ra) || std::isnan(rb)) continue;
      if (ra == 0.0 || ra * rb >= 0.0) continue;
      double lo = curves.grid[k], hi = curves.grid[k + 1];
      if (lo <= 0.0 && hi >= 0.0) continue;  // K_S(0) = 0 for every branch
      // Recover the branch eigenvector at the left endpoint to track through
      // the bisection.
      KreinEvaluation ev = krein_matrix_at(p, s, lo, tol);
      if (!ev.projected_invertible) continue;
      EigenSorted eg = hermitian_eig(ev.matrix);
      Eigen::Index pick = 0;
      double dmin = std::numeric_limits<double>::infinity();
      for (Eigen::Index q = 0; q < eg.values.size(); ++q)
        if (std::abs(eg.values(q) - ra) < dmin) {
          dmin = std::abs(eg.values(q) - ra);
          pick = q;
        }
      Vector v = eg.vectors.col(pick);
      double r_lo = ra;
      double z_mid = 0.5 * (lo + hi);
      double r_mid = std::numeric_limits<double>::quiet_NaN();
      for (int it = 0; it < 200; ++it) {
        z_mid = 0.5 * (lo + hi);
        auto [r, vv] = branch_value(p, s, z_mid, v, tol);
        if (std::isnan(r)) break;  // pole crept into the bracket; give up on it
        v = vv;
        r_mid = r;
        if (r == 0.0 || hi - lo < 8 * std::numeric_limits<double>::epsilon() *
                                       std::max(1.0, std::abs(z_mid)))
          break;
        if ((r_lo < 0) == (r < 0)) {
          lo = z_mid;
          r_lo = r;
        } else {
          hi = z_mid;
        }
      }
      if (std::isnan(r_mid)) continue;
      KreinZero zero;
      zero.z = z_mid;
      zero.branch = j;
      zero.residual = std::abs(r_mid);
      KreinEvaluation der = krein_matrix_derivative(p, s, z_mid, tol);
      if (der.projected_invertible) {
        const Complex q = (v.adjoint() * der.matrix * v)(0, 0);
        zero.slope = q.real() / v.squaredNorm();
      }
      zero.degenerate = std::abs(zero.slope) <= tol.slope || zero.residual > tol.zero_r;
      zero.signature = zero.slope < 0 ? 1 : 0;
      curves.zeros.push_back(zero);
    }
  }
  std::sort(curves.zeros.begin(), curves.zeros.end(),
            [](const KreinZero& a, const KreinZero& b) { return a.z < b.z; });
}

std::vector<KreinPole> locate_poles(const StarEvenPencil& p, const Subspace& s, double z_min,
                                    double z_max, const Tolerances& tol) {
  std::vector<KreinPole> poles;
  if (s.complement.cols() == 0) return poles;

  // The complement-projected pencil is itself star-even; its imaginary
  // eigenvalues are exactly the candidate poles.
  std::vector<Matrix> proj;
  proj.reserve(p.coeffs.size());
  for (const auto& a : p.coeffs) proj.push_back(s.complement.adjoint() * a * s.complement);
  StarEvenPencil pp{proj};
  SpectrumReport rep = polynomial_spectrum(pp, tol);

  std::vector<std::pair<double, const PolyEigenvalue*>> cand;
  for (const auto& pe : rep.eigenvalues) {
    if (!pe.on_imaginary_axis || pe.lambda == Complex(0, 0)) continue;
    const double z = pe.lambda.imag();
    if (z < z_min || z > z_max) continue;
    cand.emplace_back(z, &pe);
  }
  std::sort(cand.begin(), cand.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });

  for (size_t i = 0; i < cand.size(); ++i) {
    const double z = cand[i].first;
    KreinPole pole;
    pole.z = z;

    // Does iz carry a full-pencil eigenfunction inside the complement?
    const Matrix pl = evaluate(p, Complex(0, z));
    const double scale = residual_scale(p, Complex(0, z));
    for (Eigen::Index c = 0; c < cand[i].second->eigenvectors.cols(); ++c) {
      const Vector full = s.complement * cand[i].second->eigenvectors.col(c);
      if ((pl * full).norm() / scale <= tol.resid) {
        pole.carries_full_eigenfunction = true;
        break;
      }
    }

    // Bounded-determinant ratio test: sample |det K_S| at z +- delta over
    // three decades; a genuine pole grows ~1/delta.
    double gap = std::min(z - z_min, z_max - z);
    for (size_t j = 0; j < cand.size(); ++j)
      if (j != i) gap = std::min(gap, std::abs(cand[j].first - z));
    double delta0 = std::max(1e-6, std::min(0.25 * gap, 1e-2 * std::max(1.0, std::abs(z))));
    double level[3] = {0, 0, 0};
    for (int lev = 0; lev < 3; ++lev) {
      const double delta = delta0 * std::pow(10.0, -lev);
      double best = 0.0;
      for (double sgn : {-1.0, 1.0}) {
        KreinEvaluation ev = krein_matrix_at(p, s, z + sgn * delta, tol);
        if (ev.projected_invertible) best = std::max(best, std::abs(ev.matrix.determinant()));
      }
      level[lev] = best;
    }
    pole.det_growth = level[0] > 0 ? level[2] / level[0] : std::numeric_limits<double>::infinity();
    pole.removable = pole.det_growth < 10.0;
    poles.push_back(pole);
  }
  return poles;
}

SmallZReduction small_z_reduction(const StarEvenPencil& p, const Subspace& s,
                                  const Tolerances& tol) {
  if (s.origin == Subspace::Origin::UserSupplied || s.source_eigenvalues.size() != s.size())
    throw EmptySubspace("small_z_reduction: subspace must have a spectral origin in A_0");
  SmallZReduction red;
  const Eigen::Index n = s.size();
  red.m0 = Matrix::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) red.m0(i, i) = s.source_eigenvalues(i);

  const Matrix& a1 = p.coeffs[1];
  red.k1 = s.basis.adjoint() * (Complex(0, 1) * a1) * s.basis;

  Matrix a2s = Matrix::Zero(n, n);
  if (p.degree() == 2) a2s = s.basis.adjoint() * p.coeffs[2] * s.basis;

  if (s.complement.cols() == 0) {
    red.k2 = a2s;
    return red;
  }
  const Matrix w0 = s.complement.adjoint() * p.coeffs[0] * s.complement;
  Eigen::SelfAdjointEigenSolver<Matrix> es((w0 + w0.adjoint()) / 2.0, Eigen::EigenvaluesOnly);
  const double w0max = es.eigenvalues().cwiseAbs().maxCoeff();
  const double w0min = es.eigenvalues().cwiseAbs().minCoeff();
  if (w0min <= tol.zero_subspace * std::max(1.0, w0max))
    throw ComplementSingular("small_z_reduction: A_0 restricted to the complement is singular");
  const Matrix b1 = s.complement.adjoint() * a1 * s.basis;
  Eigen::PartialPivLU<Matrix> w0_lu(w0);
  red.k2 = a2s - (s.basis.adjoint() * a1 * s.complement) * w0_lu.solve(b1);
  return red;
}

std::vector<Complex> interaction_eigenvalues(const Matrix& m0, const Matrix& k2,
                                             const Tolerances& tol) {
  Eigen::JacobiSVD<Matrix> svd(k2);
  const auto& sv = svd.singularValues();
  if (sv(sv.size() - 1) <= tol.rank * std::max(1.0, sv(0)))
    throw SingularConstraint("interaction_eigenvalues: constraint matrix numerically singular");
  Eigen::PartialPivLU<Matrix> lu(k2);
  const Matrix g = lu.solve(m0);
  Eigen::ComplexEigenSolver<Matrix> es(g, false);
  if (es.info() != Eigen::Success)
    throw LinearizationFailure("interaction_eigenvalues: eigensolve failed");
  std::vector<Complex> out;
  out.reserve(2 * static_cast<size_t>(g.rows()));
  for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) {
    const Complex alpha = es.eigenvalues()(i);
    const Complex lam = Complex(0, 1) * std::sqrt(alpha);
    out.push_back(lam);
    out.push_back(-lam);
  }
  std::sort(out.begin(), out.end(), [](Complex a, Complex b) {
    if (a.real() != b.real()) return a.real() < b.real();
    return a.imag() < b.imag();
  });
  return out;
}

}  // namespace krein
