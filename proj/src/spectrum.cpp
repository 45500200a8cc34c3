#include "krein/spectrum.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/LU>
#include <Eigen/SVD>
#include <algorithm>
#include <numeric>
#include <random>
#include <sstream>

namespace krein {

namespace {

// Companion linearization with A_n^{-1}-scaled coefficients (first companion
// form).  For degree 2 a block scaling s equalizes the identity and
// coefficient blocks, which matters for pencils whose A_0 carries the 1/h^4
// of a fourth-derivative stencil; the eigenvector of the scaled companion is
// [s*v; lambda*v].
struct Linearization {
  Matrix companion;
  double s = 1.0;
};

Linearization build_companion(const StarEvenPencil& p) {
  const Eigen::Index d = p.dim();
  const int n = p.degree();
  Eigen::PartialPivLU<Matrix> lead(p.coeffs.back());
  Linearization lin;
  if (n == 1) {
    lin.companion = -lead.solve(p.coeffs[0]);
    return lin;
  }
  const Matrix hat0 = lead.solve(p.coeffs[0]);
  const Matrix hat1 = lead.solve(p.coeffs[1]);
  lin.s = std::max(1.0, std::sqrt(hat0.cwiseAbs().maxCoeff()));
  lin.companion = Matrix::Zero(2 * d, 2 * d);
  lin.companion.block(0, d, d, d) = lin.s * Matrix::Identity(d, d);
  lin.companion.block(d, 0, d, d) = -hat0 / lin.s;
  lin.companion.block(d, d, d, d) = -hat1;
  return lin;
}

struct RawEigen {
  std::vector<Complex> values;
  Matrix vectors;  // dim x count, columns aligned with values
};

// Extract the pencil eigenvector from a companion eigenvector, choosing the
// better-conditioned block: [s*v; lambda*v] -> top for small |lambda|, bottom
// otherwise.
Vector pencil_vector(const Vector& comp, Complex lambda, Eigen::Index d, double s, int degree) {
  if (degree == 1 || std::abs(lambda) <= s) return comp.head(d);
  return comp.segment(d, d);
}

RawEigen companion_eigensolve(const StarEvenPencil& p, bool want_vectors) {
  const Eigen::Index d = p.dim();
  const int n = p.degree();
  const Linearization lin = build_companion(p);
  RawEigen out;
  if (is_real_pencil(p)) {
    const RealMatrix c = lin.companion.real();
    if (!want_vectors) {
      Eigen::RealSchur<RealMatrix> schur(c, false);
      if (schur.info() != Eigen::Success) throw LinearizationFailure("real Schur failed");
      const RealMatrix& t = schur.matrixT();
      for (Eigen::Index i = 0; i < t.rows();) {
        if (i + 1 < t.rows() && t(i + 1, i) != 0.0) {
          const double tr = t(i, i) + t(i + 1, i + 1);
          const double det = t(i, i) * t(i + 1, i + 1) - t(i, i + 1) * t(i + 1, i);
          const double im = std::sqrt(std::max(0.0, det - tr * tr / 4));
          out.values.emplace_back(tr / 2, im);
          out.values.emplace_back(tr / 2, -im);
          i += 2;
        } else {
          out.values.emplace_back(t(i, i), 0.0);
          ++i;
        }
      }
      return out;
    }
    Eigen::EigenSolver<RealMatrix> es(c, true);
    if (es.info() != Eigen::Success) throw LinearizationFailure("real eigensolve failed");
    out.values.assign(es.eigenvalues().data(), es.eigenvalues().data() + es.eigenvalues().size());
    out.vectors.resize(d, static_cast<Eigen::Index>(out.values.size()));
    const Matrix vecs = es.eigenvectors();
    for (size_t k = 0; k < out.values.size(); ++k)
      out.vectors.col(static_cast<Eigen::Index>(k)) =
          pencil_vector(vecs.col(static_cast<Eigen::Index>(k)), out.values[k], d, lin.s, n);
    return out;
  }
  if (!want_vectors) {
    Eigen::ComplexSchur<Matrix> schur(lin.companion, false);
    if (schur.info() != Eigen::Success) throw LinearizationFailure("complex Schur failed");
    for (Eigen::Index i = 0; i < schur.matrixT().rows(); ++i)
      out.values.push_back(schur.matrixT()(i, i));
    return out;
  }
  Eigen::ComplexEigenSolver<Matrix> es(lin.companion, true);
  if (es.info() != Eigen::Success) throw LinearizationFailure("complex eigensolve failed");
  out.values.assign(es.eigenvalues().data(), es.eigenvalues().data() + es.eigenvalues().size());
  out.vectors.resize(d, static_cast<Eigen::Index>(out.values.size()));
  for (size_t k = 0; k < out.values.size(); ++k)
    out.vectors.col(static_cast<Eigen::Index>(k)) =
        pencil_vector(es.eigenvectors().col(static_cast<Eigen::Index>(k)), out.values[k], d,
                      lin.s, n);
  return out;
}

Complex snap_axes(Complex z, double tol_pair) {
  const double scale = std::max(1.0, std::abs(z));
  double re = z.real(), im = z.imag();
  if (std::abs(re) <= tol_pair * scale) re = 0.0;
  if (std::abs(im) <= tol_pair * scale) im = 0.0;
  return {re, im};
}

// Eigenspace extraction for one cluster when the companion eigensolve ran
// values-only.  P(lambda) is nearly singular at the cluster, so a lightly
// regularized LU turns each solve into a power step onto the near-null
// space.  Vectors beyond the first are kept only when they still meet the
// residual tolerance after deflation, which measures geometric multiplicity
// without a rank-revealing factorization of the full matrix.
void cluster_vectors_by_inverse_iteration(const StarEvenPencil& p, PolyEigenvalue& pe,
                                          const Tolerances& tol) {
  const Eigen::Index d = p.dim();
  const Matrix pl = evaluate(p, pe.lambda);
  const double ridge = 1e-13 * std::max(1.0, pl.cwiseAbs().maxCoeff());
  Eigen::PartialPivLU<Matrix> lu(pl + ridge * Matrix::Identity(d, d));
  const double scale = residual_scale(p, pe.lambda);

  Matrix basis(d, 0);
  double worst = 0.0;
  std::mt19937_64 rng(0x6b8e4e1f2c915a3dULL);
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  for (int want = 0; want < pe.algebraic; ++want) {
    Vector v(d);
    for (Eigen::Index i = 0; i < d; ++i) v(i) = Complex(unif(rng), unif(rng));
    double resid = std::numeric_limits<double>::infinity();
    for (int it = 0; it < 4; ++it) {
      v = lu.solve(v);
      if (basis.cols() > 0) {
        v -= basis * (basis.adjoint() * v);
        v -= basis * (basis.adjoint() * v);
      }
      const double nv = v.norm();
      if (!(nv > 0.0) || !v.allFinite()) {
        resid = std::numeric_limits<double>::infinity();
        break;
      }
      v /= nv;
      resid = (pl * v).norm() / scale;
      if (resid <= 1e-2 * tol.resid) break;
    }
    if (want > 0 && resid > tol.resid) break;
    if (!std::isfinite(resid) || !v.allFinite()) break;
    basis.conservativeResize(d, basis.cols() + 1);
    basis.col(basis.cols() - 1) = v;
    worst = std::max(worst, resid);
  }
  if (basis.cols() == 0) basis = Matrix::Zero(d, 1);
  pe.eigenvectors = basis;
  pe.geometric = std::max(1, static_cast<int>(basis.cols()));
  pe.residual = worst;
}

}  // namespace

std::vector<Complex> polynomial_eigenvalues(const StarEvenPencil& p) {
  return companion_eigensolve(p, false).values;
}

int krein_index_of(const StarEvenPencil& p, Complex lambda0, const Matrix& eigenvectors,
                   const Tolerances& tol) {
  const double scale = std::max(1.0, std::abs(lambda0));
  if (std::abs(lambda0.real()) > tol.pair * scale)
    throw NotImaginary("krein_index_of: eigenvalue is not purely imaginary");
  const double z0 = lambda0.imag();
  if (z0 == 0.0) throw NotImaginary("krein_index_of: eigenvalue is zero");
  const Matrix ip = Complex(0, 1) * evaluate_derivative(p, Complex(0, z0));
  Matrix m = eigenvectors.adjoint() * (-z0 * ip) * eigenvectors;
  m = ((m + m.adjoint()) / 2.0).eval();
  Eigen::SelfAdjointEigenSolver<Matrix> es(m);
  // The restricted matrix is definite at semi-simple imaginary eigenvalues; a
  // numerically zero eigenvalue here would signal a colliding pair, which we
  // do not count as negative.
  const double cut = 1e-12 * std::max(1.0, es.eigenvalues().cwiseAbs().maxCoeff());
  int count = 0;
  for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i)
    if (es.eigenvalues()(i) < -cut) ++count;
  return count;
}

SpectrumReport polynomial_spectrum(const StarEvenPencil& p, const Tolerances& tol,
                                   const BandFilter& band) {
  SpectrumReport rep;
  rep.pencil = p;
  const Eigen::Index d = p.dim();
  // Above this companion size a full eigenvector solve is the dominant cost,
  // so run the Schur form values-only and recover eigenvectors by inverse
  // iteration, cluster by cluster, only where the census needs them.
  const bool lazy = d * p.degree() > 600;
  RawEigen raw = companion_eigensolve(p, !lazy);
  const size_t count = raw.values.size();

  double max_abs = 0.0;
  for (auto z : raw.values) max_abs = std::max(max_abs, std::abs(z));
  // Upper bound on any pair's merge radius; used only to bound the sort
  // window below.
  const double window_eps = tol.cluster * std::max(1.0, max_abs);

  // Single-linkage clustering: sort by real part so only a sliding window
  // needs pairwise distance checks, then union-find.  The merge radius is
  // relative to the pair's own magnitude, not the spectral radius: stiff
  // problems mix eigenvalues of order 1e6 with distinct near-origin ones
  // whose gaps a globally scaled radius would swallow.
  std::vector<size_t> order(count);
  std::iota(order.begin(), order.end(), size_t{0});
  std::sort(order.begin(), order.end(),
            [&](size_t a, size_t b) { return raw.values[a].real() < raw.values[b].real(); });
  std::vector<size_t> parent(count);
  std::iota(parent.begin(), parent.end(), size_t{0});
  std::function<size_t(size_t)> find = [&](size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  for (size_t a = 0; a < count; ++a)
    for (size_t b = a + 1; b < count; ++b) {
      const Complex za = raw.values[order[a]], zb = raw.values[order[b]];
      if (zb.real() - za.real() > window_eps) break;
      const double pair_eps = tol.cluster * std::max({1.0, std::abs(za), std::abs(zb)});
      if (std::abs(za - zb) <= pair_eps) parent[find(order[a])] = find(order[b]);
    }

  std::vector<std::vector<size_t>> groups;
  {
    std::vector<long> slot(count, -1);
    for (size_t i = 0; i < count; ++i) {
      const size_t r = find(i);
      if (slot[r] < 0) {
        slot[r] = static_cast<long>(groups.size());
        groups.emplace_back();
      }
      groups[static_cast<size_t>(slot[r])].push_back(i);
    }
  }

  for (const auto& g : groups) {
    PolyEigenvalue pe;
    Complex mean = 0.0;
    for (size_t i : g) mean += raw.values[i];
    mean /= static_cast<double>(g.size());
    pe.lambda = snap_axes(mean, tol.pair);
    pe.on_imaginary_axis = pe.lambda.real() == 0.0;
    pe.on_real_axis = pe.lambda.imag() == 0.0;
    pe.algebraic = static_cast<int>(g.size());
    pe.origin_cluster = pe.lambda == Complex(0, 0) || std::abs(pe.lambda) <= tol.zero_lambda;
    pe.essential_band = band && !pe.origin_cluster && band(pe.lambda);

    if (!lazy) {
      Matrix vs(d, static_cast<Eigen::Index>(g.size()));
      for (size_t k = 0; k < g.size(); ++k) {
        Vector v = raw.vectors.col(static_cast<Eigen::Index>(g[k]));
        const double nv = v.norm();
        vs.col(static_cast<Eigen::Index>(k)) = nv > 0 ? (v / nv).eval() : v;
      }
      if (g.size() == 1) {
        pe.geometric = 1;
        pe.eigenvectors = vs;
      } else {
        // Geometric multiplicity from the rank of P(lambda); eigenspace basis
        // from the SVD of the cluster's companion vectors.
        Eigen::BDCSVD<Matrix> svd(evaluate(p, pe.lambda));
        const auto& sv = svd.singularValues();
        int rank = 0;
        for (Eigen::Index i = 0; i < sv.size(); ++i)
          if (sv(i) > tol.rank * sv(0)) ++rank;
        pe.geometric = std::clamp(static_cast<int>(d) - rank, 1, pe.algebraic);
        Eigen::JacobiSVD<Matrix> basis(vs, Eigen::ComputeThinU);
        pe.eigenvectors =
            basis.matrixU().leftCols(std::min<Eigen::Index>(pe.geometric, basis.matrixU().cols()));
      }
      const Matrix pl = evaluate(p, pe.lambda);
      const double scale = residual_scale(p, pe.lambda);
      double resid = 0.0;
      for (Eigen::Index c = 0; c < pe.eigenvectors.cols(); ++c)
        resid = std::max(resid, (pl * pe.eigenvectors.col(c)).norm() / scale);
      pe.residual = resid;
    } else if (!pe.essential_band) {
      cluster_vectors_by_inverse_iteration(p, pe, tol);
    } else {
      // Band-tagged clusters are excluded from the census, so their Jordan
      // structure is never assessed on the lazy path.
      pe.geometric = pe.algebraic;
      pe.eigenvectors = Matrix(d, 0);
      pe.residual = 0.0;
    }

    const bool semisimple = pe.geometric == pe.algebraic;
    if (!semisimple && !pe.origin_cluster && !pe.essential_band) rep.all_semisimple = false;

    if (pe.on_imaginary_axis && !pe.origin_cluster && !pe.essential_band) {
      if (semisimple) {
        pe.krein_index = krein_index_of(p, pe.lambda, pe.eigenvectors, tol);
      } else {
        std::ostringstream note;
        note << "eigenvalue " << pe.lambda.imag() << "i not semi-simple (alg " << pe.algebraic
             << ", geo " << pe.geometric << "); no Krein index";
        rep.notes.push_back(note.str());
      }
    }
    rep.eigenvalues.push_back(std::move(pe));
  }

  std::sort(rep.eigenvalues.begin(), rep.eigenvalues.end(),
            [](const PolyEigenvalue& a, const PolyEigenvalue& b) {
              if (a.lambda.imag() != b.lambda.imag()) return a.lambda.imag() < b.lambda.imag();
              return a.lambda.real() < b.lambda.real();
            });

  for (const auto& pe : rep.eigenvalues) {
    if (pe.essential_band || pe.origin_cluster) continue;
    if (pe.on_real_axis && pe.lambda.real() > 0) rep.census.k_r += pe.algebraic;
    if (!pe.on_real_axis && !pe.on_imaginary_axis && pe.lambda.real() > 0)
      rep.census.k_c += pe.algebraic;
    if (pe.on_imaginary_axis && pe.krein_index) rep.census.k_i_minus += *pe.krein_index;
  }
  return rep;
}

}  // namespace krein
