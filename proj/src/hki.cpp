#include "krein/hki.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/LU>
#include <sstream>

namespace krein {

NegativeIndex negative_index(const Matrix& h, double zero_tol) {
  Eigen::SelfAdjointEigenSolver<Matrix> es((h + h.adjoint()) / 2.0, Eigen::EigenvaluesOnly);
  NegativeIndex out;
  out.eigenvalues = es.eigenvalues();
  for (Eigen::Index i = 0; i < out.eigenvalues.size(); ++i) {
    const double ev = out.eigenvalues(i);
    if (std::abs(ev) <= zero_tol)
      ++out.kernel_dim;
    else if (ev < 0)
      ++out.count;
    if (std::abs(ev) > zero_tol / 10 && std::abs(ev) <= 10 * zero_tol)
      out.near_zero_warning = true;
  }
  return out;
}

namespace {

struct KernelSplit {
  Matrix kernel;      // dim x k
  Matrix range;       // dim x (dim-k), A_0-invariant complement
  RealVector range_eigenvalues;
  int n_neg = 0;
};

KernelSplit split_kernel(const Matrix& a0, double kernel_tol) {
  Eigen::SelfAdjointEigenSolver<Matrix> es((a0 + a0.adjoint()) / 2.0);
  KernelSplit ks;
  std::vector<Eigen::Index> kern, rng;
  for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) {
    const double ev = es.eigenvalues()(i);
    if (std::abs(ev) <= kernel_tol)
      kern.push_back(i);
    else {
      rng.push_back(i);
      if (ev < 0) ++ks.n_neg;
    }
  }
  ks.kernel.resize(a0.rows(), static_cast<Eigen::Index>(kern.size()));
  for (size_t j = 0; j < kern.size(); ++j)
    ks.kernel.col(static_cast<Eigen::Index>(j)) = es.eigenvectors().col(kern[j]);
  ks.range.resize(a0.rows(), static_cast<Eigen::Index>(rng.size()));
  ks.range_eigenvalues.resize(static_cast<Eigen::Index>(rng.size()));
  for (size_t j = 0; j < rng.size(); ++j) {
    ks.range.col(static_cast<Eigen::Index>(j)) = es.eigenvectors().col(rng[j]);
    ks.range_eigenvalues(static_cast<Eigen::Index>(j)) = es.eigenvalues()(rng[j]);
  }
  return ks;
}

// [-A_1 A_0^{-1} A_1]|_ker plus optional [A_2]|_ker, with A_0^{-1} realized on
// the A_0-invariant complement of the kernel.
Matrix constraint_matrix(const KernelSplit& ks, const Matrix& a1, const Matrix* a2,
                         const Tolerances& tol) {
  // Genericity: A_1 must map the kernel into its complement.
  const Matrix kk = ks.kernel.adjoint() * a1 * ks.kernel;
  const double a1_scale = std::max(1.0, a1.cwiseAbs().maxCoeff());
  if (kk.cwiseAbs().maxCoeff() > 1e-7 * a1_scale) {
    std::ostringstream msg;
    msg << "A_1 does not map ker(A_0) into its complement (block norm "
        << kk.cwiseAbs().maxCoeff() << ")";
    throw KernelMapViolation(msg.str());
  }
  const Matrix b = ks.range.adjoint() * a1 * ks.kernel;  // (dim-k) x k
  Matrix c = -(ks.kernel.adjoint() * a1 * ks.range) *
             ks.range_eigenvalues.cwiseInverse().cast<Complex>().asDiagonal() * b;
  if (a2) c += ks.kernel.adjoint() * (*a2) * ks.kernel;
  c = ((c + c.adjoint()) / 2.0).eval();
  Eigen::SelfAdjointEigenSolver<Matrix> es(c, Eigen::EigenvaluesOnly);
  const double cmax = es.eigenvalues().cwiseAbs().maxCoeff();
  const double cmin = es.eigenvalues().cwiseAbs().minCoeff();
  if (cmin <= tol.rank * std::max(1.0, cmax))
    throw SingularConstraint("constraint matrix on ker(A_0) is numerically singular");
  return c;
}

IndexReport hki_impl(const Matrix& a0, const Matrix& a1, const Matrix* a2,
                     const Tolerances& tol, double kernel_tol) {
  Eigen::SelfAdjointEigenSolver<Matrix> probe((a0 + a0.adjoint()) / 2.0, Eigen::EigenvaluesOnly);
  const double a0_norm = probe.eigenvalues().cwiseAbs().maxCoeff();
  if (kernel_tol <= 0) kernel_tol = tol.zero_subspace * std::max(1.0, a0_norm);

  IndexReport rep;
  KernelSplit ks = split_kernel(a0, kernel_tol);
  rep.kernel_dim = static_cast<int>(ks.kernel.cols());
  rep.n_a0 = ks.n_neg;
  if (a2) {
    NegativeIndex n2 = negative_index(*a2, tol.zero_subspace * std::max(1.0, a0_norm));
    rep.n_a2 = n2.count;
    if (n2.kernel_dim > 0) rep.notes.push_back("A_2 has a numerical kernel");
  }
  if (rep.kernel_dim > 0) {
    const Matrix c = constraint_matrix(ks, a1, a2, tol);
    Eigen::SelfAdjointEigenSolver<Matrix> es(c, Eigen::EigenvaluesOnly);
    rep.constraint_eigenvalues = es.eigenvalues();
    for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i)
      if (es.eigenvalues()(i) < 0) ++rep.n_constraint;
  }
  rep.k_ham = rep.n_a0 + rep.n_a2 - rep.n_constraint;
  return rep;
}

}  // namespace

IndexReport hki_linear(const Matrix& a0, const Matrix& a1, const Tolerances& tol,
                       double kernel_tol) {
  return hki_impl(a0, a1, nullptr, tol, kernel_tol);
}

IndexReport hki_quadratic(const Matrix& a0, const Matrix& a1, const Matrix& a2,
                          const Tolerances& tol, double kernel_tol) {
  return hki_impl(a0, a1, &a2, tol, kernel_tol);
}

CensusCheck census_check(const IndexReport& formula, const SpectrumReport& spectrum) {
  CensusCheck out;
  out.formula = formula.k_ham;
  out.census = spectrum.census;
  out.census_reliable = spectrum.all_semisimple;
  for (const auto& note : spectrum.notes) out.detail.push_back(note);
  out.consistent = out.formula == out.census.total();
  if (!out.consistent) {
    std::ostringstream msg;
    msg << "formula count " << out.formula << " != census " << out.census.total() << " (k_r "
        << out.census.k_r << ", k_c " << out.census.k_c << ", k_i^- " << out.census.k_i_minus
        << ")";
    out.detail.push_back(msg.str());
  }
  return out;
}

}  // namespace krein
