#include "krein/subspace.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/QR>
#include <functional>

namespace krein {

namespace {

Subspace from_eigensplit(const Matrix& a0, const std::function<bool(double)>& take,
                         Subspace::Origin origin, const char* what) {
  Eigen::SelfAdjointEigenSolver<Matrix> es((a0 + a0.adjoint()) / 2.0);
  if (es.info() != Eigen::Success) throw LinearizationFailure("Hermitian eigensolve failed");
  std::vector<Eigen::Index> in, out;
  for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i)
    (take(es.eigenvalues()(i)) ? in : out).push_back(i);
  if (in.empty()) throw EmptySubspace(std::string(what) + ": no qualifying eigenvalue");
  Subspace s;
  s.origin = origin;
  s.basis.resize(a0.rows(), static_cast<Eigen::Index>(in.size()));
  s.source_eigenvalues.resize(static_cast<Eigen::Index>(in.size()));
  for (size_t k = 0; k < in.size(); ++k) {
    s.basis.col(static_cast<Eigen::Index>(k)) = es.eigenvectors().col(in[k]);
    s.source_eigenvalues(static_cast<Eigen::Index>(k)) = es.eigenvalues()(in[k]);
  }
  s.complement.resize(a0.rows(), static_cast<Eigen::Index>(out.size()));
  for (size_t k = 0; k < out.size(); ++k)
    s.complement.col(static_cast<Eigen::Index>(k)) = es.eigenvectors().col(out[k]);
  return s;
}

}  // namespace

Subspace select_subspace(const Matrix& a0, const Tolerances& tol) {
  Eigen::SelfAdjointEigenSolver<Matrix> norm_probe((a0 + a0.adjoint()) / 2.0,
                                                   Eigen::EigenvaluesOnly);
  const double a0_norm = norm_probe.eigenvalues().cwiseAbs().maxCoeff();
  const double cut = tol.zero_subspace * std::max(1.0, a0_norm);
  return from_eigensplit(
      a0, [cut](double ev) { return ev < cut; }, Subspace::Origin::NegativePlusKernel,
      "select_subspace");
}

Subspace select_small_subspace(const Matrix& a0, double window) {
  return from_eigensplit(
      a0, [window](double ev) { return std::abs(ev) <= window; }, Subspace::Origin::SmallEigs,
      "select_small_subspace");
}

Subspace subspace_from_basis(const Matrix& basis) {
  if (basis.cols() == 0) throw EmptySubspace("subspace_from_basis: empty basis");
  const Eigen::Index n = basis.rows(), k = basis.cols();
  Eigen::HouseholderQR<Matrix> qr(basis);
  const Matrix q = qr.householderQ() * Matrix::Identity(n, n);
  // Guard against a rank-deficient input basis.
  const Matrix r = qr.matrixQR().topRows(k).template triangularView<Eigen::Upper>();
  for (Eigen::Index i = 0; i < k; ++i)
    if (std::abs(r(i, i)) < 1e-12 * std::max(1.0, std::abs(r(0, 0))))
      throw EmptySubspace("subspace_from_basis: basis is numerically rank deficient");
  Subspace s;
  s.origin = Subspace::Origin::UserSupplied;
  s.basis = q.leftCols(k);
  s.complement = q.rightCols(n - k);
  return s;
}

}  // namespace krein
