#pragma once

#include <Eigen/Dense>
#include <complex>
#include <stdexcept>
#include <string>

namespace krein {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;
using RealMatrix = Eigen::MatrixXd;
using RealVector = Eigen::VectorXd;

/// Numerical knobs shared across the library.  All comparisons that involve a
/// scale state it explicitly at the point of use; entries here are the bare
/// multipliers.
struct Tolerances {
  double sym = 1e-10;        ///< coefficient symmetry check, relative to max coefficient norm
  double rank = 1e-10;       ///< SVD rank cutoff, relative to sigma_max
  double resid = 1e-8;       ///< eigenvector residual, relative to pencil scale at lambda
  double pair = 1e-7;        ///< axis snap, relative to max(1,|lambda|)
  double cluster = 1e-7;     ///< multiplicity clustering, relative to max |lambda|
  double zero_subspace = 1e-8; ///< subspace cut, relative to ||A_0||
  double zero_r = 1e-10;     ///< |r_j(z*)| accepted as a zero of a Krein eigenvalue
  double slope = 1e-6;       ///< slope magnitude below which a zero is flagged degenerate
  double match = 1e-6;       ///< zero <-> eigenvalue matching distance
  double fd = 1e-5;          ///< analytic-vs-finite-difference agreement
  double cond_max = 1e10;    ///< condition estimate above which the projected block is singular
  double overlap = 0.5;      ///< eigenvector overlap below which branch matching is a discontinuity
  double unstable = 5e-7;    ///< |Re lambda| above which a Bloch point counts as unstable
  double zero_lambda = 0.0;  ///< absolute window: |lambda| below it is kernel bookkeeping,
                             ///< excluded from the index census (0 = exact zero only)
};

/// Error taxonomy.  Every failure mode the library reports deliberately is a
/// subclass of Error so callers (and the CLI) can render structured reports.
struct Error : std::runtime_error {
  std::string code;
  Error(std::string c, const std::string& what)
      : std::runtime_error(what), code(std::move(c)) {}
};

struct SymmetryViolation : Error {
  explicit SymmetryViolation(const std::string& w) : Error("SymmetryViolation", w) {}
};
struct SingularLeadingCoefficient : Error {
  explicit SingularLeadingCoefficient(const std::string& w)
      : Error("SingularLeadingCoefficient", w) {}
};
struct LinearizationFailure : Error {
  explicit LinearizationFailure(const std::string& w) : Error("LinearizationFailure", w) {}
};
struct NotImaginary : Error {
  explicit NotImaginary(const std::string& w) : Error("NotImaginary", w) {}
};
struct NotSemiSimple : Error {
  explicit NotSemiSimple(const std::string& w) : Error("NotSemiSimple", w) {}
};
struct EmptySubspace : Error {
  explicit EmptySubspace(const std::string& w) : Error("EmptySubspace", w) {}
};
struct ComplementSingular : Error {
  explicit ComplementSingular(const std::string& w) : Error("ComplementSingular", w) {}
};
struct SingularConstraint : Error {
  explicit SingularConstraint(const std::string& w) : Error("SingularConstraint", w) {}
};
struct KernelMapViolation : Error {
  explicit KernelMapViolation(const std::string& w) : Error("KernelMapViolation", w) {}
};
struct ResonanceDetected : Error {
  explicit ResonanceDetected(const std::string& w) : Error("ResonanceDetected", w) {}
};
struct NewtonDivergence : Error {
  explicit NewtonDivergence(const std::string& w) : Error("NewtonDivergence", w) {}
};
struct WrongBranch : Error {
  explicit WrongBranch(const std::string& w) : Error("WrongBranch", w) {}
};
struct PulseCollapse : Error {
  explicit PulseCollapse(const std::string& w) : Error("PulseCollapse", w) {}
};
struct ConfigInvalid : Error {
  explicit ConfigInvalid(const std::string& w) : Error("ConfigInvalid", w) {}
};
struct OutOfRange : Error {
  explicit OutOfRange(const std::string& w) : Error("OutOfRange", w) {}
};
struct NegativeD2 : Error {
  explicit NegativeD2(const std::string& w) : Error("NegativeD2", w) {}
};

}  // namespace krein
