#include <pybind11/complex.h>
#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "krein/bridge.hpp"
#include "krein/hki.hpp"
#include "krein/kdv5.hpp"
#include "krein/krein_matrix.hpp"
#include "krein/pencil.hpp"
#include "krein/spectrum.hpp"
#include "krein/subspace.hpp"

namespace py = pybind11;
using namespace krein;

namespace {

StarEvenPencil make_pencil(const std::vector<Matrix>& coeffs) { return validate_pencil(coeffs); }

py::dict census_dict(const IndexCensus& census) {
  py::dict d;
  d["k_r"] = census.k_r;
  d["k_c"] = census.k_c;
  d["k_i_minus"] = census.k_i_minus;
  d["total"] = census.total();
  return d;
}

py::dict spectrum_dict(const SpectrumReport& rep) {
  py::list evs;
  for (const PolyEigenvalue& pe : rep.eigenvalues) {
    py::dict e;
    e["lambda"] = pe.lambda;
    e["algebraic"] = pe.algebraic;
    e["geometric"] = pe.geometric;
    e["residual"] = pe.residual;
    e["on_imaginary_axis"] = pe.on_imaginary_axis;
    e["on_real_axis"] = pe.on_real_axis;
    e["essential_band"] = pe.essential_band;
    e["origin_cluster"] = pe.origin_cluster;
    e["krein_index"] = pe.krein_index ? py::cast(*pe.krein_index) : py::none();
    evs.append(std::move(e));
  }
  py::dict d;
  d["eigenvalues"] = std::move(evs);
  d["census"] = census_dict(rep.census);
  d["all_semisimple"] = rep.all_semisimple;
  d["notes"] = rep.notes;
  return d;
}

py::dict index_dict(const IndexReport& rep) {
  py::dict d;
  d["k_ham"] = rep.k_ham;
  d["n_a0"] = rep.n_a0;
  d["n_a2"] = rep.n_a2;
  d["n_constraint"] = rep.n_constraint;
  d["kernel_dim"] = rep.kernel_dim;
  d["constraint_eigenvalues"] = rep.constraint_eigenvalues;
  d["notes"] = rep.notes;
  return d;
}

}  // namespace

PYBIND11_MODULE(kreinmat, m) {
  m.doc() =
      "Spectral analysis of star-even operator pencils: polynomial spectra "
      "with Krein signatures, Krein matrices, and Hamiltonian index counts, "
      "plus the dispersion/travelling-wave helper models.";

  static py::exception<Error> exc(m, "KreinError");
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      py::set_error(exc, ("[" + e.code + "] " + e.what()).c_str());
    }
  });

  m.def(
      "spectrum",
      [](const std::vector<Matrix>& coeffs, double band_min_abs_im, double kernel_window) {
        const StarEvenPencil p = make_pencil(coeffs);
        Tolerances tol;
        tol.zero_lambda = kernel_window;
        BandFilter band;
        if (band_min_abs_im > 0)
          band = [band_min_abs_im](Complex z) { return std::abs(z.imag()) >= band_min_abs_im; };
        return spectrum_dict(polynomial_spectrum(p, tol, band));
      },
      py::arg("coeffs"), py::arg("band_min_abs_im") = -1.0, py::arg("kernel_window") = 0.0,
      "Polynomial spectrum of the pencil given by its coefficient list "
      "[A_0, A_1, ...]: eigenvalue clusters with multiplicities, Krein "
      "indices on the imaginary axis, and the point-spectrum index census.");

  m.def(
      "eigenvalues",
      [](const std::vector<Matrix>& coeffs) { return polynomial_eigenvalues(make_pencil(coeffs)); },
      py::arg("coeffs"), "Plain polynomial eigenvalues (no clustering, no indices).");

  m.def(
      "krein_matrix",
      [](const std::vector<Matrix>& coeffs, double z) {
        const StarEvenPencil p = make_pencil(coeffs);
        const Subspace s = select_subspace(p.coeffs[0]);
        const KreinEvaluation ke = krein_matrix_at(p, s, z);
        if (!ke.projected_invertible)
          throw ComplementSingular("Krein matrix undefined at z (projected block singular)");
        return ke.matrix;
      },
      py::arg("coeffs"), py::arg("z"),
      "Scaled Krein matrix at real z on the nonpositive subspace of A_0.");

  m.def(
      "krein_zeros",
      [](const std::vector<Matrix>& coeffs, double z_min, double z_max, int points) {
        const StarEvenPencil p = make_pencil(coeffs);
        const Subspace s = select_subspace(p.coeffs[0]);
        std::vector<double> grid(static_cast<size_t>(points));
        for (int i = 0; i < points; ++i)
          grid[static_cast<size_t>(i)] = z_min + (z_max - z_min) * i / (points - 1);
        KreinCurveSet curves = trace_branches(p, s, grid);
        locate_zeros(p, s, curves);
        py::list out;
        for (const KreinZero& z : curves.zeros) {
          py::dict d;
          d["z"] = z.z;
          d["branch"] = z.branch;
          d["slope"] = z.slope;
          d["signature"] = z.signature;
          d["degenerate"] = z.degenerate;
          out.append(std::move(d));
        }
        return out;
      },
      py::arg("coeffs"), py::arg("z_min"), py::arg("z_max"), py::arg("points") = 501,
      "Refined zeros of the Krein eigenvalue branches on [z_min, z_max].");

  m.def(
      "hki",
      [](const std::vector<Matrix>& coeffs) {
        const StarEvenPencil p = make_pencil(coeffs);
        if (p.degree() == 1) return index_dict(hki_linear(p.coeffs[0], p.coeffs[1]));
        if (p.degree() == 2)
          return index_dict(hki_quadratic(p.coeffs[0], p.coeffs[1], p.coeffs[2]));
        throw ConfigInvalid("index formulas cover degrees 1 and 2");
      },
      py::arg("coeffs"),
      "Hamiltonian index count k_r + k_c + k_i^- from the kernel-reduced "
      "coefficient formula.");

  // --- fifth-order dispersion model ----------------------------------------
  m.def(
      "dispersion",
      [](int n, double mu, double b) { return dispersion(n, mu, Kdv5Params::with_b(b)); },
      py::arg("n"), py::arg("mu"), py::arg("b") = -8.0 / 15.0);
  m.def(
      "dispersion_z",
      [](int n, double mu, double b) { return dispersion_z(n, mu, Kdv5Params::with_b(b)); },
      py::arg("n"), py::arg("mu"), py::arg("b") = -8.0 / 15.0);
  m.def(
      "collisions",
      [](double b, int n_min, int n_max, double mu_min, double mu_max) {
        py::list out;
        for (const CollisionPrediction& c :
             predict_collisions(Kdv5Params::with_b(b), n_min, n_max, mu_min, mu_max)) {
          py::dict d;
          d["mu"] = c.mu;
          d["z"] = c.z;
          d["n_pos"] = c.n_pos;
          d["n_neg"] = c.n_neg;
          out.append(std::move(d));
        }
        return out;
      },
      py::arg("b") = -8.0 / 15.0, py::arg("n_min") = -3, py::arg("n_max") = 3,
      py::arg("mu_min") = 1e-9, py::arg("mu_max") = 0.5,
      "Opposite-signature dispersion-curve crossings (potential instability "
      "bubbles at zero amplitude).");
  m.def(
      "periodic_wave",
      [](double amplitude, double b, int modes) {
        Kdv5Params params = Kdv5Params::with_b(b);
        params.modes = modes;
        const PeriodicWave w = solve_periodic_wave(params, amplitude);
        py::dict d;
        d["coeffs"] = w.coeffs;
        d["epsilon"] = w.epsilon;
        d["ell"] = w.ell;
        d["residual_norm"] = w.residual_norm;
        return d;
      },
      py::arg("amplitude"), py::arg("b") = -8.0 / 15.0, py::arg("modes") = 32);

  // --- suspension-bridge travelling-wave model ------------------------------
  m.def(
      "linear_rates",
      [](double c) {
        const LinearRates r = linear_rates(c);
        return py::make_tuple(r.alpha, r.beta);
      },
      py::arg("c"), "Tail decay and oscillation rates (alpha, beta) of the pulse.");
  m.def(
      "essential_band",
      [](double c) {
        const EssentialBand b = essential_band(c);
        return py::make_tuple(b.rho, b.argmin_r);
      },
      py::arg("c"),
      "Edge rho of the essential band {i r : |r| >= rho} and its minimizer.");
  m.def("band_edge", &a0_band_edge, py::arg("c"),
        "Left edge 1 - c^4/4 of the essential spectrum of the linearized "
        "wave operator.");
}
