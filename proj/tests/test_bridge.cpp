#include <algorithm>
#include <cmath>
#include <complex>

#include "doctest.h"
#include "krein/bridge.hpp"
#include "krein/hki.hpp"
#include "oracles.hpp"

using namespace krein;

namespace {

BridgeGrid grid_n(int n, double half_length) {
  BridgeGrid g;
  g.n = n;
  g.half_length = half_length;
  return g;
}

double max_derivative_error(const BridgeGrid& g, int order, double omega) {
  const RealMatrix d = periodic_derivative(g, order);
  RealVector f(g.n), want(g.n);
  for (int i = 0; i < g.n; ++i) {
    const double x = g.x(i);
    f(i) = std::cos(omega * x);
    switch (order) {
      case 1: want(i) = -omega * std::sin(omega * x); break;
      case 2: want(i) = -omega * omega * std::cos(omega * x); break;
      default: want(i) = omega * omega * omega * omega * std::cos(omega * x); break;
    }
  }
  return (d * f - want).cwiseAbs().maxCoeff();
}

}  // namespace

TEST_CASE("tail rates solve the linear quartic") {
  for (double c : {0.6, 1.2, 1.3}) {
    const LinearRates r = linear_rates(c);
    CHECK(r.alpha > 0.0);
    CHECK(r.beta > 0.0);
    CHECK(r.alpha * r.alpha + r.beta * r.beta == doctest::Approx(1.0).epsilon(1e-14));
    const Complex mu(r.alpha, r.beta);
    const Complex quartic = mu * mu * mu * mu + c * c * mu * mu + 1.0;
    CHECK(std::abs(quartic) < 1e-12);
  }
  CHECK_THROWS_AS(linear_rates(1.5), OutOfRange);
  CHECK_THROWS_AS(linear_rates(0.0), OutOfRange);
}

TEST_CASE("essential band edge matches the dense-scan oracle") {
  for (double c : {0.9, 1.2, 1.3}) {
    const EssentialBand band = essential_band(c);
    CHECK(band.rho == doctest::Approx(oracle::band_minimum_brute(c)).epsilon(1e-10));
    const double at_argmin =
        c * band.argmin_r + std::sqrt(1.0 + std::pow(band.argmin_r, 4));
    CHECK(at_argmin == doctest::Approx(band.rho).epsilon(1e-12));
    CHECK(a0_band_edge(c) == doctest::Approx(1.0 - std::pow(c, 4) / 4.0).epsilon(1e-14));
  }
}

TEST_CASE("periodic derivative stencils: symmetry and 6th-order convergence") {
  const double omega = 2.0 * M_PI * 3.0 / 60.0;  // three periods across the domain
  for (int order : {1, 2, 4}) {
    const RealMatrix coarse_d = periodic_derivative(grid_n(128, 30.0), order);
    if (order == 1)
      CHECK((coarse_d + coarse_d.transpose()).cwiseAbs().maxCoeff() < 1e-12);
    else
      CHECK((coarse_d - coarse_d.transpose()).cwiseAbs().maxCoeff() < 1e-12);
    // row sums vanish: constants are differentiated to zero
    CHECK((coarse_d * RealVector::Ones(128)).cwiseAbs().maxCoeff() < 1e-10);

    const double e1 = max_derivative_error(grid_n(128, 30.0), order, omega);
    const double e2 = max_derivative_error(grid_n(256, 30.0), order, omega);
    CHECK(e1 / e2 > 40.0);  // 6th order would give 64
  }
}

TEST_CASE("primary pulse: symmetric, centred, exponentially localized") {
  const BridgeGrid g = grid_n(256, 30.0);
  const PulseProfile pulse = solve_primary_pulse(1.2, g);
  CHECK(pulse.residual_norm < 1e-10);
  CHECK(pulse.primary);
  CHECK(pulse.alpha == doctest::Approx(std::sqrt(2.0 - 1.44) / 2.0).epsilon(1e-12));
  REQUIRE(pulse.peaks.size() >= 1);
  CHECK(std::abs(pulse.peaks.front()) < g.spacing());
  // even symmetry about the peak: u(x_i) == u(x_{N-i})
  double asym = 0.0;
  for (int i = 1; i < g.n; ++i) asym = std::max(asym, std::abs(pulse.u(i) - pulse.u(g.n - i)));
  CHECK(asym < 1e-9);
  // tails below the leading-order envelope at half length
  const double umax = pulse.u.cwiseAbs().maxCoeff();
  const double edge = std::abs(pulse.u(0));  // x = -L, farthest from the x = 0 peak
  CHECK(edge < umax * 2.0 * std::exp(-pulse.alpha * 25.0));
}

TEST_CASE("single-pulse operator: one negative direction, kernel, clean band") {
  const BridgeGrid g = grid_n(256, 30.0);
  const PulseProfile pulse = solve_primary_pulse(1.2, g);
  const RealMatrix a0 = a0_matrix(pulse, g);
  CHECK((a0 - a0.transpose()).cwiseAbs().maxCoeff() < 1e-10);

  const A0Report rep = a0_spectrum(pulse, g);
  CHECK(rep.lambda_minus < -0.1);
  REQUIRE(rep.small.size() == 1);  // only the translation kernel is small
  CHECK(rep.small.front().kernel);
  CHECK(std::abs(rep.small.front().nu) < 1e-5);
  CHECK(rep.band_edge_analytic == doctest::Approx(1.0 - std::pow(1.2, 4) / 4.0).epsilon(1e-12));
  CHECK(std::abs(rep.band_edge - rep.band_edge_analytic) < 0.02);
  CHECK(rep.gap_above_small > 0.05);
}

TEST_CASE("double pulses: separation quantization and interaction eigenvalue sign") {
  const BridgeGrid g = grid_n(256, 30.0);
  const PulseProfile primary = solve_primary_pulse(1.2, g);
  const double pib = M_PI / primary.beta;

  for (int k : {0, 1}) {
    CAPTURE(k);
    const PulseProfile dp = construct_multipulse(primary, g, 1, {k});
    CHECK(dp.residual_norm < 1e-10);
    CHECK(dp.pulse_count() == 2);
    REQUIRE(dp.peaks.size() == 2);
    const double x_expected = pib * (2 + k) + dp.x_tilde;
    CHECK(std::abs(dp.x_min() - x_expected) < 0.5);
    CHECK(dp.guess_remainder < 0.5);

    const A0Report rep = a0_spectrum(dp, g);
    REQUIRE(rep.small.size() == 2);  // kernel + one interaction eigenvalue
    int kernels = 0;
    double nu = 0.0;
    for (const SmallEigenvalue& s : rep.small) {
      if (s.kernel)
        ++kernels;
      else
        nu = s.nu;
    }
    CHECK(kernels == 1);
    // alternating sign with the phase index: in-phase gives nu > 0, the
    // half-period offset flips it
    if (k == 0)
      CHECK(nu > 0.0);
    else
      CHECK(nu < 0.0);
    // magnitude consistent with the tail-overlap scale e^{-2 alpha X}
    const double scale = std::exp(-2.0 * primary.alpha * dp.x_min());
    CHECK(std::abs(nu) > 1e-2 * scale);
    CHECK(std::abs(nu) < 1e2 * scale);
  }
}

TEST_CASE("family momentum is concave in c on the stable branch") {
  const BridgeGrid g = grid_n(256, 30.0);
  const PulseFamily family = build_family(1.16, 1.24, 5, g);
  REQUIRE(family.profiles.size() == 5);
  const int i = family.index_of(1.2);
  CHECK(family.c_grid[static_cast<size_t>(i)] == doctest::Approx(1.2).epsilon(1e-12));
  CHECK(family.d2(i) > 0.0);
  CHECK(family.momentum(i) > 0.0);
  // dU/dc is even, dU/dx odd: their inner product vanishes by parity
  const RealVector ddc = family.profile_derivative(i);
  const RealMatrix d1 = periodic_derivative(g, 1);
  const RealVector ddx = d1 * family.profiles[static_cast<size_t>(i)].u;
  CHECK(std::abs(ddx.dot(ddc)) < 1e-4 * ddx.norm() * ddc.norm());
}

TEST_CASE("quadratic spectra of double pulses match the index bookkeeping") {
  const BridgeGrid g = grid_n(256, 30.0);
  const PulseFamily family = build_family(1.16, 1.24, 5, g);
  const PulseProfile& primary = family.profiles[static_cast<size_t>(family.index_of(1.2))];

  for (int k : {0, 1}) {
    CAPTURE(k);
    const PulseProfile dp = construct_multipulse(primary, g, 1, {k});
    const A0Report a0rep = a0_spectrum(dp, g);
    std::vector<SmallEigenvalue> smalls = a0rep.small;
    const std::vector<PredictedEigenvalue> preds =
        interaction_prediction(family, 1.2, smalls);
    REQUIRE(preds.size() == 2);
    const double window = kernel_window_from(preds);
    CHECK(window > 0.0);

    const SpectrumReport spec = quadratic_spectrum(dp, g, Tolerances{}, window);

    const PredictedEigenvalue* interaction = nullptr;
    for (const PredictedEigenvalue& p : preds)
      if (!p.kernel) interaction = &p;
    REQUIRE(interaction != nullptr);

    // nearest non-origin, non-band eigenvalue to the prediction
    double best = 1e300;
    Complex got;
    std::optional<int> got_index;
    for (const PolyEigenvalue& e : spec.eigenvalues) {
      if (e.essential_band || e.origin_cluster) continue;
      const double d = std::abs(e.lambda - interaction->lambda);
      if (d < best) {
        best = d;
        got = e.lambda;
        got_index = e.krein_index;
      }
    }
    CHECK(best / std::abs(interaction->lambda) < 0.3);
    if (k == 0) {
      CHECK(std::abs(got.imag()) < 1e-10);  // real pair
      CHECK(spec.census.k_r == 1);
      CHECK(spec.census.total() == 1);
    } else {
      CHECK(std::abs(got.real()) < 1e-10);  // imaginary pair
      REQUIRE(got_index.has_value());
      CHECK(*got_index == 1);
      CHECK(spec.census.k_i_minus == 2);
      CHECK(spec.census.total() == 2);
    }
  }
}

TEST_CASE("Krein matrix on the small subspace is essentially diagonal") {
  const BridgeGrid g = grid_n(256, 30.0);
  const PulseFamily family = build_family(1.16, 1.24, 5, g);
  const PulseProfile& primary = family.profiles[static_cast<size_t>(family.index_of(1.2))];
  const PulseProfile dp = construct_multipulse(primary, g, 1, {0});

  const KreinDiagonalReport rep = verify_krein_diagonal(dp, family);
  CHECK(rep.offdiag_ratio < 0.5);
  CHECK(rep.family_d2 > 0.0);
  CHECK(rep.d2_relative_error < 0.25);
  CHECK(std::abs(rep.odd_even_inner) < 1e-3 * rep.dxu_norm2);
  CHECK(rep.x_min > 5.0);
  REQUIRE(!rep.z_points.empty());
  REQUIRE(rep.curves.rows() == static_cast<Eigen::Index>(rep.z_points.size()));
}
