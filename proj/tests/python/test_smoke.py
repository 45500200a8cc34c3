"""Smoke tests for the kreinmat extension module."""

import math

import numpy as np
import pytest

import kreinmat


def test_spectrum_real_pair():
    # diag(-1, 1) + lambda J has eigenvalues +-1: one real positive pair member.
    a0 = np.diag([-1.0, 1.0]).astype(complex)
    a1 = np.array([[0.0, 1.0], [-1.0, 0.0]], dtype=complex)
    rep = kreinmat.spectrum([a0, a1])
    lams = sorted(e["lambda"].real for e in rep["eigenvalues"])
    assert lams == pytest.approx([-1.0, 1.0], abs=1e-12)
    assert rep["census"]["k_r"] == 1
    assert rep["census"]["k_c"] == 0
    assert rep["census"]["k_i_minus"] == 0
    assert rep["all_semisimple"]


def test_spectrum_negative_krein_pair():
    # diag(-1, -2) + lambda J: imaginary pair +-i sqrt(2), both signatures negative.
    a0 = np.diag([-1.0, -2.0]).astype(complex)
    a1 = np.array([[0.0, 1.0], [-1.0, 0.0]], dtype=complex)
    rep = kreinmat.spectrum([a0, a1])
    assert rep["census"]["k_i_minus"] == 2
    for e in rep["eigenvalues"]:
        assert e["on_imaginary_axis"]
        assert abs(abs(e["lambda"].imag) - math.sqrt(2.0)) < 1e-12
        assert e["krein_index"] == 1


def test_spectrum_rejects_asymmetric_input():
    a0 = np.array([[0.0, 1.0], [0.0, 0.0]], dtype=complex)  # not Hermitian
    a1 = np.eye(2, dtype=complex)  # not skew-Hermitian either
    with pytest.raises(kreinmat.KreinError):
        kreinmat.spectrum([a0, a1])


def test_scalar_krein_matrix_cubic():
    # P(lambda) = -1 + lambda^2 on a 1-dim space: S is everything, no Schur
    # complement, so K(z) = -z * P(iz) = -z(-1 - z^2) = z + z^3.
    coeffs = [
        np.array([[-1.0]], dtype=complex),
        np.zeros((1, 1), dtype=complex),
        np.array([[1.0]], dtype=complex),
    ]
    for z in (0.3, -0.7, 1.4):
        k = kreinmat.krein_matrix(coeffs, z)
        assert k.shape == (1, 1)
        assert k[0, 0] == pytest.approx(z + z**3, rel=1e-12)


def test_krein_zeros_slope_signs():
    # diag(-1, -2) + lambda J again: zeros of the Krein branches at z = +-sqrt(2)
    # with negative slopes (both eigenvalues carry negative signature).
    coeffs = [
        np.diag([-1.0, -2.0]).astype(complex),
        np.array([[0.0, 1.0], [-1.0, 0.0]], dtype=complex),
    ]
    zeros = kreinmat.krein_zeros(coeffs, -2.0, 2.0, points=801)
    zs = sorted(round(w["z"], 6) for w in zeros)
    assert zs == pytest.approx([-math.sqrt(2.0), math.sqrt(2.0)], abs=1e-5)
    for w in zeros:
        assert w["slope"] < 0
        assert w["signature"] == 1


def test_hki_matches_census():
    a0 = np.diag([-1.0, 1.0]).astype(complex)
    a1 = np.array([[0.0, 1.0], [-1.0, 0.0]], dtype=complex)
    rep = kreinmat.hki([a0, a1])
    assert rep["k_ham"] == 1
    assert rep["n_a0"] == 1
    assert rep["kernel_dim"] == 0
    census = kreinmat.spectrum([a0, a1])["census"]
    assert rep["k_ham"] == census["k_r"] + census["k_c"] + census["k_i_minus"]


def test_dispersion_closed_form():
    b = -8.0 / 15.0
    c0 = 2.0 / 15.0 + b
    for n, mu in [(0, 0.3), (1, 0.1), (-2, 0.45)]:
        k = n + mu
        expected = (2.0 / 15.0) * k**4 + b * k**2 - c0
        assert kreinmat.dispersion(n, mu) == pytest.approx(expected, rel=1e-14)
        assert kreinmat.dispersion_z(n, mu) == pytest.approx(-k * expected, rel=1e-14)
    # the bifurcation normalization pins d(+-1, 0) = 0
    assert kreinmat.dispersion(1, 0.0) == pytest.approx(0.0, abs=1e-15)


def test_collision_predictions():
    cols = kreinmat.collisions()
    mus = sorted(c["mu"] for c in cols)
    lo = (5.0 - math.sqrt(5.0 * (2.0 * math.sqrt(129.0) - 21.0))) / 10.0
    hi = 1.0 - math.sqrt(10.0) / 5.0
    assert any(abs(m - lo) < 1e-8 for m in mus)
    assert any(abs(m - hi) < 1e-8 for m in mus)


def test_periodic_wave_small_amplitude():
    w = kreinmat.periodic_wave(0.01)
    assert w["residual_norm"] < 1e-10
    assert 2.0 * w["coeffs"][1] == pytest.approx(0.01, rel=1e-10)
    assert w["epsilon"] == pytest.approx(0.01, rel=1e-10)
    # harmonics decay geometrically at small amplitude
    assert abs(w["coeffs"][2]) < abs(w["coeffs"][1])


def test_linear_rates_circle():
    for c in (0.6, 1.2, 1.3):
        alpha, beta = kreinmat.linear_rates(c)
        assert alpha > 0 and beta > 0
        assert alpha**2 + beta**2 == pytest.approx(1.0, rel=1e-14)
    with pytest.raises(kreinmat.KreinError):
        kreinmat.linear_rates(1.5)  # beyond the existence range


def test_essential_band_matches_brute_force():
    c = 1.2
    rho, argmin_r = kreinmat.essential_band(c)
    rs = np.linspace(-10.0, 0.0, 200001)
    brute = np.min(c * rs + np.sqrt(1.0 + rs**4))
    assert rho == pytest.approx(brute, abs=1e-8)
    assert c * argmin_r + math.sqrt(1.0 + argmin_r**4) == pytest.approx(rho, rel=1e-12)
    assert kreinmat.band_edge(c) == pytest.approx(1.0 - c**4 / 4.0, rel=1e-14)
