import math

import numpy as np
import pytest

from wenonn import adr
from wenonn.core import ContractError
from wenonn.nn import init_network, zero_network
from wenonn.weno import scheme

KINDS = ["linear", "weno5-js", "weno5-z"]


def test_dft_examples(rng):
    assert abs(adr.dft_coefficient(np.ones(16), 1)) < 1e-15
    j = np.arange(16)
    assert adr.dft_coefficient(np.exp(2j * math.pi * 3 * j / 16), 3) == pytest.approx(1.0)
    x = rng.normal(size=32) + 1j * rng.normal(size=32)
    fft = np.fft.fft(x) / 32
    for n in range(17):
        assert adr.dft_coefficient(x, n) == pytest.approx(fft[n], abs=1e-12)
    with pytest.raises(ContractError):
        adr.dft_coefficient(x, 17)


def test_harmonic_field():
    h = adr.HarmonicField(8, 2)
    assert h.phi == pytest.approx(math.pi / 2)
    assert np.allclose(h.real_part + 1j * h.imag_part, np.exp(1j * h.phi * np.arange(8)))


def test_zero_mode():
    for k in KINDS:
        s = adr.modified_wavenumber(scheme(k), 0, 64)
        assert s.phi == 0 and abs(s.Phi) < 1e-14
        assert adr.spectral_error_bound(scheme(k), 0, 64) == pytest.approx((0.0, 0.0), abs=1e-13)


def test_linear_matches_upwind5_transfer():
    phi, Phi = adr.spectrum_values(scheme("linear"), 128)
    assert np.max(np.abs(Phi - adr.up5_transfer(phi))) < 1e-10
    assert np.all(Phi.imag <= 1e-15)


def test_upwind5_transfer_independent_form():
    # sum over flux coefficients: Phi = -i (1 - e^{-i phi}) sum_k c_k e^{i k phi}
    c = {-2: 2 / 60, -1: -13 / 60, 0: 47 / 60, 1: 27 / 60, 2: -3 / 60}
    phi = np.linspace(0, math.pi, 40)
    ref = -1j * (1 - np.exp(-1j * phi)) * sum(v * np.exp(1j * k * phi) for k, v in c.items())
    assert np.allclose(adr.up5_transfer(phi), ref, atol=1e-14)
    small = adr.up5_transfer(np.array([1e-2]))[0]
    assert abs(small - 1e-2) < 1e-11


def test_js_consistent_at_small_phi():
    s = adr.modified_wavenumber(scheme("weno5-js"), 1, 128)
    assert abs(s.Phi - s.phi) < 1e-6


def test_js_more_dissipative_than_z_near_two():
    N = 128
    n = round(2.0 * N / (2 * math.pi))
    js = adr.modified_wavenumber(scheme("weno5-js"), n, N)
    z = adr.modified_wavenumber(scheme("weno5-z"), n, N)
    assert abs(js.Phi.imag) > abs(z.Phi.imag)


def test_spectrum_layout():
    sp = adr.spectrum(scheme("weno5-z"), 64)
    assert len(sp) == 33 and sp[0].phi == 0 and sp[-1].phi == pytest.approx(math.pi)
    assert sp[5].dispersion_error == sp[5].Phi.real - sp[5].phi
    assert sp[5].dissipation == sp[5].Phi.imag


def test_zero_network_spectrum_identical():
    for base in ("weno5-js", "weno5-z"):
        a = adr.spectrum_values(scheme(base), 64)[1]
        b = adr.spectrum_values(scheme(base + "-nn", network=zero_network()), 64)[1]
        assert np.array_equal(a, b)


@pytest.mark.parametrize("N", [64, 100, 128])
@pytest.mark.parametrize("kind", KINDS + ["weno5-js-nn", "weno5-z-nn"])
def test_bound_dominates_error(N, kind):
    net = init_network(seed=2, output_scale=0.3)
    cfg = scheme(kind, network=net)
    for n in range(N // 2 + 1):
        err, bound = adr.spectral_error_bound(cfg, n, N)
        assert err <= bound


def test_linear_bound_small_at_low_mode():
    err, bound = adr.spectral_error_bound(scheme("linear"), 2, 128)
    assert err <= bound < 1e-4


def test_convex_schemes_consistent_as_phi_to_zero():
    for k in KINDS:
        rel = [abs(adr.modified_wavenumber(scheme(k), 1, N).Phi - 2 * math.pi / N) / (2 * math.pi / N)
               for N in (32, 64, 128)]
        assert rel[2] < rel[1] < rel[0]


def test_im_phi_adjoint_matches_forward(rng):
    N, modes = 32, np.arange(17)
    f = rng.normal(size=(17, 2, N))
    g = rng.normal(size=17)
    lhs = g @ adr.phi_from_fluxes(f, modes, N).imag
    rhs = np.sum(adr.im_phi_adjoint(g, modes, N) * f)
    assert lhs == pytest.approx(rhs, rel=1e-12)


def test_bad_grid_rejected():
    with pytest.raises(ContractError):
        adr.modified_wavenumber(scheme("linear"), 1, 63)
