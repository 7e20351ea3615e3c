import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from wenonn.core import ConfigurationError
from wenonn.nn import zero_network
from wenonn.weno import (IDEAL_WEIGHTS, SchemeConfig, SchemeKind, candidate_fluxes, classical_weights,
                         interface_weights, nonlinear_weights, reconstruct, reconstruct_interface,
                         scheme, smoothness_indicators, stencils_periodic, weights_js, weights_z)

CLASSICAL = ["linear", "weno5-js", "weno5-z"]
finite = st.floats(-1e3, 1e3, allow_nan=False, allow_infinity=False)
stencil = st.lists(finite, min_size=5, max_size=5)


def exact_interface(coeffs, x, dx=1.0):
    # sliding-average inverse of a polynomial, truncated after the 4th derivative (exact to degree 5)
    p = np.polynomial.Polynomial(coeffs)
    return p(x) - dx ** 2 / 24 * p.deriv(2)(x) + 7 * dx ** 4 / 5760 * p.deriv(4)(x)


def test_candidates_exact_for_quadratics():
    coeffs = (0.3, -1.2, 0.7)
    s = np.polynomial.Polynomial(coeffs)(np.arange(-2, 3))
    for c in candidate_fluxes(s):
        assert c == pytest.approx(exact_interface(coeffs, 0.5), abs=1e-13)


def test_x_squared_candidates_are_one_sixth():
    s = np.arange(-2, 3) ** 2.0
    assert candidate_fluxes(s) == pytest.approx((1 / 6, 1 / 6, 1 / 6))


def test_ideal_combination_exact_for_quartics():
    s = np.arange(-2, 3) ** 4.0
    got = sum(d * c for d, c in zip(IDEAL_WEIGHTS, candidate_fluxes(s)))
    upwind5 = (2 * s[0] - 13 * s[1] + 47 * s[2] + 27 * s[3] - 3 * s[4]) / 60
    assert got == pytest.approx(-1 / 30, abs=1e-14)
    assert upwind5 == pytest.approx(-1 / 30, abs=1e-14)
    assert exact_interface((0, 0, 0, 0, 1), 0.5) == pytest.approx(-1 / 30, abs=1e-14)


def test_smoothness_of_linear_data():
    assert smoothness_indicators(np.arange(-2.0, 3.0)) == pytest.approx((1.0, 1.0, 1.0))
    assert smoothness_indicators(np.full(5, 3.7)) == pytest.approx((0.0, 0.0, 0.0), abs=1e-28)


def test_smoothness_hand_values():
    # f = (0, 0, 0, 1, 1): only stencils touching the jump see it
    b0, b1, b2 = smoothness_indicators([0, 0, 0, 1, 1])
    assert b0 == 0.0
    assert b1 == pytest.approx(13 / 12 + 0.25)
    assert b2 == pytest.approx(13 / 12 + 9 / 4)


def test_js_weights_hand_value():
    cfg = scheme("weno5-js", epsilon=1e-6)
    beta = (0.0, 1.0, 4.0)
    a = np.array([0.1 / 1e-12, 0.6 / (1 + 1e-6) ** 2, 0.3 / (4 + 1e-6) ** 2])
    assert weights_js(beta, cfg) == pytest.approx(tuple(a / a.sum()), rel=1e-14)


def test_z_weights_hand_value():
    cfg = scheme("weno5-z")
    beta = (1.0, 2.0, 3.0)
    tau = 2.0
    a = np.array([0.1 * (1 + tau / (1 + 1e-40)), 0.6 * (1 + tau / 2), 0.3 * (1 + tau / 3)])
    assert weights_z(beta, cfg) == pytest.approx(tuple(a / a.sum()), rel=1e-14)


@pytest.mark.parametrize("name", CLASSICAL)
def test_constant_stencil_gives_ideal_weights(name):
    w = classical_weights(np.full(5, 2.5), scheme(name))
    assert w == pytest.approx(IDEAL_WEIGHTS, abs=1e-15)
    assert reconstruct_interface(np.full(5, 2.5), scheme(name)) == pytest.approx(2.5, abs=1e-14)


def test_discontinuity_suppresses_crossing_stencils():
    s = [0, 0, 0, 1, 1]
    for name in ("weno5-js", "weno5-z"):
        w = classical_weights(s, scheme(name))
        assert w[0] > 0.99
        assert w[1] < 1e-3 and w[2] < 1e-3


@given(stencil, st.sampled_from(CLASSICAL))
def test_weights_convex(s, name):
    w = interface_weights(np.array(s), scheme(name))
    assert min(w) >= 0.0
    assert sum(w) == pytest.approx(1.0, abs=1e-12)


@given(stencil, st.sampled_from(CLASSICAL))
def test_reconstruction_bounded_by_candidates(s, name):
    c = candidate_fluxes(s)
    v = reconstruct_interface(s, scheme(name))
    tol = 1e-9 * (1 + max(abs(x) for x in c))
    assert min(c) - tol <= v <= max(c) + tol


@given(stencil, st.floats(-100, 100), st.sampled_from(CLASSICAL))
def test_translation_equivariance(s, shift, name):
    s = np.array(s)
    a = reconstruct_interface(s + shift, scheme(name))
    b = reconstruct_interface(s, scheme(name)) + shift
    assert a == pytest.approx(b, abs=1e-9 * (1 + np.abs(s).max() + abs(shift)))


@pytest.mark.parametrize("name", CLASSICAL)
def test_vectorised_matches_scalar(name, rng):
    S = rng.normal(size=(200, 5))
    S[::3, 3:] += 5.0
    cfg = scheme(name)
    vec = reconstruct(S, cfg)
    ref = np.array([reconstruct_interface(s, cfg) for s in S])
    assert np.allclose(vec, ref, rtol=1e-13, atol=1e-13)
    W = nonlinear_weights(S, cfg)
    Wref = np.array([interface_weights(s, cfg) for s in S])
    assert np.allclose(W, Wref, rtol=1e-12, atol=1e-15)


@pytest.mark.parametrize("base", ["weno5-js", "weno5-z"])
def test_zero_network_is_bitwise_classical(base, rng):
    S = rng.normal(size=(500, 5))
    nn_cfg = scheme(base + "-nn", network=zero_network())
    assert np.array_equal(reconstruct(S, nn_cfg), reconstruct(S, scheme(base)))
    assert interface_weights(S[0], nn_cfg) == interface_weights(S[0], scheme(base))


def test_periodic_stencils_layout():
    v = np.arange(8.0)
    S = stencils_periodic(v)
    assert np.array_equal(S[0], [6, 7, 0, 1, 2])
    assert np.array_equal(S[7], [5, 6, 7, 0, 1])


def test_scheme_config_validation():
    with pytest.raises(ConfigurationError):
        scheme("weno7")
    with pytest.raises(ConfigurationError):
        scheme("weno5-z-nn")
    with pytest.raises(ConfigurationError):
        SchemeConfig(SchemeKind.JS, epsilon=0.0)
    assert scheme("weno5-z").epsilon == 1e-40
    assert scheme("weno5-js").epsilon == 1e-6
    assert scheme("weno5-z-nn", network=zero_network()).base == scheme("weno5-z")


def test_worked_examples():
    assert candidate_fluxes([0, 0, 0, 1, 1]) == pytest.approx((0.0, 1 / 3, 2 / 3), abs=1e-15)
    assert candidate_fluxes(np.arange(-2.0, 3.0)) == pytest.approx((0.5, 0.5, 0.5))
    assert smoothness_indicators([0, 0, 0, 1, 1]) == pytest.approx((0.0, 4 / 3, 10 / 3))
    from wenonn.weno import combine
    assert combine((0, 1 / 3, 2 / 3), (0.1, 0.6, 0.3)) == pytest.approx(0.4)
    assert combine((0, 1 / 3, 2 / 3), (1, 0, 0)) == 0.0
    assert reconstruct_interface(np.arange(-2.0, 3.0), scheme("linear")) == pytest.approx(0.5)
    w = weights_js((0.0, 4 / 3, 10 / 3), scheme("weno5-js"))
    assert 1 - w[0] < 1e-10 and w[0] <= 1
    w = weights_z((0.0, 4 / 3, 10 / 3), scheme("weno5-z"))
    assert w[1] < 1e-30 and w[2] < 1e-30
    for name in ("weno5-js", "weno5-z"):
        for beta in ((0, 0, 0), (1, 1, 1)):
            fn = weights_js if name == "weno5-js" else weights_z
            assert fn(beta, scheme(name)) == pytest.approx(IDEAL_WEIGHTS, abs=1e-15)


@pytest.mark.parametrize("lam", [1e-3, 1e3])
def test_scale_covariance(lam, rng):
    S = rng.normal(size=(100, 5))
    b = np.array([smoothness_indicators(s) for s in S])
    bl = np.array([smoothness_indicators(lam * s) for s in S])
    assert np.allclose(bl, lam ** 2 * b, rtol=1e-12)
    for name in ("weno5-js", "weno5-z"):
        cfg = SchemeConfig(SchemeKind(name), epsilon=1e-40)
        assert np.allclose(nonlinear_weights(lam * S, cfg), nonlinear_weights(S, cfg), rtol=1e-10, atol=1e-14)


@given(st.lists(st.floats(-10, 10), min_size=5, max_size=5))
def test_linear_scheme_reproduces_upwind5_on_quartics(coeffs):
    s = np.polynomial.Polynomial(coeffs)(np.arange(-2.0, 3.0))
    upwind5 = (2 * s[0] - 13 * s[1] + 47 * s[2] + 27 * s[3] - 3 * s[4]) / 60
    assert reconstruct_interface(s, scheme("linear")) == pytest.approx(upwind5, abs=1e-11 * (1 + np.abs(s).max()))


def _smooth_weight_errors(name, x0, steps):
    d = np.array([0.1, 0.6, 0.3])
    out = []
    for h in steps:
        s = np.sin(x0 + h * (np.arange(5) - 2.5))
        out.append(np.abs(nonlinear_weights(s[None], scheme(name))[0] - d).max())
    return np.array(out)


@pytest.mark.parametrize("x0", [0.5, 1.0])
def test_smooth_limit_weight_rates(x0):
    steps = 0.1 / 2.0 ** np.arange(4)
    js = -np.diff(np.log2(_smooth_weight_errors("weno5-js", x0, steps)))
    z = -np.diff(np.log2(_smooth_weight_errors("weno5-z", x0, steps)))
    assert np.all(np.abs(js - 2) < 0.1)
    # the normalisation cancels the leading tau5/beta term, so Z beats its cubic bound
    assert np.all(z > 4.5)
