"""The compiled and NumPy backends must agree."""

import numpy as np
import pytest

from wenonn import kernels
from wenonn.nn import init_network
from wenonn.solver import prim_to_cons

try:
    cy = kernels.get_backend("cython")
except ImportError:  # pragma: no cover - extension not built
    cy = None
py = kernels.get_backend("python")

needs_ext = pytest.mark.skipif(cy is None, reason="compiled extension not built")


def _stencils(rng, n=5000):
    S = rng.normal(size=(n, 5))
    S[: n // 3, 3:] += 10.0
    S[n // 3: n // 2] = 1.0
    return S


def test_backend_flag():
    assert py.BACKEND == "python"
    assert kernels.BACKEND in ("python", "cython")


@needs_ext
@pytest.mark.parametrize("kind", [0, 1, 2])
def test_classical_bitwise_agreement(kind, rng):
    S = _stencils(rng)
    eps = 1e-6 if kind < 2 else 1e-40
    assert np.array_equal(cy.weights(S, kind, eps, 2.0, 1.0), py.weights(S, kind, eps, 2.0, 1.0))
    assert np.array_equal(cy.reconstruct(S, kind, eps, 2.0, 1.0), py.reconstruct(S, kind, eps, 2.0, 1.0))
    assert np.array_equal(cy.smoothness(S), py.smoothness(S))
    assert np.array_equal(cy.candidates(S), py.candidates(S))


@needs_ext
@pytest.mark.parametrize("kind", [1, 2])
def test_nn_agreement(kind, rng):
    S = _stencils(rng)
    net = init_network(seed=3).packed
    eps = 1e-6 if kind == 1 else 1e-40
    a = cy.reconstruct(S, kind, eps, 2.0, 1.0, net, 1e-30)
    b = py.reconstruct(S, kind, eps, 2.0, 1.0, net, 1e-30)
    assert np.allclose(a, b, rtol=0, atol=1e-13 * (1 + np.abs(S).max()))


@needs_ext
@pytest.mark.parametrize("nv", [3, 4])
def test_euler_flux_agreement(nv, rng):
    lines, n = 3, 40
    prim = np.empty((lines, n, nv))
    prim[..., 0] = rng.uniform(0.5, 2.0, (lines, n))
    prim[..., 1:-1] = rng.uniform(-1, 1, (lines, n, nv - 2))
    prim[..., -1] = rng.uniform(0.5, 3.0, (lines, n))
    U = prim_to_cons(prim, 1.4)
    for net in (None, init_network(seed=1).packed):
        kind = 2
        a = cy.euler_flux(U, 1.4, 3.0, kind, 1e-40, 2.0, 1.0, net, 1e-30)
        b = py.euler_flux(U, 1.4, 3.0, kind, 1e-40, 2.0, 1.0, net, 1e-30)
        assert a.shape == (lines, n - 5, nv)
        assert np.allclose(a, b, rtol=1e-12, atol=1e-12)


@needs_ext
def test_euler_flux_rejects_bad_state():
    U = prim_to_cons(np.tile([1.0, 0.0, 1.0], (1, 10, 1)), 1.4)
    U[0, 5, 2] = -5.0
    with pytest.raises(ArithmeticError):
        cy.euler_flux(U, 1.4, 2.0, 1, 1e-6, 2.0, 1.0, None, 1e-30)
