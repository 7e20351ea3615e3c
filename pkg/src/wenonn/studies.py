"""Convergence and weight-distribution studies used by the CLI."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np

from .core import ConfigurationError, Periodic, StateField, make_grid
from .solver import ScalarAdvection, integrate, rk3_step
from .weno import SchemeConfig, nonlinear_weights


def sine_wave(x):
    return np.sin(2.0 * math.pi * x)


@dataclass(frozen=True)
class ConvergenceRow:
    n: int
    l1_error: float
    linf_error: float
    l1_order: float
    linf_order: float


def _upwind_run(u0: np.ndarray, dx: float, t_final: float, dt_of: Callable[[float], float]):
    def f(u, t):
        return -(u - np.roll(u, 1)) / dx

    u, t = u0.copy(), 0.0
    while t < t_final:
        dt = min(dt_of(dx), t_final - t)
        u = rk3_step(u, dt, f, t)
        t = t_final if t + dt >= t_final else t + dt
    return u


def convergence_study(scheme: Optional[SchemeConfig], resolutions: Sequence[int],
                      t_final: float = 1.0, cfl: float = 0.4,
                      first_order: bool = False) -> list[ConvergenceRow]:
    """Errors of periodic ``sin(2 pi x)`` advection on ``[0, 1]`` and fitted orders.

    The time step scales as ``cfl * dx^(5/3)`` so the third-order time error
    stays below the fifth-order spatial error. ``first_order`` swaps in a
    first-order upwind flux as a sanity anchor.
    """
    res = list(resolutions)
    if len(res) < 2 or any(b <= a for a, b in zip(res, res[1:])):
        raise ConfigurationError("resolutions must be strictly increasing (at least two)")
    if scheme is None and not first_order:
        raise ConfigurationError("a scheme is required unless first_order is set")

    def dt_of(dx):
        return cfl * dx ** (5.0 / 3.0)

    rows, prev = [], None
    for n in res:
        grid = make_grid(0.0, 1.0, n)
        x = grid.cell_centers
        u0 = sine_wave(x)
        if first_order:
            u = _upwind_run(u0, grid.dx, t_final, dt_of)
        else:
            field = StateField(grid, u0[:, None])
            out = integrate(field, scheme, (Periodic(), Periodic()), ScalarAdvection(1.0), t_final,
                            dt_fn=lambda f: dt_of(f.grid.dx))
            u = out.field.values[:, 0]
        err = np.abs(u - sine_wave(x - t_final))
        l1, linf = float(np.mean(err)), float(np.max(err))
        if prev is None:
            o1 = oinf = float("nan")
        else:
            r = math.log(n / prev[0])
            o1, oinf = math.log(prev[1] / l1) / r, math.log(prev[2] / linf) / r
        rows.append(ConvergenceRow(n, l1, linf, o1, oinf))
        prev = (n, l1, linf)
    return rows


def jump_profile(x):
    """Two-tone wave on ``[0, 2]`` lifted by 3 for ``x >= 0.5``."""
    x = np.asarray(x, dtype=float)
    base = 2.0 / 3.0 * np.sin(6.0 * math.pi * x) + 0.25 * np.sin(1.6 * math.pi * x)
    return base + np.where(x >= 0.5, 3.0, 0.0)


PROBE_FUNCTIONS = {
    "jump": (jump_profile, (0.0, 2.0)),
    "smooth": (lambda x: 2.0 / 3.0 * np.sin(6.0 * math.pi * x) + 0.25 * np.sin(1.6 * math.pi * x),
               (0.0, 2.0)),
    "constant": (lambda x: np.full_like(np.asarray(x, dtype=float), 1.0), (0.0, 2.0)),
}


def weight_probe(function: str, scheme: SchemeConfig, n: int = 200) -> tuple[np.ndarray, np.ndarray]:
    """``(x_{i+1/2}, weights)`` for the nodes ``x_i = x0 + i dx``, ``i = 0..n``.

    Ghost nodes are evaluated from the same closed form.
    """
    try:
        fn, (a, b) = PROBE_FUNCTIONS[function]
    except KeyError:
        raise ConfigurationError(f"unknown probe function {function!r}; choose from {sorted(PROBE_FUNCTIONS)}") from None
    dx = (b - a) / n
    ext = fn(a + dx * np.arange(-2, n + 3))
    S = np.stack([ext[k:k + n] for k in range(5)], axis=-1)
    return a + dx * (np.arange(n) + 0.5), nonlinear_weights(S, scheme)
