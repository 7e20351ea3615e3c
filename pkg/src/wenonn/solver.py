"""Method-of-lines solver for scalar advection and the 1D/2D Euler equations.

Fluxes are split with a global Lax-Friedrichs constant, projected on Roe-averaged
characteristic fields at every interface, reconstructed with the configured
WENO scheme and integrated in time with third-order SSP Runge-Kutta.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Callable, NamedTuple, Optional, Sequence

import numpy as np

from . import kernels
from ._kernels_py import eigensystem as _eigensystem_arrays
from .core import (BoundaryKind, ConfigurationError, ContractError,
                   InadmissibleStateError, StateField, fill_ghosts)
from .weno import SchemeConfig, reconstruct

log = logging.getLogger(__name__)


class SolverError(RuntimeError):
    """Numerical failure during a run (NaN or inadmissible state)."""

    def __init__(self, message: str, t: float, cell=None):
        super().__init__(f"{message} at t={t:.6g}" + ("" if cell is None else f", cell {cell}"))
        self.t = t
        self.cell = cell


# state conversions


def prim_to_cons(prim, gamma: float) -> np.ndarray:
    """``(rho, u, p)`` or ``(rho, u, v, p)`` (last axis) to conserved variables."""
    prim = np.asarray(prim, dtype=float)
    rho = prim[..., 0]
    vel = prim[..., 1:-1]
    p = prim[..., -1]
    out = np.empty_like(prim)
    out[..., 0] = rho
    out[..., 1:-1] = rho[..., None] * vel
    out[..., -1] = p / (gamma - 1.0) + 0.5 * rho * np.sum(vel * vel, axis=-1)
    return out


def cons_to_prim(U, gamma: float) -> np.ndarray:
    U = np.asarray(U, dtype=float)
    rho = U[..., 0]
    vel = U[..., 1:-1] / rho[..., None]
    out = np.empty_like(U)
    out[..., 0] = rho
    out[..., 1:-1] = vel
    out[..., -1] = (gamma - 1.0) * (U[..., -1] - 0.5 * rho * np.sum(vel * vel, axis=-1))
    return out


def sound_speed(U, gamma: float) -> np.ndarray:
    W = cons_to_prim(U, gamma)
    return np.sqrt(gamma * W[..., -1] / W[..., 0])


# splitting and characteristic machinery


def lf_split(f, u, alpha):
    """Global Lax-Friedrichs splitting ``f = f+ + f-``."""
    f = np.asarray(f, dtype=float)
    au = alpha * np.asarray(u, dtype=float)
    return 0.5 * (f + au), 0.5 * (f - au)


class RoeAverage(NamedTuple):
    rho: float
    u: float
    v: Optional[float]
    H: float
    c: float


def roe_average(UL, UR, gamma: float) -> RoeAverage:
    UL = np.asarray(UL, dtype=float)
    UR = np.asarray(UR, dtype=float)
    if UL.shape != UR.shape or UL.shape[-1] not in (3, 4):
        raise ContractError("roe_average needs two 1D (3) or 2D (4) conserved states")
    WL, WR = cons_to_prim(UL, gamma), cons_to_prim(UR, gamma)
    if np.any(WL[..., 0] <= 0) or np.any(WR[..., 0] <= 0) or np.any(WL[..., -1] <= 0) or np.any(WR[..., -1] <= 0):
        raise InadmissibleStateError("roe_average needs positive density and pressure")
    sl, sr = np.sqrt(WL[..., 0]), np.sqrt(WR[..., 0])
    HL = (UL[..., -1] + WL[..., -1]) / WL[..., 0]
    HR = (UR[..., -1] + WR[..., -1]) / WR[..., 0]
    den = sl + sr
    u = (sl * WL[..., 1] + sr * WR[..., 1]) / den
    v = None
    q2 = u * u
    if UL.shape[-1] == 4:
        v = (sl * WL[..., 2] + sr * WR[..., 2]) / den
        q2 = q2 + v * v
    H = (sl * HL + sr * HR) / den
    c2 = (gamma - 1.0) * (H - 0.5 * q2)
    if np.any(~(c2 > 0)):
        raise InadmissibleStateError("Roe-averaged sound speed is not real")
    return RoeAverage(sl * sr, u, v, H, np.sqrt(c2))


_SWAP_XY = np.array([0, 2, 1, 3])


def eigensystem(avg: RoeAverage, gamma: float, direction: str = "x"):
    """Eigenvalues and left/right eigenvector matrices of the flux Jacobian.

    ``L @ R`` is the identity and ``R @ diag(lam) @ L`` equals the Jacobian of the
    flux in ``direction`` at the averaged state.
    """
    if not np.all(np.asarray(avg.c) > 0):
        raise InadmissibleStateError("sound speed must be positive")
    if direction not in ("x", "y"):
        raise ContractError(f"direction must be 'x' or 'y', got {direction!r}")
    if avg.v is None:
        if direction == "y":
            raise ContractError("1D states only have an x direction")
        return _eigensystem_arrays(np.asarray(avg.u), None, np.asarray(avg.H), np.asarray(avg.c), gamma)
    if direction == "x":
        return _eigensystem_arrays(np.asarray(avg.u), np.asarray(avg.v), np.asarray(avg.H),
                                   np.asarray(avg.c), gamma)
    lam, L, R = _eigensystem_arrays(np.asarray(avg.v), np.asarray(avg.u), np.asarray(avg.H),
                                    np.asarray(avg.c), gamma)
    # back to (rho, mx, my, E) ordering: variable axis only
    P = _SWAP_XY
    return lam, L[..., :, P], R[..., P, :]


def interface_flux(window, scheme: SchemeConfig, alpha: float, gamma: float,
                   direction: str = "x") -> np.ndarray:
    """Characteristic-wise WENO flux at ``i+1/2`` from cells ``i-2 .. i+3``."""
    window = np.asarray(window, dtype=float)
    if window.shape[0] != 6:
        raise ContractError("interface window needs six cells")
    if direction == "y":
        window = window[:, _SWAP_XY]
    try:
        out = kernels.backend.euler_flux(window[None], gamma, alpha, *scheme.kernel_args())[0, 0]
    except ArithmeticError as exc:
        raise InadmissibleStateError(str(exc)) from exc
    return out[_SWAP_XY] if direction == "y" else out


# equations


@dataclass(frozen=True)
class ScalarAdvection:
    """``u_t + a u_x = 0``."""

    a: float = 1.0
    n_vars: int = 1

    def max_speed(self, pad, axis: int = 0) -> float:
        return abs(self.a)


@dataclass(frozen=True)
class Euler:
    gamma: float = 1.4
    dim: int = 1

    def __post_init__(self):
        if not self.gamma > 1.0:
            raise ConfigurationError("gamma must exceed 1")

    @property
    def n_vars(self) -> int:
        return 3 if self.dim == 1 else 4

    def max_speed(self, pad, axis: int = 0) -> float:
        rho = pad[..., 0]
        vn = pad[..., 1 + axis] / rho
        c = sound_speed(pad, self.gamma)
        return float(np.max(np.abs(vn) + c))


def rayleigh_taylor_source(U: np.ndarray) -> np.ndarray:
    """Gravity-like forcing ``(0, 0, rho, rho v)``."""
    S = np.zeros_like(U)
    S[..., 2] = U[..., 0]
    S[..., 3] = U[..., 2]
    return S


SOURCES = {None: None, "none": None, "rayleigh-taylor": rayleigh_taylor_source}


def _euler_sweep(pad_lines, equation: Euler, scheme: SchemeConfig, alpha: float, t: float):
    try:
        return kernels.backend.euler_flux(pad_lines, equation.gamma, alpha, *scheme.kernel_args())
    except ArithmeticError as exc:
        raise SolverError(str(exc), t) from exc


def rhs(field: StateField, scheme: SchemeConfig, bcs: Sequence[BoundaryKind], t: float,
        equation, source: Optional[Callable] = None) -> np.ndarray:
    """Time derivative of the interior conserved values."""
    g = field.ghost_width
    if field.n_vars != equation.n_vars:
        raise ContractError(f"field has {field.n_vars} variables, equation expects {equation.n_vars}")
    pad = fill_ghosts(field, bcs, t)
    if isinstance(equation, ScalarAdvection):
        if field.dim != 1:
            raise ContractError("scalar advection is 1D")
        u = pad[:, 0]
        n = field.grid.n_cells
        alpha = abs(equation.a)
        fp, fm = lf_split(equation.a * u, u, alpha)
        idx = np.arange(g - 1, g + n)[:, None]
        Sp = fp[idx + np.arange(-2, 3)]
        Sm = fm[idx + np.arange(3, -2, -1)]
        F = reconstruct(Sp, scheme) + reconstruct(Sm, scheme)
        dU = -(F[1:] - F[:-1]) / field.grid.dx
        out = dU[:, None]
    elif field.dim == 1:
        alpha = equation.max_speed(pad)
        F = _euler_sweep(pad[None, g - 3:pad.shape[0] - g + 3], equation, scheme, alpha, t)[0]
        out = -(F[1:] - F[:-1]) / field.grid.dx
    else:
        nx, ny = field.grid.shape
        rows = pad[:, g:g + ny]
        ax = equation.max_speed(rows, 0)
        Fx = _euler_sweep(np.swapaxes(rows, 0, 1), equation, scheme, ax, t)
        Fx = np.swapaxes(Fx, 0, 1)
        # y sweep reuses the x-direction kernel on momentum-swapped states
        cols = pad[g:g + nx, :][..., _SWAP_XY]
        ay = equation.max_speed(cols, 0)
        Gy = _euler_sweep(cols, equation, scheme, ay, t)[..., _SWAP_XY]
        out = -(Fx[1:] - Fx[:-1]) / field.grid.x.dx - (Gy[:, 1:] - Gy[:, :-1]) / field.grid.y.dx
    if source is not None:
        out = out + source(field.values)
    return out


def rk3_step(values: np.ndarray, dt: float, rhs_fn: Callable[[np.ndarray, float], np.ndarray],
             t: float = 0.0) -> np.ndarray:
    """One SSP-RK3 step; ``rhs_fn(values, time)`` returns the time derivative."""
    if not dt > 0:
        raise ContractError("dt must be positive")
    u1 = values + dt * rhs_fn(values, t)
    u2 = 0.75 * values + 0.25 * (u1 + dt * rhs_fn(u1, t + dt))
    return values / 3.0 + 2.0 / 3.0 * (u2 + dt * rhs_fn(u2, t + 0.5 * dt))


def compute_dt(field: StateField, cfl: float, equation) -> float:
    if isinstance(equation, ScalarAdvection):
        speed = abs(equation.a)
        return cfl * field.grid.dx / speed if speed > 0 else cfl * field.grid.dx
    U = field.values
    c = sound_speed(U, equation.gamma)
    if field.dim == 1:
        s = float(np.max(np.abs(U[..., 1] / U[..., 0]) + c))
        return cfl * field.grid.dx / s if s > 0 else cfl * field.grid.dx
    sx = float(np.max(np.abs(U[..., 1] / U[..., 0]) + c))
    sy = float(np.max(np.abs(U[..., 2] / U[..., 0]) + c))
    rate = sx / field.grid.x.dx + sy / field.grid.y.dx
    return cfl / rate if rate > 0 else cfl * min(field.grid.x.dx, field.grid.y.dx)


def total_variation(values, periodic: bool = False) -> float:
    v = np.asarray(values, dtype=float)
    if v.shape[-1] < 2:
        raise ContractError("total variation needs at least two values")
    tv = np.sum(np.abs(np.diff(v, axis=-1)), axis=-1)
    if periodic:
        tv = tv + np.abs(v[..., 0] - v[..., -1])
    return tv if np.ndim(tv) else float(tv)


def check_admissible(field: StateField, equation, t: float) -> None:
    U = field.values
    if not np.all(np.isfinite(U)):
        bad = np.argwhere(~np.isfinite(U))[0][:-1]
        raise SolverError("non-finite state", t, tuple(int(i) for i in bad))
    if isinstance(equation, Euler):
        W = cons_to_prim(U, equation.gamma)
        ok = (W[..., 0] > 0) & (W[..., -1] > 0)
        if not np.all(ok):
            bad = np.argwhere(~ok)[0]
            raise SolverError("non-positive density or pressure", t, tuple(int(i) for i in bad))


@dataclass
class RunResult:
    field: StateField
    t: float
    steps: int
    snapshots: list = field(default_factory=list)


def integrate(field: StateField, scheme: SchemeConfig, bcs, equation, t_final: float,
              cfl: float = 0.4, source: Optional[Callable] = None,
              dt_fn: Optional[Callable[[StateField], float]] = None,
              snapshot_times: Sequence[float] = (), max_steps: Optional[int] = None,
              t0: float = 0.0) -> RunResult:
    """Advance ``field`` from ``t0`` to ``t_final`` with SSP-RK3 and CFL-limited steps."""
    if not t_final > t0:
        raise ConfigurationError("t_final must exceed the start time")
    grid = field.grid

    def f(values, time):
        return rhs(StateField(grid, values, field.ghost_width), scheme, bcs, time, equation, source)

    pending = sorted(s for s in snapshot_times if t0 < s < t_final)
    snaps = []
    t, steps, cur = t0, 0, field
    while t < t_final:
        dt = dt_fn(cur) if dt_fn is not None else compute_dt(cur, cfl, equation)
        stop = pending[0] if pending else t_final
        last = t + dt >= stop
        if last:
            dt = stop - t
        cur = cur.with_values(rk3_step(cur.values, dt, f, t))
        t = stop if last else t + dt
        steps += 1
        check_admissible(cur, equation, t)
        if pending and last and t == pending[0]:
            snaps.append((t, cur))
            pending.pop(0)
        if max_steps is not None and steps >= max_steps:
            break
    log.debug("integrated %d steps to t=%g", steps, t)
    return RunResult(cur, t, steps, snaps)
