"""Built-in benchmark problems (initial data, boundaries, final times)."""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .core import (ConfigurationError, DoubleMachBottom, DoubleMachTop, Fixed, Grid1D, Grid2D,
                   NonReflective, Periodic, Reflective, StateField, make_grid)
from .solver import SOURCES, Euler, RunResult, ScalarAdvection, integrate, prim_to_cons
from .weno import SchemeConfig


@dataclass(frozen=True)
class ProblemSpec:
    name: str
    equation: object
    x_range: tuple[float, float]
    nx: int
    t_final: float
    initial_condition: Callable
    boundaries: tuple
    y_range: Optional[tuple[float, float]] = None
    ny: Optional[int] = None
    source: Optional[str] = None
    cfl: float = 0.4

    def __post_init__(self):
        if not self.t_final > 0:
            raise ConfigurationError("t_final must be positive")
        if not 0 < self.cfl <= 1:
            raise ConfigurationError("cfl must lie in (0, 1]")

    @property
    def dimension(self) -> int:
        return 1 if self.y_range is None else 2

    @property
    def gamma(self) -> Optional[float]:
        return getattr(self.equation, "gamma", None)

    @property
    def grid(self):
        gx = make_grid(*self.x_range, self.nx)
        if self.y_range is None:
            return gx
        return Grid2D(gx, make_grid(*self.y_range, self.ny))

    def initial_field(self) -> StateField:
        grid = self.grid
        return StateField(grid, self.initial_condition(grid))

    def with_overrides(self, **kw) -> ProblemSpec:
        kw = {k: v for k, v in kw.items() if v is not None}
        return dataclasses.replace(self, **kw)


def _euler_1d(prim_fn, gamma=1.4):
    def ic(grid: Grid1D):
        return prim_to_cons(prim_fn(grid.cell_centers), gamma)
    return ic


def _euler_2d(prim_fn, gamma=1.4):
    def ic(grid: Grid2D):
        X, Y = np.meshgrid(grid.x.cell_centers, grid.y.cell_centers, indexing="ij")
        return prim_to_cons(prim_fn(X, Y), gamma)
    return ic


def _piecewise(x, cuts, states):
    """Primitive states on ``[cuts[k], cuts[k+1])`` (``states[k]`` may be callables)."""
    out = np.empty(x.shape + (len(states[0]) if not callable(states[0]) else 3,))
    region = np.searchsorted(np.asarray(cuts), x, side="right")
    for k, st in enumerate(states):
        m = region == k
        if callable(st):
            out[m] = st(x[m])
        else:
            out[m] = st
    return out


def composite_profile(x):
    """Gaussian, square, triangle and semi-ellipse on ``[-1, 1]``."""
    x = np.asarray(x, dtype=float)
    z, delta, alpha, a = -0.7, 0.005, 10.0, 0.5
    beta = math.log(2.0) / (36.0 * delta ** 2)

    def G(x, z):
        return np.exp(-beta * (x - z) ** 2)

    def F(x, a):
        return np.sqrt(np.maximum(1.0 - alpha ** 2 * (x - a) ** 2, 0.0))

    u = np.zeros_like(x)
    m = (x >= -0.8) & (x < -0.6)
    u[m] = (G(x[m], z - delta) + G(x[m], z + delta) + 4.0 * G(x[m], z)) / 6.0
    u[(x >= -0.4) & (x < -0.2)] = 1.0
    m = (x >= 0.0) & (x < 0.2)
    u[m] = 1.0 - np.abs(10.0 * (x[m] - 0.1))
    m = (x >= 0.4) & (x < 0.6)
    u[m] = (F(x[m], a - delta) + F(x[m], a + delta) + 4.0 * F(x[m], a)) / 6.0
    return u


def _scalar(fn):
    def ic(grid: Grid1D):
        return fn(grid.cell_centers)[:, None]
    return ic


def _titarev_toro(x):
    left = np.array([1.515695, 0.523346, 1.805])
    out = np.empty(x.shape + (3,))
    out[:] = left
    m = x >= -4.5
    out[m, 0] = 1.0 + 0.1 * np.sin(20.0 * math.pi * x[m])
    out[m, 1] = 0.0
    out[m, 2] = 1.0
    return out


def _shu_osher(x):
    out = np.empty(x.shape + (3,))
    out[:] = (3.857, 2.629, 10.333)
    m = x >= 1.0
    out[m, 0] = 1.0 + 0.2 * np.sin(5.0 * x[m])
    out[m, 1] = 0.0
    out[m, 2] = 1.0
    return out


def _riemann2d(X, Y):
    out = np.empty(X.shape + (4,))
    top, right = Y >= 0.8, X >= 0.8
    out[top & right] = (1.5, 0.0, 0.0, 1.5)
    out[top & ~right] = (0.5323, 1.206, 0.0, 0.3)
    out[~top & ~right] = (0.138, 1.206, 1.206, 0.029)
    out[~top & right] = (0.5323, 0.0, 1.206, 0.3)
    return out


RT_GAMMA = 5.0 / 3.0


def _rayleigh_taylor(X, Y):
    low = Y < 0.5
    rho = np.where(low, 2.0, 1.0)
    p = np.where(low, 2.0 * Y + 1.0, Y + 1.5)
    c = np.sqrt(RT_GAMMA * p / rho)
    v = -0.025 * c * np.cos(8.0 * math.pi * X)
    return np.stack([rho, np.zeros_like(X), v, p], axis=-1)


DMR_POST_PRIM = (8.0, 8.25 * math.sin(math.pi / 3.0), -8.25 * math.cos(math.pi / 3.0), 116.5)
DMR_PRE_PRIM = (1.4, 0.0, 0.0, 1.0)


def _double_mach(X, Y):
    out = np.empty(X.shape + (4,))
    pre = X > 1.0 / 6.0 + Y / math.sqrt(3.0)
    out[pre] = DMR_PRE_PRIM
    out[~pre] = DMR_POST_PRIM
    return out


def _cons(prim, gamma):
    return tuple(prim_to_cons(np.asarray(prim), gamma))


def _build() -> dict[str, ProblemSpec]:
    nr2 = (NonReflective(), NonReflective())
    dmr_post = _cons(DMR_POST_PRIM, 1.4)
    dmr_pre = _cons(DMR_PRE_PRIM, 1.4)
    specs = [
        ProblemSpec("advection-composite", ScalarAdvection(1.0), (-1.0, 1.0), 200, 4.0,
                    _scalar(composite_profile), (Periodic(), Periodic())),
        ProblemSpec("advection-sine", ScalarAdvection(1.0), (0.0, 1.0), 100, 1.0,
                    _scalar(lambda x: np.sin(2.0 * math.pi * x)), (Periodic(), Periodic())),
        ProblemSpec("lax", Euler(1.4), (0.0, 1.0), 200, 0.14,
                    _euler_1d(lambda x: _piecewise(x, [0.5], [(0.445, 0.698, 3.528), (0.5, 0.0, 0.5710)])),
                    nr2),
        ProblemSpec("blast", Euler(1.4), (0.0, 1.0), 400, 0.038,
                    _euler_1d(lambda x: _piecewise(x, [0.1, 0.9], [(1.0, 0.0, 1000.0), (1.0, 0.0, 0.01),
                                                                   (1.0, 0.0, 100.0)])),
                    (Reflective(), Reflective())),
        ProblemSpec("shu-osher", Euler(1.4), (0.0, 10.0), 200, 1.8, _euler_1d(_shu_osher), nr2),
        ProblemSpec("titarev-toro", Euler(1.4), (-5.0, 5.0), 1000, 5.0, _euler_1d(_titarev_toro), nr2),
        ProblemSpec("riemann-2d", Euler(1.4, dim=2), (0.0, 1.0), 500, 0.8, _euler_2d(_riemann2d),
                    nr2 + nr2, y_range=(0.0, 1.0), ny=500),
        ProblemSpec("rt", Euler(RT_GAMMA, dim=2), (0.0, 0.25), 200, 1.95,
                    _euler_2d(_rayleigh_taylor, RT_GAMMA),
                    (Reflective(), Reflective(), Fixed(_cons((2.0, 0.0, 0.0, 1.0), RT_GAMMA)),
                     Fixed(_cons((1.0, 0.0, 0.0, 2.5), RT_GAMMA))),
                    y_range=(0.0, 1.0), ny=800, source="rayleigh-taylor"),
        ProblemSpec("double-mach", Euler(1.4, dim=2), (0.0, 4.0), 960, 0.2, _euler_2d(_double_mach),
                    (Fixed(dmr_post), NonReflective(), DoubleMachBottom(dmr_post),
                     DoubleMachTop(dmr_post, dmr_pre)),
                    y_range=(0.0, 1.0), ny=240),
        ProblemSpec("constant-1d", Euler(1.4), (0.0, 1.0), 100, 0.1,
                    _euler_1d(lambda x: np.tile([1.0, 0.5, 1.0], (x.size, 1))), nr2),
    ]
    return {s.name: s for s in specs}


PROBLEMS = _build()


def get_problem(name: str) -> ProblemSpec:
    try:
        return PROBLEMS[name]
    except KeyError:
        raise ConfigurationError(f"unknown problem {name!r}; choose from {sorted(PROBLEMS)}") from None


def run(problem: ProblemSpec, scheme: SchemeConfig, snapshot_times=(), **kw) -> RunResult:
    """Integrate a problem from its initial condition to ``t_final``."""
    return integrate(problem.initial_field(), scheme, problem.boundaries, problem.equation,
                     problem.t_final, cfl=problem.cfl, source=SOURCES[problem.source],
                     snapshot_times=snapshot_times, **kw)
