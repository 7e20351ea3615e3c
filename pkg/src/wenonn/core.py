"""Uniform grids, conserved-state containers and ghost-cell filling."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence, Union

import numpy as np

GHOST_WIDTH = 3


class ConfigurationError(ValueError):
    """Invalid user-facing configuration (grid, problem, scheme, config file)."""


class ContractError(ValueError):
    """A caller violated an operation's precondition."""


class InadmissibleStateError(ArithmeticError):
    """Non-positive density/pressure or non-real sound speed."""


@dataclass(frozen=True)
class Grid1D:
    x_left: float
    x_right: float
    n_cells: int

    @property
    def dx(self) -> float:
        return (self.x_right - self.x_left) / self.n_cells

    @property
    def cell_centers(self) -> np.ndarray:
        return self.x_left + (np.arange(self.n_cells) + 0.5) * self.dx

    @property
    def interfaces(self) -> np.ndarray:
        return self.x_left + np.arange(self.n_cells + 1) * self.dx


@dataclass(frozen=True)
class Grid2D:
    x: Grid1D
    y: Grid1D

    @property
    def shape(self) -> tuple[int, int]:
        return (self.x.n_cells, self.y.n_cells)


Grid = Union[Grid1D, Grid2D]


def make_grid(x_left: float, x_right: float, n_cells: int) -> Grid1D:
    if not (math.isfinite(x_left) and math.isfinite(x_right)) or x_right <= x_left:
        raise ConfigurationError(f"degenerate domain [{x_left}, {x_right}]")
    if int(n_cells) != n_cells or n_cells < 10:
        raise ConfigurationError(f"need at least 10 cells, got {n_cells}")
    return Grid1D(float(x_left), float(x_right), int(n_cells))


def make_grid_2d(x_range: Sequence[float], y_range: Sequence[float], nx: int, ny: int) -> Grid2D:
    return Grid2D(make_grid(x_range[0], x_range[1], nx), make_grid(y_range[0], y_range[1], ny))


# Boundary kinds. A boundary specification is one kind per side:
# 1D -> (left, right); 2D -> (left, right, bottom, top).


@dataclass(frozen=True)
class Periodic:
    pass


@dataclass(frozen=True)
class NonReflective:
    """Zero-gradient extrapolation: ghosts copy the nearest interior cell."""


@dataclass(frozen=True)
class Reflective:
    """Mirror the interior cells and negate the wall-normal momentum."""


@dataclass(frozen=True)
class Fixed:
    state: tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "state", tuple(float(v) for v in self.state))


@dataclass(frozen=True)
class DoubleMachTop:
    """Top boundary tracking the Mach-10 oblique shock of the double Mach problem.

    Ghost cells left of ``x0 + (y_top + 2 * shock_speed * t) / sqrt(3)`` hold the
    post-shock state, the rest the pre-shock state.
    """

    post: tuple[float, ...]
    pre: tuple[float, ...]
    x0: float = 1.0 / 6.0
    y_top: float = 1.0
    shock_speed: float = 10.0

    def shock_position(self, t: float) -> float:
        # horizontal trace speed of a 60 deg shock moving at shock_speed
        return self.x0 + (self.y_top + 2.0 * self.shock_speed * t) / math.sqrt(3.0)


@dataclass(frozen=True)
class DoubleMachBottom:
    """Fixed post-shock state for x <= x_split, reflective wall beyond."""

    post: tuple[float, ...]
    x_split: float = 1.0 / 6.0


BoundaryKind = Union[Periodic, NonReflective, Reflective, Fixed, DoubleMachTop, DoubleMachBottom]


@dataclass(frozen=True)
class StateField:
    """Conserved variables on the interior cells of a 1D or 2D grid.

    ``values`` has shape ``(nx, n_vars)`` in 1D and ``(nx, ny, n_vars)`` in 2D.
    """

    grid: Grid
    values: np.ndarray
    ghost_width: int = GHOST_WIDTH
    n_vars: int = field(init=False)

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        if isinstance(self.grid, Grid1D):
            expected = (self.grid.n_cells,)
        else:
            expected = self.grid.shape
        if values.ndim == len(expected):
            values = values[..., None]
        if values.shape[:-1] != expected:
            raise ContractError(f"values shape {values.shape} does not match grid {expected}")
        if self.ghost_width < GHOST_WIDTH:
            raise ContractError("ghost_width must be >= 3 for the five-point stencil")
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "n_vars", values.shape[-1])

    @property
    def dim(self) -> int:
        return 1 if isinstance(self.grid, Grid1D) else 2

    def with_values(self, values: np.ndarray) -> StateField:
        return StateField(self.grid, values, self.ghost_width)


def _fill_side(pad: np.ndarray, g: int, n: int, side: str, bc, normal_var: int | None,
               coords: np.ndarray | None, t: float) -> None:
    # pad has the swept axis first; interior occupies pad[g:g+n]
    lo = side == "low"
    if isinstance(bc, Periodic):
        if lo:
            pad[:g] = pad[n:n + g]
        else:
            pad[g + n:] = pad[g:2 * g]
    elif isinstance(bc, NonReflective):
        if lo:
            pad[:g] = pad[g]
        else:
            pad[g + n:] = pad[g + n - 1]
    elif isinstance(bc, Reflective):
        _mirror(pad, g, n, lo, normal_var)
    elif isinstance(bc, Fixed):
        state = np.asarray(bc.state)
        if state.shape[0] != pad.shape[-1]:
            raise ContractError(f"fixed state has {state.shape[0]} variables, field has {pad.shape[-1]}")
        if lo:
            pad[:g] = state
        else:
            pad[g + n:] = state
    elif isinstance(bc, DoubleMachTop):
        xs = bc.shock_position(t)
        ghost = pad[g + n:] if not lo else pad[:g]
        post = coords < xs
        ghost[:, post] = np.asarray(bc.post)
        ghost[:, ~post] = np.asarray(bc.pre)
    elif isinstance(bc, DoubleMachBottom):
        _mirror(pad, g, n, lo, normal_var)
        ghost = pad[:g] if lo else pad[g + n:]
        ghost[:, coords <= bc.x_split] = np.asarray(bc.post)
    else:
        raise ContractError(f"unknown boundary kind {bc!r}")


def _mirror(pad, g, n, lo, normal_var):
    if lo:
        pad[:g] = pad[2 * g - 1:g - 1:-1]
        ghost = pad[:g]
    else:
        pad[g + n:] = pad[g + n - 1:n - 1:-1]
        ghost = pad[g + n:]
    if normal_var is not None:
        ghost[..., normal_var] *= -1.0


def fill_ghosts(field: StateField, bc: Sequence[BoundaryKind], t: float = 0.0,
                width: int | None = None) -> np.ndarray:
    """Return the interior values padded by ``width`` ghost cells on every side.

    Interior cells are copied, never modified.
    """
    g = field.ghost_width if width is None else width
    nv = field.n_vars
    for kind in bc:
        if isinstance(kind, (Fixed,)) and len(kind.state) != nv:
            raise ContractError(f"fixed state has {len(kind.state)} variables, field has {nv}")
    if field.dim == 1:
        if len(bc) != 2:
            raise ContractError("1D fields need (left, right) boundaries")
        n = field.grid.n_cells
        if g > n:
            raise ContractError("ghost width exceeds cell count")
        pad = np.empty((n + 2 * g, nv))
        pad[g:g + n] = field.values
        normal = 1 if nv > 1 else None
        _fill_side(pad, g, n, "low", bc[0], normal, None, t)
        _fill_side(pad, g, n, "high", bc[1], normal, None, t)
        return pad

    if len(bc) != 4:
        raise ContractError("2D fields need (left, right, bottom, top) boundaries")
    nx, ny = field.grid.shape
    pad = np.empty((nx + 2 * g, ny + 2 * g, nv))
    pad[g:g + nx, g:g + ny] = field.values
    xnormal = 1 if nv > 1 else None
    ynormal = 2 if nv > 2 else None
    xc = field.grid.x.cell_centers
    yc = field.grid.y.cell_centers
    rows = pad[:, g:g + ny]
    _fill_side(rows, g, nx, "low", bc[0], xnormal, yc, t)
    _fill_side(rows, g, nx, "high", bc[1], xnormal, yc, t)
    xpad = _padded_centers(field.grid.x, g)
    cols = np.swapaxes(pad, 0, 1)
    _fill_side(cols, g, ny, "low", bc[2], ynormal, xpad, t)
    _fill_side(cols, g, ny, "high", bc[3], ynormal, xpad, t)
    return pad


def _padded_centers(grid: Grid1D, g: int) -> np.ndarray:
    return grid.x_left + (np.arange(-g, grid.n_cells + g) + 0.5) * grid.dx
