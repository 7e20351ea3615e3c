"""Plot-data writers and the run manifest.

Every file starts with a ``# wenonn <kind> v<N>`` line; floats are written
with ``repr`` so values round-trip exactly. Layouts:

* 1D snapshot CSV: ``x,<conserved...>,<primitive...>`` one row per cell
  (scalar problems: ``x,u``).
* 2D grid file: line 2 ``nx ny``, line 3 ``x0 x1 y0 y1``, then four blocks
  ``rho``, ``u``, ``v``, ``p``; each block is a name line followed by ``nx``
  lines of ``ny`` space-separated values (row ``i`` is the column of cells at
  ``x_i``, i.e. row-major over ``(i, j)``).
"""

from __future__ import annotations

import dataclasses
import hashlib
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from .core import Grid2D, StateField
from .solver import cons_to_prim

SCHEMA_VERSION = 1

SPECTRUM_COLUMNS = ("phi", "re_Phi", "im_Phi", "dispersion_err", "dissipation")
BOUND_COLUMNS = ("phi", "error", "bound")
WEIGHT_COLUMNS = ("x", "w0", "w1", "w2")
CONVERGENCE_COLUMNS = ("n", "l1_error", "linf_error", "l1_order", "linf_order")
SNAPSHOT_1D_COLUMNS = {1: ("x", "u"),
                       3: ("x", "rho", "mom", "E", "rho_prim", "u", "p")}


def _fmt(v) -> str:
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, str):
        return v
    return repr(float(v))


def write_csv(path, kind: str, columns: Sequence[str], rows) -> Path:
    path = Path(path)
    lines = [f"# wenonn {kind} v{SCHEMA_VERSION}", ",".join(columns)]
    lines += [",".join(_fmt(v) for v in row) for row in rows]
    path.write_text("\n".join(lines) + "\n")
    return path


def read_csv(path) -> tuple[list[str], np.ndarray]:
    lines = [l for l in Path(path).read_text().splitlines() if not l.startswith("#")]
    cols = lines[0].split(",")
    data = np.array([[float(v) for v in l.split(",")] for l in lines[1:]]).reshape(-1, len(cols))
    return cols, data


def write_spectrum(path, phi, Phi) -> Path:
    Phi = np.asarray(Phi)
    rows = zip(phi, Phi.real, Phi.imag, Phi.real - np.asarray(phi), Phi.imag)
    return write_csv(path, "spectrum", SPECTRUM_COLUMNS, rows)


def write_bound(path, phi, error, bound) -> Path:
    return write_csv(path, "bound", BOUND_COLUMNS, zip(phi, error, bound))


def write_weights(path, x, W) -> Path:
    W = np.asarray(W)
    return write_csv(path, "weights", WEIGHT_COLUMNS, zip(x, W[:, 0], W[:, 1], W[:, 2]))


def write_snapshot_1d(path, field: StateField, gamma: Optional[float] = None) -> Path:
    U = field.values
    x = field.grid.cell_centers
    if U.shape[1] == 1:
        return write_csv(path, "snapshot1d", SNAPSHOT_1D_COLUMNS[1], zip(x, U[:, 0]))
    W = cons_to_prim(U, gamma)
    cols = np.column_stack([x, U, W])
    return write_csv(path, "snapshot1d", SNAPSHOT_1D_COLUMNS[3], cols)


def write_snapshot_2d(path, field: StateField, gamma: float) -> Path:
    grid: Grid2D = field.grid
    nx, ny = grid.shape
    W = cons_to_prim(field.values, gamma)
    lines = [f"# wenonn grid2d v{SCHEMA_VERSION}", f"{nx} {ny}",
             " ".join(_fmt(v) for v in (grid.x.x_left, grid.x.x_right, grid.y.x_left, grid.y.x_right))]
    for k, name in enumerate(("rho", "u", "v", "p")):
        lines.append(name)
        lines += [" ".join(_fmt(v) for v in W[i, :, k]) for i in range(nx)]
    path = Path(path)
    path.write_text("\n".join(lines) + "\n")
    return path


def read_snapshot_2d(path) -> tuple[tuple[float, ...], np.ndarray]:
    """``(bounds, prim)`` with ``prim`` of shape ``(nx, ny, 4)``."""
    lines = Path(path).read_text().splitlines()
    nx, ny = (int(v) for v in lines[1].split())
    bounds = tuple(float(v) for v in lines[2].split())
    out = np.empty((nx, ny, 4))
    pos = 3
    for k in range(4):
        pos += 1
        out[:, :, k] = [[float(v) for v in lines[pos + i].split()] for i in range(nx)]
        pos += nx
    return bounds, out


def digest(obj) -> str:
    doc = json.dumps(obj, sort_keys=True, default=str)
    return hashlib.sha256(doc.encode()).hexdigest()[:16]


@dataclass
class RunManifest:
    command: str
    config_digest: str
    scheme_kind: Optional[str] = None
    checkpoint_id: Optional[str] = None
    grid: Optional[list] = None
    t_final: Optional[float] = None
    wall_time: float = 0.0
    output_paths: list = field(default_factory=list)
    status: str = "ok"
    message: str = ""

    def write(self, out_dir) -> Path:
        path = Path(out_dir) / f"manifest-{self.command}.json"
        path.write_text(json.dumps(dataclasses.asdict(self), indent=1, default=str))
        return path
