"""Backend selection for the hot kernels.

The compiled extension is used when it imports; ``WENONN_BACKEND=python``
forces the NumPy fallback. Both backends expose the same functions.
"""

from __future__ import annotations

import importlib
import os
from dataclasses import dataclass, field

import numpy as np

from . import _kernels_py


def _load(name: str | None = None):
    choice = (name or os.environ.get("WENONN_BACKEND", "auto")).lower()
    if choice == "python":
        return _kernels_py
    try:
        return importlib.import_module("wenonn._kernels")
    except ImportError:
        if choice == "cython":
            raise
        return _kernels_py


backend = _load()
BACKEND = backend.BACKEND


def get_backend(name: str):
    """Return a specific backend module ("python" or "cython")."""
    if name == "python":
        return _kernels_py
    return importlib.import_module("wenonn._kernels")


@dataclass(eq=False)
class PackedNet:
    """Network weights laid out for the kernels.

    ``weights[l]`` has shape ``(out, in)``; ``w_flat``/``b_flat`` concatenate
    the row-major matrices and the bias vectors.
    """

    weights: list
    biases: list
    sizes: np.ndarray = field(init=False)
    w_flat: np.ndarray = field(init=False)
    b_flat: np.ndarray = field(init=False)

    def __post_init__(self):
        self.weights = [np.ascontiguousarray(w, dtype=float) for w in self.weights]
        self.biases = [np.ascontiguousarray(b, dtype=float) for b in self.biases]
        sizes = [self.weights[0].shape[1]] + [w.shape[0] for w in self.weights]
        self.sizes = np.asarray(sizes, dtype=np.intc)
        self.w_flat = np.concatenate([w.ravel() for w in self.weights])
        self.b_flat = np.concatenate(self.biases)


def pack_network(weights, biases) -> PackedNet:
    return PackedNet(list(weights), list(biases))


def __getattr__(name):
    return getattr(backend, name)
