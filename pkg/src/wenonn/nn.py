"""Learned compensation of the WENO weights.

A small MLP maps four normalised jump magnitudes of the stencil (the "delta
layer") to an additive correction of the classical JS/Z weights; the sum is
clipped at zero and renormalised. Gradients are computed by hand-written
reverse mode over a :class:`FluxTape` recorded during the forward pass.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass
from functools import cached_property
from pathlib import Path
from typing import Protocol, Sequence

import numpy as np

from . import kernels
from ._kernels_py import compensate as _compensate_rows
from .core import ConfigurationError, ContractError
from .weno import DEFAULT_EPS1, SchemeConfig, SchemeKind, WeightTriple

DEFAULT_LAYERS = (4, 30, 30, 30, 3)
CHECKPOINT_SCHEMA = 1


class TrainingError(RuntimeError):
    """Non-finite loss or gradient during optimisation."""


@dataclass(frozen=True, eq=False)
class NetworkParams:
    """MLP weights ``W[l]`` of shape ``(out, in)`` and biases ``b[l]``.

    Hidden layers use ReLU, the output layer is affine. The same structure
    doubles as the container for parameter gradients.
    """

    weights: tuple
    biases: tuple

    def __post_init__(self):
        ws = tuple(np.array(w, dtype=float) for w in self.weights)
        bs = tuple(np.array(b, dtype=float).reshape(-1) for b in self.biases)
        if len(ws) == 0 or len(ws) != len(bs):
            raise ContractError("need one bias vector per weight matrix")
        for l, (w, b) in enumerate(zip(ws, bs)):
            if w.ndim != 2 or w.shape[0] != b.shape[0]:
                raise ContractError(f"layer {l}: weight {w.shape} and bias {b.shape} disagree")
            if l > 0 and w.shape[1] != ws[l - 1].shape[0]:
                raise ContractError(f"layer {l} expects {w.shape[1]} inputs, got {ws[l - 1].shape[0]}")
            if not (np.all(np.isfinite(w)) and np.all(np.isfinite(b))):
                raise ContractError(f"layer {l} has non-finite entries")
        for a in ws + bs:
            a.setflags(write=False)
        object.__setattr__(self, "weights", ws)
        object.__setattr__(self, "biases", bs)

    @property
    def layer_sizes(self) -> tuple[int, ...]:
        return (self.weights[0].shape[1],) + tuple(w.shape[0] for w in self.weights)

    @cached_property
    def packed(self) -> kernels.PackedNet:
        return kernels.pack_network(self.weights, self.biases)

    @cached_property
    def theta_id(self) -> str:
        h = hashlib.sha256()
        h.update(np.asarray(self.layer_sizes, dtype=np.int64).tobytes())
        h.update(self.flatten().tobytes())
        return h.hexdigest()[:16]

    @property
    def n_params(self) -> int:
        return sum(w.size + b.size for w, b in zip(self.weights, self.biases))

    def flatten(self) -> np.ndarray:
        return np.concatenate([np.concatenate([w.ravel(), b]) for w, b in zip(self.weights, self.biases)])

    @classmethod
    def from_flat(cls, layer_sizes: Sequence[int], vec: np.ndarray) -> NetworkParams:
        vec = np.asarray(vec, dtype=float)
        ws, bs, k = [], [], 0
        for n_in, n_out in zip(layer_sizes[:-1], layer_sizes[1:]):
            ws.append(vec[k:k + n_in * n_out].reshape(n_out, n_in))
            k += n_in * n_out
            bs.append(vec[k:k + n_out])
            k += n_out
        if k != vec.size:
            raise ContractError(f"flat vector has {vec.size} entries, layout needs {k}")
        return cls(tuple(ws), tuple(bs))

    def weight_norm_sq(self) -> float:
        """Sum of squared weight-matrix entries (biases excluded)."""
        return float(sum(np.sum(w * w) for w in self.weights))


def init_network(layer_sizes: Sequence[int] = DEFAULT_LAYERS, seed: int = 0,
                 output_scale: float = 1.0) -> NetworkParams:
    """Glorot-uniform weights, zero biases; the output layer is multiplied by ``output_scale``."""
    rng = np.random.default_rng(seed)
    ws, bs = [], []
    for n_in, n_out in zip(layer_sizes[:-1], layer_sizes[1:]):
        lim = math.sqrt(6.0 / (n_in + n_out))
        ws.append(rng.uniform(-lim, lim, size=(n_out, n_in)))
        bs.append(np.zeros(n_out))
    ws[-1] = ws[-1] * output_scale
    return NetworkParams(tuple(ws), tuple(bs))


def zero_network(layer_sizes: Sequence[int] = DEFAULT_LAYERS) -> NetworkParams:
    return NetworkParams(
        tuple(np.zeros((o, i)) for i, o in zip(layer_sizes[:-1], layer_sizes[1:])),
        tuple(np.zeros(o) for o in layer_sizes[1:]),
    )


def delta_features(s, eps1: float = DEFAULT_EPS1) -> np.ndarray:
    """Absolute consecutive jumps of a stencil, divided by their maximum.

    Works on a single stencil ``(5,)`` or a batch ``(..., 5)``.
    """
    s = np.asarray(s, dtype=float)
    d = np.abs(np.diff(s, axis=-1))
    m = np.maximum(d.max(axis=-1, keepdims=True), eps1)
    return d / m


def mlp_forward(params: NetworkParams, x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    h = x
    last = len(params.weights) - 1
    for l, (w, b) in enumerate(zip(params.weights, params.biases)):
        h = h @ w.T + b
        if l < last:
            h = np.maximum(h, 0.0)
    return h


def compensate_and_normalize(w_star, w_nn):
    """ReLU(w* + w_nn) renormalised to unit sum; falls back to ``w*`` on a zero sum.

    A vanishing correction returns ``w*`` unchanged, so a zero network
    reproduces the classical scheme bit for bit.
    """
    ws = np.asarray(w_star, dtype=float)
    y = np.asarray(w_nn, dtype=float)
    out = _compensate_rows(np.atleast_2d(ws), np.atleast_2d(y))
    if ws.ndim == 1:
        return WeightTriple(*out[0])
    return out


# reverse mode


class FluxTape:
    """Forward record of the compensated reconstruction ``fhat(stencils; theta)``."""

    def __init__(self, params: NetworkParams, stencils: np.ndarray, base: SchemeConfig,
                 eps1: float = DEFAULT_EPS1):
        S = np.ascontiguousarray(np.reshape(stencils, (-1, 5)), dtype=float)
        self.params = params
        self.shape = np.shape(stencils)[:-1]
        code, eps, p, q, _, _ = base.base.kernel_args()
        be = kernels.backend
        self.c = be.candidates(S)
        self.w_star = be.base_weights(S, code, eps, p, q)
        acts = [delta_features(S, eps1)]
        pre = []
        h = acts[0]
        last = len(params.weights) - 1
        for l, (w, b) in enumerate(zip(params.weights, params.biases)):
            z = h @ w.T + b
            pre.append(z)
            h = np.maximum(z, 0.0) if l < last else z
            acts.append(h)
        self.acts, self.pre = acts, pre
        y = acts[-1]
        self.t = self.w_star + y
        wt = np.maximum(self.t, 0.0)
        self.s = wt[:, 0] + wt[:, 1] + wt[:, 2]
        self.w = _compensate_rows(self.w_star, y)
        self.fhat = (self.w[:, 0] * self.c[:, 0] + self.w[:, 1] * self.c[:, 1]
                     + self.w[:, 2] * self.c[:, 2]).reshape(self.shape)

    def backward(self, dfhat: np.ndarray) -> NetworkParams:
        g = np.reshape(dfhat, (-1, 1)) * self.c
        gdot = np.sum(g * self.w, axis=1, keepdims=True)
        live = self.s > 0.0
        safe = np.where(live, self.s, 1.0)[:, None]
        gy = (g - gdot) / safe * (self.t > 0.0)
        gy[~live] = 0.0
        dws, dbs = [None] * len(self.params.weights), [None] * len(self.params.weights)
        gz = gy
        for l in range(len(self.params.weights) - 1, -1, -1):
            dws[l] = gz.T @ self.acts[l]
            dbs[l] = gz.sum(axis=0)
            if l > 0:
                gz = (gz @ self.params.weights[l]) * (self.pre[l - 1] > 0.0)
        return NetworkParams(tuple(dws), tuple(dbs))


class Loss(Protocol):
    def value_and_grad(self, params: NetworkParams) -> tuple[float, NetworkParams]: ...


def add_grads(a: NetworkParams, b: NetworkParams, scale: float = 1.0) -> NetworkParams:
    return NetworkParams(tuple(x + scale * y for x, y in zip(a.weights, b.weights)),
                         tuple(x + scale * y for x, y in zip(a.biases, b.biases)))


def scale_grads(a: NetworkParams, scale: float) -> NetworkParams:
    return NetworkParams(tuple(scale * x for x in a.weights), tuple(scale * x for x in a.biases))


@dataclass(frozen=True)
class SquaredParams:
    """Sum of squares of every parameter, biases included."""

    def value_and_grad(self, params):
        return float(np.sum(params.flatten() ** 2)), scale_grads(params, 2.0)


@dataclass(frozen=True)
class ConstantLoss:
    value: float = 1.0

    def value_and_grad(self, params):
        return self.value, scale_grads(params, 0.0)


def gradient(params: NetworkParams, loss: Loss) -> NetworkParams:
    value, grads = loss.value_and_grad(params)
    if not math.isfinite(value) or not np.all(np.isfinite(grads.flatten())):
        raise TrainingError(f"non-finite loss {value!r} or gradient (theta {params.theta_id})")
    return grads


# checkpoints


_BASE_NAMES = {"JS": "JS", "Z": "Z", "weno5-js": "JS", "weno5-z": "Z",
               "weno5-js-nn": "JS", "weno5-z-nn": "Z"}


def save_checkpoint(path, params: NetworkParams, base_scheme: str, eps1: float = DEFAULT_EPS1,
                    training_config_digest: str = "") -> None:
    """Write a JSON checkpoint. Floats are written with ``repr`` and round-trip exactly."""
    base_name = _BASE_NAMES.get(str(getattr(base_scheme, "value", base_scheme)))
    if base_name is None:
        raise ConfigurationError(f"base scheme must be JS or Z, got {base_scheme!r}")
    doc = {
        "schema_version": CHECKPOINT_SCHEMA,
        "base_scheme": base_name,
        "layer_sizes": list(params.layer_sizes),
        "weights": [w.tolist() for w in params.weights],
        "biases": [b.tolist() for b in params.biases],
        "eps1": float(eps1),
        "training_config_digest": training_config_digest,
        "theta_id": params.theta_id,
    }
    Path(path).write_text(json.dumps(doc, indent=1))


@dataclass(frozen=True)
class Checkpoint:
    params: NetworkParams
    base_scheme: str
    eps1: float
    training_config_digest: str

    def scheme(self) -> SchemeConfig:
        kind = SchemeKind.JS_NN if self.base_scheme == "JS" else SchemeKind.Z_NN
        return SchemeConfig(kind, network=self.params, eps1=self.eps1)


def load_checkpoint(path) -> Checkpoint:
    try:
        doc = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigurationError(f"cannot read checkpoint {path}: {exc}") from exc
    if doc.get("schema_version") != CHECKPOINT_SCHEMA:
        raise ConfigurationError(f"unsupported checkpoint schema {doc.get('schema_version')!r}")
    params = NetworkParams(tuple(np.array(w) for w in doc["weights"]),
                           tuple(np.array(b) for b in doc["biases"]))
    if list(params.layer_sizes) != list(doc["layer_sizes"]):
        raise ConfigurationError("checkpoint layer_sizes disagree with the stored matrices")
    if "theta_id" in doc and doc["theta_id"] != params.theta_id:
        raise ConfigurationError("checkpoint checksum mismatch")
    return Checkpoint(params, doc["base_scheme"], float(doc["eps1"]),
                      doc.get("training_config_digest", ""))
