"""Training data, loss terms and the optimisation loop for the weight compensation."""

from __future__ import annotations

import dataclasses
import enum
import hashlib
import json
import logging
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Sequence

import numpy as np
from numpy.polynomial import Polynomial

from . import adr
from .core import ConfigurationError, ContractError
from .nn import (DEFAULT_LAYERS, FluxTape, NetworkParams, TrainingError, add_grads,
                 init_network, scale_grads)
from .weno import SchemeConfig, SchemeKind, reconstruct, stencils_periodic

log = logging.getLogger(__name__)

X_LEFT, X_RIGHT, NX = -1.0, 1.0, 100
DX = (X_RIGHT - X_LEFT) / NX
FAMILY_COUNTS = (2000, 1000, 1000)
GHOSTS = 2


class Family(enum.Enum):
    TANH = "tanh"
    SINE = "sine"
    POLY = "poly"


def _derivatives(family: Family, params: Sequence[float], x: np.ndarray):
    """``(f, f_xx, f_xxxx)`` of a sample function, in closed form."""
    x = np.asarray(x, dtype=float)
    if family is Family.TANH:
        (a,) = params
        t = np.tanh(a * x)
        s = 1.0 - t * t
        return t, -2.0 * a ** 2 * t * s, 8.0 * a ** 4 * t * s * (2.0 - 3.0 * t * t)
    if family is Family.SINE:
        b, phase = params
        k = b * math.pi
        f = np.sin(k * x + phase)
        return f, -k ** 2 * f, k ** 4 * f
    p = Polynomial(params)
    return p(x), p.deriv(2)(x), p.deriv(4)(x)


def sample_function(family: Family, params: Sequence[float], x) -> np.ndarray:
    return _derivatives(family, params, x)[0]


def reference_interface_values(family: Family, params: Sequence[float], x, dx: float = DX) -> np.ndarray:
    """``h = f - dx^2/24 f'' + 7 dx^4/5760 f''''`` at the points ``x``."""
    f, f2, f4 = _derivatives(family, params, x)
    return f - dx ** 2 / 24.0 * f2 + 7.0 * dx ** 4 / 5760.0 * f4


@dataclass(frozen=True, eq=False)
class TrainingSample:
    """One scalar profile on the 101-node training grid.

    ``extended_values`` carries the nodes ``-2..102`` evaluated from the same
    closed form, so every one of the 100 interfaces gets a full stencil.
    """

    family: Family
    params: tuple
    grid_values: np.ndarray
    reference_fluxes: np.ndarray
    extended_values: np.ndarray

    @property
    def stencils(self) -> np.ndarray:
        e = self.extended_values
        return np.stack([e[k:k + NX] for k in range(5)], axis=-1)


def node_coordinates(lo: int = 0, hi: int = NX) -> np.ndarray:
    return X_LEFT + DX * np.arange(lo, hi + 1)


def interface_coordinates() -> np.ndarray:
    return X_LEFT + DX * (np.arange(NX) + 0.5)


def make_sample(family: Family, params: Sequence[float]) -> TrainingSample:
    params = tuple(float(v) for v in params)
    ext = sample_function(family, params, node_coordinates(-GHOSTS, NX + GHOSTS))
    ref = reference_interface_values(family, params, interface_coordinates())
    grid = ext[GHOSTS:GHOSTS + NX + 1].copy()
    for a in (grid, ref, ext):
        a.setflags(write=False)
    return TrainingSample(family, params, grid, ref, ext)


def reference_flux(sample: TrainingSample, interface_index: int) -> float:
    """Reference value at ``x_{i+1/2}`` for ``i`` in ``0..99``."""
    if not 0 <= interface_index < NX:
        raise IndexError(f"interface index {interface_index} outside [0, {NX})")
    x = X_LEFT + DX * (interface_index + 0.5)
    return float(reference_interface_values(sample.family, sample.params, np.array([x]))[0])


def generate_dataset(seed: int, counts: Sequence[int] = FAMILY_COUNTS) -> list[TrainingSample]:
    """Tanh, sine and quintic samples; ``counts`` is (tanh, sine, poly)."""
    n_tanh, n_sine, n_poly = counts
    rng = np.random.default_rng(seed)
    out = []
    mag = rng.uniform(50.0, 100.0, n_tanh)
    sign = rng.choice([-1.0, 1.0], n_tanh)
    out += [make_sample(Family.TANH, (m * s,)) for m, s in zip(mag, sign)]
    b = rng.uniform(1.0, 18.0, n_sine)
    ph = rng.uniform(0.0, 2.0 * math.pi, n_sine)
    out += [make_sample(Family.SINE, (bb, pp)) for bb, pp in zip(b, ph)]
    bound = 1.0 / (np.arange(6) + 1.0)
    coeffs = rng.uniform(-bound, bound, size=(n_poly, 6))
    out += [make_sample(Family.POLY, c) for c in coeffs]
    return out


def scaled_counts(n_samples: int) -> tuple[int, int, int]:
    """Family counts in the 2:1:1 ratio summing to ``n_samples``."""
    n_tanh = n_samples // 2
    n_sine = (n_samples - n_tanh) // 2
    return n_tanh, n_sine, n_samples - n_tanh - n_sine


# loss terms


def _stack(batch, attr) -> np.ndarray:
    return np.stack([getattr(s, attr) for s in batch])


@dataclass
class ReconstructionLoss:
    """Mean squared interface error against the reference fluxes."""

    batch: Sequence[TrainingSample]
    base: SchemeConfig
    eps1: float = 1e-30

    def __post_init__(self):
        if not self.batch:
            raise ConfigurationError("empty batch")
        self.S = _stack(self.batch, "stencils")
        self.h = _stack(self.batch, "reference_fluxes")

    def value_and_grad(self, params: NetworkParams):
        tape = FluxTape(params, self.S, self.base, self.eps1)
        r = tape.fhat - self.h
        return float(np.mean(r * r)), tape.backward(2.0 * r / r.size)


def tvd_step(u0: np.ndarray, fhat: np.ndarray, cfl: float) -> np.ndarray:
    """One forward-Euler step of ``u_t + u_x = 0`` with ``fhat[..., i]`` at ``i+1/2``."""
    return u0 - cfl * (fhat - np.roll(fhat, 1, axis=-1))


def periodic_tv(u: np.ndarray) -> np.ndarray:
    return np.sum(np.abs(np.roll(u, -1, axis=-1) - u), axis=-1)


@dataclass
class TVDLoss:
    """Mean squared TV increase after one periodic advection step."""

    batch: Sequence[TrainingSample]
    base: SchemeConfig
    cfl: float = 0.4
    eps1: float = 1e-30

    def __post_init__(self):
        if not self.batch:
            raise ConfigurationError("empty batch")
        if not 0 < self.cfl <= 1:
            raise ConfigurationError("cfl must lie in (0, 1]")
        self.u0 = _stack(self.batch, "grid_values")[:, :NX]
        self.S = stencils_periodic(self.u0)
        self.tv0 = periodic_tv(self.u0)

    def value_and_grad(self, params: NetworkParams):
        tape = FluxTape(params, self.S, self.base, self.eps1)
        u1 = tvd_step(self.u0, tape.fhat, self.cfl)
        excess = np.maximum(periodic_tv(u1) - self.tv0, 0.0)
        B = len(self.u0)
        sgn = np.sign(u1 - np.roll(u1, 1, axis=-1))
        g_u = (sgn - np.roll(sgn, -1, axis=-1)) * (2.0 * excess / B)[:, None]
        g_f = self.cfl * (np.roll(g_u, -1, axis=-1) - g_u)
        return float(np.mean(excess ** 2)), tape.backward(g_f)


@dataclass
class DissipationLoss:
    """Penalty on anti-dissipation, ``mean_n max(Im Phi(phi_n), 0)^2``."""

    base: SchemeConfig
    N: int = 100
    eps1: float = 1e-30

    def __post_init__(self):
        if self.N <= 0 or self.N % 2:
            raise ConfigurationError("ADR grid must be a positive even integer")
        self.modes = np.arange(self.N // 2 + 1)
        self.S = adr.harmonic_stencils(self.N, self.modes)

    def value_and_grad(self, params: NetworkParams):
        tape = FluxTape(params, self.S, self.base, self.eps1)
        im = adr.phi_from_fluxes(tape.fhat, self.modes, self.N).imag
        pos = np.maximum(im, 0.0)
        scale = 1.0 / (self.N // 2)
        g = adr.im_phi_adjoint(2.0 * scale * pos, self.modes, self.N)
        return float(scale * np.sum(pos * pos)), tape.backward(g)


@dataclass(frozen=True)
class WeightPenalty:
    """``||W||^2`` over weight matrices only."""

    def value_and_grad(self, params: NetworkParams):
        return params.weight_norm_sq(), NetworkParams(
            tuple(2.0 * w for w in params.weights), tuple(np.zeros_like(b) for b in params.biases))


def loss_reconstruction(batch, params: NetworkParams, base: SchemeConfig) -> float:
    return ReconstructionLoss(batch, base).value_and_grad(params)[0]


def loss_tvd(batch, params: NetworkParams, base: SchemeConfig, cfl: float = 0.4) -> float:
    return TVDLoss(batch, base, cfl).value_and_grad(params)[0]


def loss_dissipation(params: NetworkParams, base: SchemeConfig, N: int = 100) -> float:
    return DissipationLoss(base, N).value_and_grad(params)[0]


# configuration


@dataclass(frozen=True)
class TrainConfig:
    lambda_tvd: float = 5.0
    lambda_diss: float = 200.0
    lambda_w: float = 1e-8
    batch_size: int = 800
    lr0: float = 1e-3
    lr_decay: float = 0.98
    epochs: int = 500
    seed: int = 0
    tvd_cfl: float = 0.4
    adr_grid: int = 100
    base: str = "Z"
    n_samples: int = 4000
    layer_sizes: tuple = DEFAULT_LAYERS
    eps1: float = 1e-30
    init_output_scale: float = 0.01

    def __post_init__(self):
        for f in dataclasses.fields(self):
            if f.type in ("float", "int"):
                object.__setattr__(self, f.name, (float if f.type == "float" else int)(getattr(self, f.name)))
        if min(self.lambda_tvd, self.lambda_diss, self.lambda_w) < 0:
            raise ConfigurationError("loss weights must be non-negative")
        if not self.lr0 > 0:
            raise ConfigurationError("lr0 must be positive")
        if not 0 < self.lr_decay <= 1:
            raise ConfigurationError("lr_decay must lie in (0, 1]")
        if self.batch_size < 1 or self.epochs < 0:
            raise ConfigurationError("batch_size must be >= 1 and epochs >= 0")
        if not 1 <= self.batch_size <= self.n_samples:
            raise ConfigurationError("batch_size cannot exceed the dataset size")
        if self.base not in ("JS", "Z"):
            raise ConfigurationError(f"base must be JS or Z, got {self.base!r}")
        if self.adr_grid <= 0 or self.adr_grid % 2:
            raise ConfigurationError("adr_grid must be a positive even integer")
        if not 0 < self.tvd_cfl <= 1:
            raise ConfigurationError("tvd_cfl must lie in (0, 1]")
        sizes = tuple(int(v) for v in self.layer_sizes)
        if len(sizes) < 2 or sizes[0] != 4 or sizes[-1] != 3:
            raise ConfigurationError("layer_sizes must start at 4 and end at 3")
        object.__setattr__(self, "layer_sizes", sizes)

    @property
    def base_scheme(self) -> SchemeConfig:
        return SchemeConfig(SchemeKind.JS if self.base == "JS" else SchemeKind.Z)

    def digest(self) -> str:
        doc = json.dumps(dataclasses.asdict(self), sort_keys=True)
        return hashlib.sha256(doc.encode()).hexdigest()[:16]


def _coerce(name: str, raw: str, ftype):
    if ftype in ("tuple", tuple):
        return tuple(int(v) for v in raw.replace(",", " ").split())
    if ftype in ("int", int):
        return int(raw)
    if ftype in ("float", float):
        return float(raw)
    return raw


def parse_config(text: str, source: str = "<config>") -> TrainConfig:
    """Parse ``key = value`` lines; ``#`` starts a comment."""
    types = {f.name: f.type for f in dataclasses.fields(TrainConfig)}
    values = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigurationError(f"{source}:{lineno}: expected 'key = value', got {line!r}")
        key, raw = (part.strip() for part in line.split("=", 1))
        if key not in types:
            raise ConfigurationError(f"{source}:{lineno}: unknown key {key!r}")
        if key in values:
            raise ConfigurationError(f"{source}:{lineno}: duplicate key {key!r}")
        try:
            values[key] = _coerce(key, raw, types[key])
        except ValueError:
            raise ConfigurationError(f"{source}:{lineno}: bad value {raw!r} for {key}") from None
    try:
        return TrainConfig(**values)
    except ConfigurationError as exc:
        raise ConfigurationError(f"{source}: {exc}") from None


def load_config(path) -> TrainConfig:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigurationError(f"cannot read config {path}: {exc}") from exc
    return parse_config(text, str(path))


def format_config(cfg: TrainConfig) -> str:
    lines = []
    for f in dataclasses.fields(cfg):
        v = getattr(cfg, f.name)
        lines.append(f"{f.name} = {' '.join(map(str, v)) if isinstance(v, tuple) else v}")
    return "\n".join(lines) + "\n"


# optimisation


@dataclass
class TotalLoss:
    batch: Sequence[TrainingSample]
    cfg: TrainConfig
    base: SchemeConfig
    diss: Optional[DissipationLoss] = None

    def __post_init__(self):
        self.rec = ReconstructionLoss(self.batch, self.base, self.cfg.eps1)
        self.tvd = TVDLoss(self.batch, self.base, self.cfg.tvd_cfl, self.cfg.eps1)
        if self.diss is None:
            self.diss = DissipationLoss(self.base, self.cfg.adr_grid, self.cfg.eps1)

    def components(self, params: NetworkParams) -> tuple[dict, NetworkParams]:
        c = self.cfg
        terms = [("L_r", self.rec, 1.0), ("L_tvd", self.tvd, c.lambda_tvd),
                 ("L_diss", self.diss, c.lambda_diss), ("L_reg", WeightPenalty(), c.lambda_w)]
        values, grad = {}, None
        for name, term, lam in terms:
            if lam == 0.0 and name != "L_r":
                values[name] = 0.0 if name == "L_reg" else term.value_and_grad(params)[0]
                continue
            v, g = term.value_and_grad(params)
            values[name] = v
            grad = scale_grads(g, lam) if grad is None else add_grads(grad, g, lam)
        values["total"] = (values["L_r"] + c.lambda_tvd * values["L_tvd"]
                           + c.lambda_diss * values["L_diss"] + c.lambda_w * values["L_reg"])
        return values, grad

    def value_and_grad(self, params):
        values, grad = self.components(params)
        return values["total"], grad


def total_loss(batch, params: NetworkParams, cfg: TrainConfig, base: SchemeConfig) -> float:
    return TotalLoss(batch, cfg, base).components(params)[0]["total"]


@dataclass
class Adam:
    lr: float
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8

    def __post_init__(self):
        self.m = self.v = None
        self.t = 0

    def step(self, theta: np.ndarray, grad: np.ndarray) -> np.ndarray:
        if self.m is None:
            self.m, self.v = np.zeros_like(theta), np.zeros_like(theta)
        self.t += 1
        self.m = self.beta1 * self.m + (1 - self.beta1) * grad
        self.v = self.beta2 * self.v + (1 - self.beta2) * grad * grad
        mhat = self.m / (1 - self.beta1 ** self.t)
        vhat = self.v / (1 - self.beta2 ** self.t)
        return theta - self.lr * mhat / (np.sqrt(vhat) + self.eps)


HISTORY_COLUMNS = ("epoch", "L_r", "L_tvd", "L_diss", "L_reg", "total", "lr")


@dataclass
class TrainResult:
    params: NetworkParams
    history: list
    aborted: Optional[str] = None


def _finite(values: dict, grad: Optional[NetworkParams]) -> bool:
    ok = all(math.isfinite(v) for v in values.values())
    return ok and (grad is None or bool(np.all(np.isfinite(grad.flatten()))))


def _components(loss: TotalLoss, params: NetworkParams):
    """Loss components; an overflowing gradient is reported as non-finite."""
    try:
        return loss.components(params)
    except ContractError as exc:
        if "non-finite" not in str(exc):
            raise
        return {"total": float("nan")}, None


def train(dataset: Sequence[TrainingSample], cfg: TrainConfig, base: Optional[SchemeConfig] = None,
          params: Optional[NetworkParams] = None) -> TrainResult:
    """Mini-batch Adam with ``lr = lr0 * decay**epoch``.

    History row 0 is the full-dataset loss before any update; row ``e`` is the
    full-dataset loss after epoch ``e``. A non-finite loss stops training and
    returns the last parameters that produced a finite one.
    """
    base = base if base is not None else cfg.base_scheme
    if cfg.batch_size > len(dataset):
        raise ConfigurationError("batch_size cannot exceed the dataset size")
    rng = np.random.default_rng(cfg.seed)
    if params is None:
        params = init_network(cfg.layer_sizes, cfg.seed, cfg.init_output_scale)
    sizes = params.layer_sizes
    diss = DissipationLoss(base, cfg.adr_grid, cfg.eps1)
    full = TotalLoss(dataset, cfg, base, diss)
    opt = Adam(cfg.lr0)
    history = []

    def record(epoch, lr):
        values, _ = _components(full, params)
        history.append({"epoch": epoch, **values, "lr": lr})
        return values

    values = record(0, cfg.lr0)
    if not _finite(values, None):
        raise TrainingError(f"initial loss is not finite: {values}")
    theta = params.flatten()
    n_batches = len(dataset) // cfg.batch_size
    for epoch in range(1, cfg.epochs + 1):
        opt.lr = cfg.lr0 * cfg.lr_decay ** (epoch - 1)
        order = rng.permutation(len(dataset))
        for b in range(n_batches):
            batch = [dataset[i] for i in order[b * cfg.batch_size:(b + 1) * cfg.batch_size]]
            vals, grad = _components(TotalLoss(batch, cfg, base, diss), params)
            if not _finite(vals, grad):
                msg = f"non-finite loss at epoch {epoch}, batch {b}: {vals}"
                log.error(msg)
                return TrainResult(params, history, msg)
            new_theta = opt.step(theta, grad.flatten())
            if not np.all(np.isfinite(new_theta)):
                msg = f"non-finite parameters at epoch {epoch}, batch {b}"
                log.error(msg)
                return TrainResult(params, history, msg)
            theta = new_theta
            params = NetworkParams.from_flat(sizes, theta)
        values = record(epoch, opt.lr)
        log.info("epoch %d total %.6e", epoch, values["total"])
        if not _finite(values, None):
            return TrainResult(params, history, f"non-finite loss after epoch {epoch}")
    return TrainResult(params, history)


def write_history(path, history: Sequence[dict]) -> None:
    rows = [",".join(HISTORY_COLUMNS)]
    for h in history:
        rows.append(",".join(str(h["epoch"]) if k == "epoch" else repr(float(h[k]))
                             for k in HISTORY_COLUMNS))
    Path(path).write_text("\n".join(rows) + "\n")


def reconstruct_sample(sample: TrainingSample, scheme: SchemeConfig) -> np.ndarray:
    """Scheme interface values on the 100 training interfaces."""
    return reconstruct(sample.stencils, scheme)
