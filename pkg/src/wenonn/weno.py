"""Fifth-order WENO reconstruction: candidate fluxes, smoothness indicators and weights.

Per-stencil functions mirror the textbook formulas; :func:`reconstruct` and
:func:`nonlinear_weights` are the vectorised paths used by the solver, the
spectral analysis and the weight probes.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import TYPE_CHECKING, NamedTuple, Optional

import numpy as np

from . import kernels
from .core import ConfigurationError

if TYPE_CHECKING:
    from .nn import NetworkParams

IDEAL_WEIGHTS = (0.1, 0.6, 0.3)
DEFAULT_EPS1 = 1e-30


class WeightTriple(NamedTuple):
    w0: float
    w1: float
    w2: float


class SchemeKind(enum.Enum):
    LINEAR = "linear"
    JS = "weno5-js"
    Z = "weno5-z"
    JS_NN = "weno5-js-nn"
    Z_NN = "weno5-z-nn"

    @property
    def is_nn(self) -> bool:
        return self in (SchemeKind.JS_NN, SchemeKind.Z_NN)

    @property
    def base(self) -> SchemeKind:
        return {SchemeKind.JS_NN: SchemeKind.JS, SchemeKind.Z_NN: SchemeKind.Z}.get(self, self)

    @property
    def kernel_code(self) -> int:
        return {SchemeKind.LINEAR: 0, SchemeKind.JS: 1, SchemeKind.Z: 2}[self.base]


_DEFAULT_EPS = {SchemeKind.LINEAR: 1e-6, SchemeKind.JS: 1e-6, SchemeKind.Z: 1e-40}


@dataclass(frozen=True)
class SchemeConfig:
    kind: SchemeKind
    epsilon: Optional[float] = None
    p: int = 2
    q: int = 1
    network: Optional["NetworkParams"] = field(default=None, compare=False)
    eps1: float = DEFAULT_EPS1

    def __post_init__(self):
        kind = SchemeKind(self.kind) if not isinstance(self.kind, SchemeKind) else self.kind
        object.__setattr__(self, "kind", kind)
        if self.epsilon is None:
            object.__setattr__(self, "epsilon", _DEFAULT_EPS[kind.base])
        if not self.epsilon > 0:
            raise ConfigurationError("epsilon must be positive")
        if self.p < 1 or self.q < 1:
            raise ConfigurationError("p and q must be >= 1")
        if kind.is_nn and self.network is None:
            raise ConfigurationError(f"{kind.value} needs a network checkpoint")
        if self.eps1 <= 0:
            raise ConfigurationError("eps1 must be positive")

    @property
    def base(self) -> SchemeConfig:
        """The classical scheme this configuration compensates (itself if classical)."""
        if not self.kind.is_nn:
            return self
        return SchemeConfig(self.kind.base, self.epsilon, self.p, self.q)

    @property
    def packed_network(self):
        if not self.kind.is_nn:
            return None
        return self.network.packed

    def kernel_args(self) -> tuple:
        return (self.kind.kernel_code, float(self.epsilon), float(self.p), float(self.q),
                self.packed_network, float(self.eps1))


def scheme(name: str, network: Optional["NetworkParams"] = None, **kwargs) -> SchemeConfig:
    """Build a config from a CLI-style name such as ``"weno5-z-nn"``."""
    try:
        kind = SchemeKind(name.lower())
    except ValueError:
        raise ConfigurationError(
            f"unknown scheme {name!r}; choose from {[k.value for k in SchemeKind]}") from None
    return SchemeConfig(kind, network=network if kind.is_nn else None, **kwargs)


def smoothness_indicators(s) -> tuple[float, float, float]:
    f0, f1, f2, f3, f4 = (float(v) for v in s)
    b0 = 13.0 / 12.0 * (f0 - 2.0 * f1 + f2) ** 2 + 0.25 * (f0 - 4.0 * f1 + 3.0 * f2) ** 2
    b1 = 13.0 / 12.0 * (f1 - 2.0 * f2 + f3) ** 2 + 0.25 * (f1 - f3) ** 2
    b2 = 13.0 / 12.0 * (f2 - 2.0 * f3 + f4) ** 2 + 0.25 * (3.0 * f2 - 4.0 * f3 + f4) ** 2
    return b0, b1, b2


def candidate_fluxes(s) -> tuple[float, float, float]:
    f0, f1, f2, f3, f4 = (float(v) for v in s)
    return (
        f0 / 3.0 - 7.0 / 6.0 * f1 + 11.0 / 6.0 * f2,
        -f1 / 6.0 + 5.0 / 6.0 * f2 + f3 / 3.0,
        f2 / 3.0 + 5.0 / 6.0 * f3 - f4 / 6.0,
    )


def _normalize(alpha) -> WeightTriple:
    s = alpha[0] + alpha[1] + alpha[2]
    return WeightTriple(alpha[0] / s, alpha[1] / s, alpha[2] / s)


def weights_js(beta, cfg: SchemeConfig) -> WeightTriple:
    return _normalize([d / (b + cfg.epsilon) ** cfg.p for d, b in zip(IDEAL_WEIGHTS, beta)])


def weights_z(beta, cfg: SchemeConfig) -> WeightTriple:
    tau = abs(beta[2] - beta[0])
    return _normalize([d * (1.0 + (tau / (b + cfg.epsilon)) ** cfg.q)
                       for d, b in zip(IDEAL_WEIGHTS, beta)])


def combine(candidates, w) -> float:
    return w[0] * candidates[0] + w[1] * candidates[1] + w[2] * candidates[2]


def classical_weights(s, cfg: SchemeConfig) -> WeightTriple:
    base = cfg.kind.base
    if base is SchemeKind.LINEAR:
        return WeightTriple(*IDEAL_WEIGHTS)
    beta = smoothness_indicators(s)
    return weights_js(beta, cfg) if base is SchemeKind.JS else weights_z(beta, cfg)


def interface_weights(s, cfg: SchemeConfig) -> WeightTriple:
    """Final weights for one stencil, including the learned compensation for NN kinds."""
    w = classical_weights(s, cfg)
    if cfg.kind.is_nn:
        from . import nn

        w_nn = nn.mlp_forward(cfg.network, nn.delta_features(s, cfg.eps1))
        w = nn.compensate_and_normalize(w, w_nn)
    return w


def reconstruct_interface(s, cfg: SchemeConfig) -> float:
    return combine(candidate_fluxes(s), interface_weights(s, cfg))


# vectorised paths


def stencils_periodic(values: np.ndarray) -> np.ndarray:
    """``(..., N)`` periodic samples -> ``(..., N, 5)`` stencils for interfaces ``j+1/2``."""
    return np.stack([np.roll(values, 2 - k, axis=-1) for k in range(5)], axis=-1)


def nonlinear_weights(stencils: np.ndarray, cfg: SchemeConfig) -> np.ndarray:
    S = np.ascontiguousarray(np.reshape(stencils, (-1, 5)), dtype=float)
    return kernels.backend.weights(S, *cfg.kernel_args())


def reconstruct(stencils: np.ndarray, cfg: SchemeConfig) -> np.ndarray:
    """Interface values for an array of stencils of shape ``(..., 5)``."""
    stencils = np.asarray(stencils, dtype=float)
    S = np.ascontiguousarray(stencils.reshape(-1, 5))
    return kernels.backend.reconstruct(S, *cfg.kernel_args()).reshape(stencils.shape[:-1])
