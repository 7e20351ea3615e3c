"""Approximate dispersion relation of (nonlinear) flux reconstructions.

The scheme is applied to the real and imaginary parts of a discrete harmonic
``exp(i phi_n j)`` on a periodic grid; the DFT coefficient of the resulting
flux difference at the same mode gives the modified wavenumber ``Phi(phi_n)``.
Advection speed is 1 throughout.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import ContractError
from .weno import SchemeConfig, reconstruct, stencils_periodic


@dataclass(frozen=True)
class SpectrumSample:
    phi: float
    Phi: complex

    @property
    def dispersion_error(self) -> float:
        return self.Phi.real - self.phi

    @property
    def dissipation(self) -> float:
        return self.Phi.imag


@dataclass(frozen=True)
class HarmonicField:
    N: int
    n: int

    @property
    def phi(self) -> float:
        return 2.0 * math.pi * self.n / self.N

    @property
    def real_part(self) -> np.ndarray:
        return np.cos(self.phi * np.arange(self.N))

    @property
    def imag_part(self) -> np.ndarray:
        return np.sin(self.phi * np.arange(self.N))


def _check_mode(n: int, N: int) -> None:
    if N <= 0 or N % 2:
        raise ContractError(f"grid size must be a positive even integer, got {N}")
    if not 0 <= n <= N // 2:
        raise ContractError(f"mode {n} outside [0, {N // 2}]")


def dft_coefficient(samples, n: int) -> complex:
    """``(1/N) sum_j samples_j exp(-2 pi i n j / N)`` by direct summation."""
    samples = np.asarray(samples)
    N = samples.shape[-1]
    _check_mode(n, N)
    j = np.arange(N)
    return complex(np.sum(samples * np.exp(-2j * math.pi * n * j / N)) / N)


def reduced_wavenumbers(N: int) -> np.ndarray:
    return 2.0 * math.pi * np.arange(N // 2 + 1) / N


def harmonic_stencils(N: int, modes) -> np.ndarray:
    """Stencils of cos/sin fields: shape ``(len(modes), 2, N, 5)``."""
    modes = np.asarray(modes)
    phi = 2.0 * math.pi * modes / N
    arg = phi[:, None] * np.arange(N)[None, :]
    fields = np.stack([np.cos(arg), np.sin(arg)], axis=1)
    return stencils_periodic(fields)


def _dft_matrix(N: int, modes) -> np.ndarray:
    modes = np.asarray(modes)
    return np.exp(-2j * math.pi * np.outer(modes, np.arange(N)) / N)


def phi_from_fluxes(fhat: np.ndarray, modes, N: int) -> np.ndarray:
    """Modified wavenumbers from interface fluxes ``fhat[m, (re, im), j]`` at ``j+1/2``."""
    D = fhat - np.roll(fhat, 1, axis=-1)
    Dc = D[:, 0, :] + 1j * D[:, 1, :]
    E = np.sum(Dc * _dft_matrix(N, modes), axis=-1) / N
    return -1j * E


def im_phi_adjoint(g_im: np.ndarray, modes, N: int) -> np.ndarray:
    """Pull back ``dL/dIm(Phi_m)`` to ``dL/dfhat[m, (re, im), j]``."""
    modes = np.asarray(modes)
    phi = 2.0 * math.pi * modes / N
    arg = phi[:, None] * np.arange(N)[None, :]
    # Im Phi = -(1/N) sum_j (D_R cos + D_I sin)
    gD = np.stack([-np.cos(arg), -np.sin(arg)], axis=1) * (g_im[:, None, None] / N)
    return gD - np.roll(gD, -1, axis=-1)


def spectrum_values(scheme: SchemeConfig, N: int) -> tuple[np.ndarray, np.ndarray]:
    """``(phi, Phi)`` arrays over modes ``0..N/2``."""
    _check_mode(0, N)
    modes = np.arange(N // 2 + 1)
    fhat = reconstruct(harmonic_stencils(N, modes), scheme)
    return reduced_wavenumbers(N), phi_from_fluxes(fhat, modes, N)


def modified_wavenumber(scheme: SchemeConfig, n: int, N: int) -> SpectrumSample:
    _check_mode(n, N)
    fhat = reconstruct(harmonic_stencils(N, [n]), scheme)
    Phi = phi_from_fluxes(fhat, [n], N)[0]
    return SpectrumSample(2.0 * math.pi * n / N, complex(Phi))


def spectrum(scheme: SchemeConfig, N: int = 128) -> list[SpectrumSample]:
    phi, Phi = spectrum_values(scheme, N)
    return [SpectrumSample(float(a), complex(b)) for a, b in zip(phi, Phi)]


def exact_interface_flux(phi: float, N: int) -> tuple[np.ndarray, np.ndarray]:
    """Real/imag parts of the exact interface function ``h`` of ``exp(i phi j)`` at ``j+1/2``.

    ``h`` is the inverse of the cell sliding average: it carries the factor
    ``(phi/2)/sin(phi/2)``.
    """
    k = 1.0 if phi == 0.0 else (0.5 * phi) / math.sin(0.5 * phi)
    arg = phi * (np.arange(N) + 0.5)
    return k * np.cos(arg), k * np.sin(arg)


def spectral_error_bound(scheme: SchemeConfig, n: int, N: int) -> tuple[float, float]:
    """``(|Phi(phi_n) - phi_n|, bound)`` where the bound is built from reconstruction errors."""
    _check_mode(n, N)
    phi = 2.0 * math.pi * n / N
    fhat = reconstruct(harmonic_stencils(N, [n]), scheme)[0]
    Phi = phi_from_fluxes(fhat[None], [n], N)[0]
    hR, hI = exact_interface_flux(phi, N)
    eR = fhat[0] - hR
    eI = fhat[1] - hI
    # e at j+1/2 and j-1/2 both run over every interface on the periodic grid
    total = np.sum(eR ** 2 + np.roll(eR, 1) ** 2 + eI ** 2 + np.roll(eI, 1) ** 2)
    return abs(Phi - phi), math.sqrt(8.0 / N * total)


def up5_transfer(phi) -> np.ndarray:
    """Closed-form modified wavenumber of the fifth-order upwind scheme."""
    z = np.exp(1j * np.asarray(phi, dtype=float))
    return -1j * (1.0 - 1.0 / z) * (2.0 / z ** 2 - 13.0 / z + 47.0 + 27.0 * z - 3.0 * z ** 2) / 60.0
