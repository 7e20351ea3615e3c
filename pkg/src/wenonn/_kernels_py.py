"""NumPy implementation of the hot kernels.

Used when the compiled ``_kernels`` extension is unavailable or when
``WENONN_BACKEND=python`` is set. Every function here has a twin with the
same signature in ``_kernels.pyx``.

Stencils are ``(M, 5)`` arrays ordered ``f[i-2] .. f[i+2]`` for the interface
``i+1/2``. ``kind`` is 0 (ideal weights), 1 (JS) or 2 (Z). ``net`` is either
``None`` or a packed network (see :func:`wenonn.kernels.pack_network`).
"""

from __future__ import annotations

import numpy as np

D0, D1, D2 = 0.1, 0.6, 0.3

BACKEND = "python"


def smoothness(S):
    f0, f1, f2, f3, f4 = S[:, 0], S[:, 1], S[:, 2], S[:, 3], S[:, 4]
    a = f0 - 2.0 * f1 + f2
    b = f0 - 4.0 * f1 + 3.0 * f2
    b0 = 13.0 / 12.0 * (a * a) + 0.25 * (b * b)
    a = f1 - 2.0 * f2 + f3
    b = f1 - f3
    b1 = 13.0 / 12.0 * (a * a) + 0.25 * (b * b)
    a = f2 - 2.0 * f3 + f4
    b = 3.0 * f2 - 4.0 * f3 + f4
    b2 = 13.0 / 12.0 * (a * a) + 0.25 * (b * b)
    return np.stack([b0, b1, b2], axis=1)


def candidates(S):
    f0, f1, f2, f3, f4 = S[:, 0], S[:, 1], S[:, 2], S[:, 3], S[:, 4]
    c0 = (2.0 * f0 - 7.0 * f1 + 11.0 * f2) / 6.0
    c1 = (-f1 + 5.0 * f2 + 2.0 * f3) / 6.0
    c2 = (2.0 * f2 + 5.0 * f3 - f4) / 6.0
    return np.stack([c0, c1, c2], axis=1)


def _pow(x, p):
    if p == 1.0:
        return x
    if p == 2.0:
        return x * x
    return x ** p


def base_weights(S, kind, eps, p, q):
    M = S.shape[0]
    if kind == 0:
        w = np.empty((M, 3))
        w[:, 0], w[:, 1], w[:, 2] = D0, D1, D2
        return w
    beta = smoothness(S)
    b0, b1, b2 = beta[:, 0], beta[:, 1], beta[:, 2]
    if kind == 1:
        a0 = D0 / _pow(b0 + eps, p)
        a1 = D1 / _pow(b1 + eps, p)
        a2 = D2 / _pow(b2 + eps, p)
    elif kind == 2:
        tau = np.abs(b2 - b0)
        a0 = D0 * (1.0 + _pow(tau / (b0 + eps), q))
        a1 = D1 * (1.0 + _pow(tau / (b1 + eps), q))
        a2 = D2 * (1.0 + _pow(tau / (b2 + eps), q))
    else:
        raise ValueError(f"unknown weight kind {kind}")
    s = a0 + a1 + a2
    return np.stack([a0 / s, a1 / s, a2 / s], axis=1)


def delta_features(S, eps1):
    d = np.abs(np.diff(S, axis=1))
    m = np.maximum(d.max(axis=1), eps1)
    return d / m[:, None]


def mlp(net, X):
    h = X
    last = len(net.weights) - 1
    for l, (W, b) in enumerate(zip(net.weights, net.biases)):
        h = h @ W.T + b
        if l < last:
            h = np.maximum(h, 0.0)
    return h


def compensate(w_star, y):
    t0 = np.maximum(w_star[:, 0] + y[:, 0], 0.0)
    t1 = np.maximum(w_star[:, 1] + y[:, 1], 0.0)
    t2 = np.maximum(w_star[:, 2] + y[:, 2], 0.0)
    s = t0 + t1 + t2
    keep = (s == 0.0) | ((y[:, 0] == 0.0) & (y[:, 1] == 0.0) & (y[:, 2] == 0.0))
    safe = np.where(keep, 1.0, s)
    w = np.stack([t0 / safe, t1 / safe, t2 / safe], axis=1)
    w[keep] = w_star[keep]
    return w


def weights(S, kind, eps, p, q, net=None, eps1=1e-30):
    S = np.ascontiguousarray(S, dtype=float)
    w = base_weights(S, kind, eps, p, q)
    if net is not None:
        w = compensate(w, mlp(net, delta_features(S, eps1)))
    return w


def combine(C, W):
    return W[:, 0] * C[:, 0] + W[:, 1] * C[:, 1] + W[:, 2] * C[:, 2]


def reconstruct(S, kind, eps, p, q, net=None, eps1=1e-30):
    S = np.ascontiguousarray(S, dtype=float)
    return combine(candidates(S), weights(S, kind, eps, p, q, net, eps1))


def roe_eigensystem(UL, UR, gamma):
    """Roe-averaged left/right eigenvector matrices for x-direction Euler fluxes.

    ``UL``/``UR`` are ``(..., nv)`` conserved states with nv in {3, 4}.
    Returns ``(lam, Lm, Rm)`` with shapes ``(..., nv)``, ``(..., nv, nv)``.
    """
    nv = UL.shape[-1]
    rl, rr = UL[..., 0], UR[..., 0]
    sl, sr = np.sqrt(rl), np.sqrt(rr)
    ul, ur = UL[..., 1] / rl, UR[..., 1] / rr
    kel = 0.5 * UL[..., 1] * ul
    ker = 0.5 * UR[..., 1] * ur
    if nv == 4:
        vl, vr = UL[..., 2] / rl, UR[..., 2] / rr
        kel = kel + 0.5 * UL[..., 2] * vl
        ker = ker + 0.5 * UR[..., 2] * vr
    pl = (gamma - 1.0) * (UL[..., -1] - kel)
    pr = (gamma - 1.0) * (UR[..., -1] - ker)
    Hl = (UL[..., -1] + pl) / rl
    Hr = (UR[..., -1] + pr) / rr
    den = sl + sr
    u = (sl * ul + sr * ur) / den
    H = (sl * Hl + sr * Hr) / den
    q2 = u * u
    if nv == 4:
        v = (sl * vl + sr * vr) / den
        q2 = q2 + v * v
    c2 = (gamma - 1.0) * (H - 0.5 * q2)
    if np.any(~(c2 > 0.0)):
        raise ArithmeticError("Roe-averaged sound speed is not real")
    c = np.sqrt(c2)
    return eigensystem(u, v if nv == 4 else None, H, c, gamma)


def eigensystem(u, v, H, c, gamma):
    shape = u.shape
    nv = 3 if v is None else 4
    b1 = (gamma - 1.0) / (c * c)
    q2 = u * u if v is None else u * u + v * v
    b2 = 0.5 * b1 * q2
    uc = u / c
    Rm = np.zeros(shape + (nv, nv))
    Lm = np.zeros(shape + (nv, nv))
    e = nv - 1
    # columns of R: u-c, u, [transverse], u+c
    Rm[..., 0, 0] = 1.0
    Rm[..., 1, 0] = u - c
    Rm[..., e, 0] = H - u * c
    Rm[..., 0, 1] = 1.0
    Rm[..., 1, 1] = u
    Rm[..., e, 1] = 0.5 * q2
    Rm[..., 0, e] = 1.0
    Rm[..., 1, e] = u + c
    Rm[..., e, e] = H + u * c
    Lm[..., 0, 0] = 0.5 * (b2 + uc)
    Lm[..., 0, 1] = -0.5 * (b1 * u + 1.0 / c)
    Lm[..., 0, e] = 0.5 * b1
    Lm[..., 1, 0] = 1.0 - b2
    Lm[..., 1, 1] = b1 * u
    Lm[..., 1, e] = -b1
    Lm[..., e, 0] = 0.5 * (b2 - uc)
    Lm[..., e, 1] = -0.5 * (b1 * u - 1.0 / c)
    Lm[..., e, e] = 0.5 * b1
    if nv == 4:
        Rm[..., 2, 0] = v
        Rm[..., 2, 1] = v
        Rm[..., 2, 2] = 1.0
        Rm[..., 3, 2] = v
        Rm[..., 2, 3] = v
        Lm[..., 0, 2] = -0.5 * b1 * v
        Lm[..., 1, 2] = b1 * v
        Lm[..., 3, 2] = -0.5 * b1 * v
        Lm[..., 2, 0] = -v
        Lm[..., 2, 2] = 1.0
    lam = np.stack([u - c, u, u, u + c] if nv == 4 else [u - c, u, u + c], axis=-1)
    return lam, Lm, Rm


def physical_flux(U, gamma):
    nv = U.shape[-1]
    rho = U[..., 0]
    u = U[..., 1] / rho
    ke = 0.5 * U[..., 1] * u
    if nv == 4:
        v = U[..., 2] / rho
        ke = ke + 0.5 * U[..., 2] * v
    p = (gamma - 1.0) * (U[..., -1] - ke)
    F = np.empty_like(U)
    F[..., 0] = U[..., 1]
    F[..., 1] = U[..., 1] * u + p
    if nv == 4:
        F[..., 2] = U[..., 2] * u
    F[..., -1] = u * (U[..., -1] + p)
    return F


def euler_flux(U, gamma, alpha, kind, eps, p, q, net=None, eps1=1e-30):
    """Characteristic-wise WENO interface fluxes along axis 1 of ``U``.

    ``U`` is ``(lines, npad, nv)``; returns ``(lines, npad - 5, nv)`` fluxes at
    the interfaces between padded cells ``i`` and ``i+1`` for ``i = 2 .. npad-4``.
    """
    U = np.ascontiguousarray(U, dtype=float)
    lines, npad, nv = U.shape
    n_if = npad - 5
    F = physical_flux(U, gamma)
    _, Lm, Rm = roe_eigensystem(U[:, 2:npad - 3], U[:, 3:npad - 2], gamma)
    fp = np.empty((6, lines, n_if, nv))
    fm = np.empty((6, lines, n_if, nv))
    for k in range(6):
        sl = slice(k, k + n_if)
        cf = np.einsum("lnij,lnj->lni", Lm, F[:, sl])
        cu = np.einsum("lnij,lnj->lni", Lm, U[:, sl])
        fp[k] = 0.5 * (cf + alpha * cu)
        fm[k] = 0.5 * (cf - alpha * cu)
    Sp = np.moveaxis(fp[0:5], 0, -1).reshape(-1, 5)
    Sm = np.moveaxis(fm[5:0:-1], 0, -1).reshape(-1, 5)
    hp = reconstruct(Sp, kind, eps, p, q, net, eps1)
    hm = reconstruct(Sm, kind, eps, p, q, net, eps1)
    ch = (hp + hm).reshape(lines, n_if, nv)
    return np.einsum("lnij,lnj->lni", Rm, ch)
