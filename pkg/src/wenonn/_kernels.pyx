# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled hot kernels. Same signatures as ``_kernels_py``."""

import numpy as np
cimport numpy as cnp
from libc.math cimport sqrt, pow, fabs
from libc.stdlib cimport malloc, free

cnp.import_array()

BACKEND = "cython"

cdef double D0 = 0.1
cdef double D1 = 0.6
cdef double D2 = 0.3


cdef struct Net:
    int n_layers
    int* sizes          # n_layers + 1 entries
    double* w           # row-major (in, out) per layer, concatenated
    double* b
    int max_width


cdef inline double _pw(double x, double p) noexcept nogil:
    if p == 1.0:
        return x
    if p == 2.0:
        return x * x
    return pow(x, p)


cdef inline void _candidates(const double* f, double* c) noexcept nogil:
    c[0] = (2.0 * f[0] - 7.0 * f[1] + 11.0 * f[2]) / 6.0
    c[1] = (-f[1] + 5.0 * f[2] + 2.0 * f[3]) / 6.0
    c[2] = (2.0 * f[2] + 5.0 * f[3] - f[4]) / 6.0


cdef inline void _smoothness(const double* f, double* beta) noexcept nogil:
    cdef double a, b
    a = f[0] - 2.0 * f[1] + f[2]
    b = f[0] - 4.0 * f[1] + 3.0 * f[2]
    beta[0] = 13.0 / 12.0 * (a * a) + 0.25 * (b * b)
    a = f[1] - 2.0 * f[2] + f[3]
    b = f[1] - f[3]
    beta[1] = 13.0 / 12.0 * (a * a) + 0.25 * (b * b)
    a = f[2] - 2.0 * f[3] + f[4]
    b = 3.0 * f[2] - 4.0 * f[3] + f[4]
    beta[2] = 13.0 / 12.0 * (a * a) + 0.25 * (b * b)


cdef inline void _base_weights(const double* f, int kind, double eps, double p, double q,
                               double* w) noexcept nogil:
    cdef double beta[3]
    cdef double a0, a1, a2, s, tau
    if kind == 0:
        w[0] = D0
        w[1] = D1
        w[2] = D2
        return
    _smoothness(f, beta)
    if kind == 1:
        a0 = D0 / _pw(beta[0] + eps, p)
        a1 = D1 / _pw(beta[1] + eps, p)
        a2 = D2 / _pw(beta[2] + eps, p)
    else:
        tau = fabs(beta[2] - beta[0])
        a0 = D0 * (1.0 + _pw(tau / (beta[0] + eps), q))
        a1 = D1 * (1.0 + _pw(tau / (beta[1] + eps), q))
        a2 = D2 * (1.0 + _pw(tau / (beta[2] + eps), q))
    s = a0 + a1 + a2
    w[0] = a0 / s
    w[1] = a1 / s
    w[2] = a2 / s


cdef inline void _mlp(const Net* net, const double* x, double* out, double* buf_a,
                      double* buf_b) noexcept nogil:
    # weights are stored transposed, (in, out) per layer, so the inner loop runs
    # over outputs; each output still sums its inputs in index order
    cdef int l, i, j, n_in, n_out
    cdef double xj
    cdef const double* W = net.w
    cdef const double* B = net.b
    cdef double* src = buf_a
    cdef double* dst = buf_b
    cdef double* tmp
    for i in range(net.sizes[0]):
        src[i] = x[i]
    for l in range(net.n_layers):
        n_in = net.sizes[l]
        n_out = net.sizes[l + 1]
        for i in range(n_out):
            dst[i] = 0.0
        for j in range(n_in):
            xj = src[j]
            if xj == 0.0:
                # only the sign of a zero sum can change, and no caller sees it
                continue
            for i in range(n_out):
                dst[i] = dst[i] + W[j * n_out + i] * xj
        for i in range(n_out):
            dst[i] = dst[i] + B[i]
            if l < net.n_layers - 1 and not (dst[i] > 0.0):
                dst[i] = 0.0
        W = W + n_in * n_out
        B = B + n_out
        tmp = src
        src = dst
        dst = tmp
    for i in range(net.sizes[net.n_layers]):
        out[i] = src[i]


cdef inline void _features(const double* f, double eps1, double* x) noexcept nogil:
    cdef double m = 0.0
    cdef int j
    for j in range(4):
        x[j] = fabs(f[j + 1] - f[j])
        if x[j] > m:
            m = x[j]
    if m < eps1:
        m = eps1
    for j in range(4):
        x[j] = x[j] / m


cdef inline void _apply(const double* y, double* w) noexcept nogil:
    cdef double t0, t1, t2, s
    if y[0] == 0.0 and y[1] == 0.0 and y[2] == 0.0:
        return
    t0 = w[0] + y[0]
    t1 = w[1] + y[1]
    t2 = w[2] + y[2]
    if not (t0 > 0.0):
        t0 = 0.0
    if not (t1 > 0.0):
        t1 = 0.0
    if not (t2 > 0.0):
        t2 = 0.0
    s = t0 + t1 + t2
    if s == 0.0:
        return
    w[0] = t0 / s
    w[1] = t1 / s
    w[2] = t2 / s


cdef inline void _compensate(const Net* net, const double* f, double eps1, double* w,
                             double* buf_a, double* buf_b) noexcept nogil:
    cdef double x[4]
    cdef double y[3]
    _features(f, eps1, x)
    _mlp(net, x, y, buf_a, buf_b)
    _apply(y, w)


cdef inline double _reconstruct(const double* f, int kind, double eps, double p, double q,
                                const Net* net, double eps1, double* buf_a,
                                double* buf_b) noexcept nogil:
    cdef double c[3]
    cdef double w[3]
    _candidates(f, c)
    _base_weights(f, kind, eps, p, q, w)
    if net != NULL:
        _compensate(net, f, eps1, w, buf_a, buf_b)
    return w[0] * c[0] + w[1] * c[1] + w[2] * c[2]


cdef class _NetHolder:
    """Owns contiguous copies of a packed network for the C loops."""
    cdef Net net
    cdef cnp.ndarray sizes_arr, w_arr, b_arr

    def __cinit__(self, packed):
        self.sizes_arr = np.ascontiguousarray(packed.sizes, dtype=np.intc)
        self.w_arr = np.concatenate([np.ascontiguousarray(w, dtype=np.float64).T.ravel()
                                     for w in packed.weights])
        self.b_arr = np.ascontiguousarray(packed.b_flat, dtype=np.float64)
        self.net.n_layers = self.sizes_arr.shape[0] - 1
        self.net.sizes = <int*> cnp.PyArray_DATA(self.sizes_arr)
        self.net.w = <double*> cnp.PyArray_DATA(self.w_arr)
        self.net.b = <double*> cnp.PyArray_DATA(self.b_arr)
        self.net.max_width = int(self.sizes_arr.max())


cdef _NetHolder _holder(object net):
    if net is None:
        return None
    h = getattr(net, "_cython_holder", None)
    if h is None:
        h = _NetHolder(net)
        try:
            object.__setattr__(net, "_cython_holder", h)
        except (AttributeError, TypeError):
            pass
    return h


def smoothness(S):
    cdef double[:, ::1] s = np.ascontiguousarray(S, dtype=np.float64)
    cdef Py_ssize_t m, M = s.shape[0]
    out = np.empty((M, 3))
    cdef double[:, ::1] o = out
    with nogil:
        for m in range(M):
            _smoothness(&s[m, 0], &o[m, 0])
    return out


def candidates(S):
    cdef double[:, ::1] s = np.ascontiguousarray(S, dtype=np.float64)
    cdef Py_ssize_t m, M = s.shape[0]
    out = np.empty((M, 3))
    cdef double[:, ::1] o = out
    with nogil:
        for m in range(M):
            _candidates(&s[m, 0], &o[m, 0])
    return out


def base_weights(S, int kind, double eps, double p, double q):
    if kind not in (0, 1, 2):
        raise ValueError(f"unknown weight kind {kind}")
    cdef double[:, ::1] s = np.ascontiguousarray(S, dtype=np.float64)
    cdef Py_ssize_t m, M = s.shape[0]
    out = np.empty((M, 3))
    cdef double[:, ::1] o = out
    with nogil:
        for m in range(M):
            _base_weights(&s[m, 0], kind, eps, p, q, &o[m, 0])
    return out


def _network_outputs(const double[:, ::1] s, net, double eps1):
    """MLP outputs for a batch of stencils; the matrix products go through BLAS."""
    cdef Py_ssize_t m, M = s.shape[0]
    X = np.empty((M, 4))
    cdef double[:, ::1] x = X
    with nogil:
        for m in range(M):
            _features(&s[m, 0], eps1, &x[m, 0])
    Y = X
    last = len(net.weights) - 1
    for l, (W, b) in enumerate(zip(net.weights, net.biases)):
        Y = Y @ W.T + b
        if l < last:
            np.maximum(Y, 0.0, out=Y)
    return np.ascontiguousarray(Y)


def weights(S, int kind, double eps, double p, double q, net=None, double eps1=1e-30):
    if kind not in (0, 1, 2):
        raise ValueError(f"unknown weight kind {kind}")
    cdef double[:, ::1] s = np.ascontiguousarray(S, dtype=np.float64)
    cdef Py_ssize_t m, M = s.shape[0]
    out = np.empty((M, 3))
    cdef double[:, ::1] o = out
    cdef double[:, ::1] y
    with nogil:
        for m in range(M):
            _base_weights(&s[m, 0], kind, eps, p, q, &o[m, 0])
    if net is not None and M > 0:
        y = _network_outputs(s, net, eps1)
        with nogil:
            for m in range(M):
                _apply(&y[m, 0], &o[m, 0])
    return out


def combine(C, W):
    cdef double[:, ::1] c = np.ascontiguousarray(C, dtype=np.float64)
    cdef double[:, ::1] w = np.ascontiguousarray(W, dtype=np.float64)
    cdef Py_ssize_t m, M = c.shape[0]
    out = np.empty(M)
    cdef double[::1] o = out
    with nogil:
        for m in range(M):
            o[m] = w[m, 0] * c[m, 0] + w[m, 1] * c[m, 1] + w[m, 2] * c[m, 2]
    return out


def reconstruct(S, int kind, double eps, double p, double q, net=None, double eps1=1e-30):
    cdef double[:, ::1] s = np.ascontiguousarray(S, dtype=np.float64)
    cdef double[:, ::1] w = weights(s, kind, eps, p, q, net, eps1)
    cdef Py_ssize_t m, M = s.shape[0]
    out = np.empty(M)
    cdef double[::1] o = out
    cdef double c[3]
    with nogil:
        for m in range(M):
            _candidates(&s[m, 0], c)
            o[m] = w[m, 0] * c[0] + w[m, 1] * c[1] + w[m, 2] * c[2]
    return out


cdef inline int _roe_eigen(const double* UL, const double* UR, int nv, double gamma,
                           double* Lm, double* Rm) noexcept nogil:
    # Lm, Rm: nv*nv row-major. Returns 1 when the averaged sound speed is not real.
    cdef double rl = UL[0], rr = UR[0]
    cdef double sl = sqrt(rl), sr = sqrt(rr)
    cdef double ul = UL[1] / rl, ur = UR[1] / rr
    cdef double vl = 0.0, vr = 0.0
    cdef double kel = 0.5 * UL[1] * ul
    cdef double ker = 0.5 * UR[1] * ur
    cdef int e = nv - 1
    cdef double pl, pr, Hl, Hr, den, u, v, H, q2, c2, c, b1, b2, uc
    cdef int i
    if nv == 4:
        vl = UL[2] / rl
        vr = UR[2] / rr
        kel = kel + 0.5 * UL[2] * vl
        ker = ker + 0.5 * UR[2] * vr
    pl = (gamma - 1.0) * (UL[e] - kel)
    pr = (gamma - 1.0) * (UR[e] - ker)
    Hl = (UL[e] + pl) / rl
    Hr = (UR[e] + pr) / rr
    den = sl + sr
    u = (sl * ul + sr * ur) / den
    H = (sl * Hl + sr * Hr) / den
    q2 = u * u
    if nv == 4:
        v = (sl * vl + sr * vr) / den
        q2 = q2 + v * v
    c2 = (gamma - 1.0) * (H - 0.5 * q2)
    if not (c2 > 0.0):
        return 1
    c = sqrt(c2)
    b1 = (gamma - 1.0) / (c * c)
    b2 = 0.5 * b1 * q2
    uc = u / c
    for i in range(nv * nv):
        Lm[i] = 0.0
        Rm[i] = 0.0
    Rm[0 * nv + 0] = 1.0
    Rm[1 * nv + 0] = u - c
    Rm[e * nv + 0] = H - u * c
    Rm[0 * nv + 1] = 1.0
    Rm[1 * nv + 1] = u
    Rm[e * nv + 1] = 0.5 * q2
    Rm[0 * nv + e] = 1.0
    Rm[1 * nv + e] = u + c
    Rm[e * nv + e] = H + u * c
    Lm[0 * nv + 0] = 0.5 * (b2 + uc)
    Lm[0 * nv + 1] = -0.5 * (b1 * u + 1.0 / c)
    Lm[0 * nv + e] = 0.5 * b1
    Lm[1 * nv + 0] = 1.0 - b2
    Lm[1 * nv + 1] = b1 * u
    Lm[1 * nv + e] = -b1
    Lm[e * nv + 0] = 0.5 * (b2 - uc)
    Lm[e * nv + 1] = -0.5 * (b1 * u - 1.0 / c)
    Lm[e * nv + e] = 0.5 * b1
    if nv == 4:
        Rm[2 * nv + 0] = v
        Rm[2 * nv + 1] = v
        Rm[2 * nv + 2] = 1.0
        Rm[3 * nv + 2] = v
        Rm[2 * nv + 3] = v
        Lm[0 * nv + 2] = -0.5 * b1 * v
        Lm[1 * nv + 2] = b1 * v
        Lm[3 * nv + 2] = -0.5 * b1 * v
        Lm[2 * nv + 0] = -v
        Lm[2 * nv + 2] = 1.0
    return 0


cdef inline void _phys_flux(const double* U, int nv, double gamma, double* F) noexcept nogil:
    cdef double rho = U[0]
    cdef double u = U[1] / rho
    cdef double ke = 0.5 * U[1] * u
    cdef double v, p
    cdef int e = nv - 1
    if nv == 4:
        v = U[2] / rho
        ke = ke + 0.5 * U[2] * v
    p = (gamma - 1.0) * (U[e] - ke)
    F[0] = U[1]
    F[1] = U[1] * u + p
    if nv == 4:
        F[2] = U[2] * u
    F[e] = u * (U[e] + p)


def euler_flux(U, double gamma, double alpha, int kind, double eps, double p, double q,
               net=None, double eps1=1e-30):
    if kind not in (0, 1, 2):
        raise ValueError(f"unknown weight kind {kind}")
    cdef double[:, :, ::1] u = np.ascontiguousarray(U, dtype=np.float64)
    cdef Py_ssize_t lines = u.shape[0], npad = u.shape[1]
    cdef int nv = <int> u.shape[2]
    if nv != 3 and nv != 4:
        raise ValueError("euler_flux expects 3 or 4 conserved variables")
    cdef Py_ssize_t n_if = npad - 5
    out = np.empty((lines, n_if, nv))
    cdef double[:, :, ::1] o = out
    Fa = np.empty((lines, npad, nv))
    cdef double[:, :, ::1] F = Fa
    cdef _NetHolder h = _holder(net)
    cdef Net* pnet = NULL
    cdef int width = 8
    if h is not None:
        pnet = &h.net
        width = max(width, h.net.max_width)
    cdef double* buf = <double*> malloc(2 * width * sizeof(double))
    cdef double Lm[16]
    cdef double Rm[16]
    cdef double cf[6][4]
    cdef double cu[6][4]
    cdef double sp[5]
    cdef double sm[5]
    cdef double ch[4]
    cdef double acc_f, acc_u, acc
    cdef Py_ssize_t l, n, i
    cdef int k, a, b, bad = 0
    cdef Py_ssize_t bad_line = 0, bad_if = 0
    try:
        with nogil:
            for l in range(lines):
                for i in range(npad):
                    _phys_flux(&u[l, i, 0], nv, gamma, &F[l, i, 0])
            for l in range(lines):
                for n in range(n_if):
                    i = n + 2
                    if _roe_eigen(&u[l, i, 0], &u[l, i + 1, 0], nv, gamma, Lm, Rm):
                        bad = 1
                        bad_line = l
                        bad_if = n
                        break
                    for k in range(6):
                        for a in range(nv):
                            acc_f = 0.0
                            acc_u = 0.0
                            for b in range(nv):
                                acc_f = acc_f + Lm[a * nv + b] * F[l, n + k, b]
                                acc_u = acc_u + Lm[a * nv + b] * u[l, n + k, b]
                            cf[k][a] = acc_f
                            cu[k][a] = acc_u
                    for a in range(nv):
                        for k in range(5):
                            sp[k] = 0.5 * (cf[k][a] + alpha * cu[k][a])
                            sm[k] = 0.5 * (cf[5 - k][a] - alpha * cu[5 - k][a])
                        ch[a] = (_reconstruct(sp, kind, eps, p, q, pnet, eps1, buf, buf + width)
                                 + _reconstruct(sm, kind, eps, p, q, pnet, eps1, buf, buf + width))
                    for a in range(nv):
                        acc = 0.0
                        for b in range(nv):
                            acc = acc + Rm[a * nv + b] * ch[b]
                        o[l, n, a] = acc
                if bad:
                    break
    finally:
        free(buf)
    if bad:
        raise ArithmeticError(
            f"Roe-averaged sound speed is not real (line {bad_line}, interface {bad_if})")
    return out
