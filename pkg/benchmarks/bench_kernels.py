"""Compare the compiled and NumPy kernel backends.

Run with ``python benchmarks/bench_kernels.py [--repeat N]``.
"""

import argparse
import time

import numpy as np

from wenonn import kernels
from wenonn.nn import init_network
from wenonn.solver import prim_to_cons

# (kind, eps, p, q) for WENO5-JS and WENO5-Z
JS = (1, 1e-6, 2.0, 1.0)
Z = (2, 1e-40, 2.0, 1.0)


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        start = time.perf_counter()
        fn()
        times.append(time.perf_counter() - start)
    return min(times)


def cases(rng):
    S = rng.normal(size=(200_000, 5))
    net = init_network(seed=0).packed
    prim = np.empty((1, 4005, 3))
    prim[..., 0] = rng.uniform(0.5, 2.0, prim.shape[:2])
    prim[..., 1] = rng.uniform(-1.0, 1.0, prim.shape[:2])
    prim[..., 2] = rng.uniform(0.5, 3.0, prim.shape[:2])
    U1 = prim_to_cons(prim, 1.4)
    prim2 = np.empty((64, 69, 4))
    prim2[..., 0] = rng.uniform(0.5, 2.0, prim2.shape[:2])
    prim2[..., 1:3] = rng.uniform(-1.0, 1.0, prim2.shape[:2] + (2,))
    prim2[..., 3] = rng.uniform(0.5, 3.0, prim2.shape[:2])
    U2 = prim_to_cons(prim2, 1.4)
    return [
        ("reconstruct JS, 2e5 stencils", lambda b: b.reconstruct(S, *JS), S.shape[0]),
        ("reconstruct Z, 2e5 stencils", lambda b: b.reconstruct(S, *Z), S.shape[0]),
        ("reconstruct Z-NN, 2e5 stencils", lambda b: b.reconstruct(S, *Z, net, 1e-30), S.shape[0]),
        ("euler_flux 1D Z, 4000 interfaces", lambda b: b.euler_flux(U1, 1.4, 5.0, *Z), 4000),
        ("euler_flux 2D Z, 64 lines x 64", lambda b: b.euler_flux(U2, 1.4, 5.0, *Z), 64 * 64),
    ]


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    py = kernels.get_backend("python")
    try:
        cy = kernels.get_backend("cython")
    except ImportError:
        cy = None
        print("compiled extension not built; timing the NumPy backend only")
    rng = np.random.default_rng(0)
    print(f"{'case':36s} {'numpy':>12s} {'cython':>12s} {'speedup':>8s}")
    for name, fn, n in cases(rng):
        tp = best_of(lambda: fn(py), args.repeat)
        if cy is None:
            print(f"{name:36s} {tp * 1e3:10.2f}ms")
            continue
        tc = best_of(lambda: fn(cy), args.repeat)
        print(f"{name:36s} {tp * 1e3:10.2f}ms {tc * 1e3:10.2f}ms {tp / tc:7.1f}x"
              f"   ({tc / n * 1e9:.0f} ns/item compiled)")


if __name__ == "__main__":
    main()
