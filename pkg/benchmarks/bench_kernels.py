"""Benchmark the compiled convolution core against the pure-numpy fallback.

The punctured cyclic convolution behind kernel_apply is the O(N^{2d}) hot
loop of the lattice-sum route; everything else in the package is FFT-bound.
Run:  python3 benchmarks/bench_kernels.py [--n 32 64 128] [--repeat 3]
"""

import argparse
import time

import numpy as np

from frakolm import _kernels_py

try:
    from frakolm import _kernels

    HAVE_COMPILED = True
except ImportError:
    HAVE_COMPILED = False

from frakolm.grid import TorusGrid, norm_inf
from frakolm.kernel import periodized_kernel_table
from frakolm.spectral import fractional_laplacian, plane_wave


def time_call(fn, *args, repeat=3):
    best = float("inf")
    out = None
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best, out


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--n", type=int, nargs="+", default=[32, 64, 128])
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--alpha", type=float, default=1.5)
    args = ap.parse_args()

    print(f"{'N':>5} {'ops':>12} {'python':>10} {'compiled':>10} {'speedup':>8}  max|diff|")
    for N in args.n:
        grid = TorusGrid(d=2, N=N)
        table, _ = periodized_kernel_table(2, N, args.alpha, 6)
        u = np.ascontiguousarray(plane_wave(grid, (2, 1)).values)

        t_py, out_py = time_call(_kernels_py.convolve, table, u, repeat=args.repeat)
        if HAVE_COMPILED:
            t_c, out_c = time_call(_kernels.convolve, table, u, repeat=args.repeat)
            diff = np.abs(out_c - out_py).max()
            print(
                f"{N:>5} {N**4:>12} {t_py*1e3:>9.1f}ms {t_c*1e3:>9.1f}ms "
                f"{t_py/t_c:>7.1f}x  {diff:.2e}"
            )
        else:
            print(f"{N:>5} {N**4:>12} {t_py*1e3:>9.1f}ms {'n/a':>10} {'n/a':>8}")

    # sanity: the kernel route agrees with the spectral oracle either way
    grid = TorusGrid(d=2, N=64)
    from frakolm.kernel import kernel_apply

    u = plane_wave(grid, (1, 0))
    exact = fractional_laplacian(u, args.alpha)
    got = kernel_apply(u, args.alpha, 6)
    rel = np.abs(got.values - exact.values).max() / norm_inf(exact)
    backend = "compiled" if HAVE_COMPILED else "pure-python"
    print(f"\nkernel/spectral agreement at N=64 ({backend} backend): {rel:.2e}")


if __name__ == "__main__":
    main()
