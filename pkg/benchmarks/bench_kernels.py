"""Time the numba and pure-numpy variants of the hot kernels.

    python benchmarks/bench_kernels.py [--repeat N]

Both variants are imported directly, so the ``SUBRK_NUMBA`` flag does not
matter here.  Each row also reports the largest difference between them.
"""

import argparse
import math
import time

import numpy as np

from subrk import kernels
from subrk.models import heisenberg


def _best(fn, repeat):
    fn()  # warm up (jit compilation, caches)
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - t0)
    return min(times), out


def cases():
    rng = np.random.default_rng(0)
    n = 200_000
    r = np.abs(rng.normal(size=n))
    az = np.abs(rng.normal(size=n))
    yield "h1_distance (2e5 points)", kernels.h1_distance_numba, kernels.h1_distance_numpy, (r, az)

    B = heisenberg(1).B
    normals = rng.standard_normal((4096, 256, 2))
    yield ("diffusion_endpoints (4096 x 256 steps)", kernels.diffusion_endpoints_numba,
           kernels.diffusion_endpoints_numpy, (np.zeros(3), normals, 1.0 / 256, B))

    a = rng.uniform(0, 20, 20_000)
    w = rng.uniform(-10, 10, 20_000)
    s, sw = kernels.kernel_nodes(4.0)
    yield "h1_kernel_sum (2e4 points)", kernels.h1_kernel_sum_numba, kernels.h1_kernel_sum_numpy, (a, w, s, sw)


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    bad = []
    print(f"{'kernel':<40} {'numba [ms]':>11} {'numpy [ms]':>11} {'speedup':>8} {'max diff':>10}")
    for name, nb, npy, inputs in cases():
        t_nb, out_nb = _best(lambda: nb(*inputs), args.repeat)
        t_np, out_np = _best(lambda: npy(*inputs), args.repeat)
        diff = float(np.max(np.abs(out_nb - out_np)))
        print(f"{name:<40} {1e3 * t_nb:>11.2f} {1e3 * t_np:>11.2f} {t_np / t_nb:>8.1f} {diff:>10.2g}")
        if not math.isfinite(diff):
            bad.append(name)
    if bad:
        raise SystemExit(f"non-finite output in {bad}")


if __name__ == "__main__":
    main()
