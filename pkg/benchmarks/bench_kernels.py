"""Time each hot kernel under the numba and pure-numpy backends.

Usage: python benchmarks/bench_kernels.py [--repeat 5] [--steps 200000] [--n 1000]
"""
import argparse
import math
import timeit

import numpy as np

from tfrw import _kernels


def cases(steps, n):
    rng = np.random.default_rng(0)
    K = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    w = rng.uniform(size=n)
    h = rng.normal(size=n) + 1j * rng.normal(size=n)
    a = np.geomspace(0.1, 10, n)
    log_s = math.log(2.0)
    return {
        "verlet": lambda b: b.verlet(1.0, 0.0, 0.0, 1e-3, steps, math.pi / 2, 0.0, 0.0),
        "rk4": lambda b: b.rk4(1.0, 0.0, 0.0, 1e-3, steps, math.pi / 2, 0.0, 0.0),
        "weighted_matvec": lambda b: b.weighted_matvec(K, w, h),
        "log_gaussian_kernel": lambda b: b.log_gaussian_kernel(a, a, log_s, 0.3),
    }


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeat", type=int, default=5)
    parser.add_argument("--steps", type=int, default=200_000, help="integrator steps")
    parser.add_argument("--n", type=int, default=1000, help="grid size for matrix kernels")
    args = parser.parse_args(argv)

    backends = {"numba": _kernels.NUMBA, "numpy": _kernels.NUMPY}
    print(f"{'kernel':<22}{'numba [ms]':>12}{'numpy [ms]':>12}{'speedup':>10}")
    for name, fn in cases(args.steps, args.n).items():
        best = {}
        for label, b in backends.items():
            fn(b)  # warm-up, includes JIT compilation
            best[label] = min(timeit.repeat(lambda: fn(b), number=1, repeat=args.repeat)) * 1e3
        print(f"{name:<22}{best['numba']:>12.2f}{best['numpy']:>12.2f}"
              f"{best['numpy'] / best['numba']:>10.1f}")


if __name__ == "__main__":
    main()
