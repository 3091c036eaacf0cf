"""Time the compiled kernels against their NumPy fallbacks.

    python benchmarks/bench_kernels.py [--repeat 5] [--json out.json]

Each case reports the best of ``--repeat`` runs per backend and the
speed-up of the compiled version. The end-to-end rows run a full
20-restart k-means with the backend swapped in.
"""
import argparse
import json
import sys
import time

import numpy as np

from ihgmm import _pykernels, kernels
from ihgmm.cluster import KMeansConfig, kmeans


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def lloyd_case(n, d, K, seed=0):
    rng = np.random.default_rng(seed)
    centers = rng.normal(scale=3.0, size=(K, d))
    X = centers[rng.integers(K, size=n)] + rng.normal(size=(n, d))
    init = X[rng.choice(n, K, replace=False)].copy()
    return lambda mod: mod.lloyd(X, init.copy(), 300, 1e-9)


def jacobi_case(n, seed=0):
    A = np.random.default_rng(seed).normal(size=(n, n))
    A = A + A.T
    return lambda mod: mod.jacobi_eigh(A, 100, 1e-14)


def kmeans_case(n, d, K, seed=0):
    rng = np.random.default_rng(seed)
    centers = rng.normal(scale=3.0, size=(K, d))
    X = centers[rng.integers(K, size=n)] + rng.normal(size=(n, d))

    def run(mod):
        saved = kernels.lloyd
        kernels.lloyd = mod.lloyd
        try:
            kmeans(X, K, KMeansConfig(), rng=1)
        finally:
            kernels.lloyd = saved

    return run


CASES = [
    ("lloyd n=500 d=3 K=3", lloyd_case(500, 3, 3)),
    ("lloyd n=2500 d=4 K=4", lloyd_case(2500, 4, 4)),
    ("lloyd n=7500 d=10 K=10", lloyd_case(7500, 10, 10)),
    ("lloyd n=2500 d=200 K=4", lloyd_case(2500, 200, 4)),
    ("jacobi n=50", jacobi_case(50)),
    ("jacobi n=150", jacobi_case(150)),
    ("kmeans x20 n=500 d=3 K=3", kmeans_case(500, 3, 3)),
    ("kmeans x20 n=7500 d=10 K=10", kmeans_case(7500, 10, 10)),
]


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--json", help="also write results here")
    args = ap.parse_args(argv)
    compiled = kernels.compiled_backend
    if compiled is None:
        print("compiled extension not available; build it with `pip install -e . --no-build-isolation`")
        return 1
    rows = []
    print(f"{'case':<30}{'cython [ms]':>13}{'python [ms]':>13}{'speed-up':>10}")
    for name, case in CASES:
        tc = best_of(lambda: case(compiled), args.repeat)
        tp = best_of(lambda: case(_pykernels), args.repeat)
        rows.append({"case": name, "cython_s": tc, "python_s": tp, "speedup": tp / tc})
        print(f"{name:<30}{tc * 1e3:>13.2f}{tp * 1e3:>13.2f}{tp / tc:>9.1f}x")
    if args.json:
        with open(args.json, "w", encoding="utf-8") as fh:
            json.dump(rows, fh, indent=2)
    return 0


if __name__ == "__main__":
    sys.exit(main())
