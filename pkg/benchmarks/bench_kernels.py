"""Compare the numba and pure-numpy subset-enumeration kernels.

    python3 benchmarks/bench_kernels.py [--repeat 2]

Each case is timed on both paths after one warm-up call (which also covers
numba compilation), and the results of the two paths are checked to agree.
"""
import argparse
import time
from math import comb

import numpy as np

from ssmp import _accel, _kernels
from ssmp.linalg import EPS

CASES = [
    ("gram_extremes", 8, 12, 4),
    ("gram_extremes", 12, 20, 5),
    ("gram_extremes", 16, 24, 6),
    ("all_full_rank", 8, 16, 8),
    ("all_full_rank", 10, 20, 10),
]


def run(kernel, A, k):
    if kernel == "gram_extremes":
        return _kernels.gram_extremes(A, k)
    return _kernels.all_full_rank(A, k, EPS)


def timed(kernel, A, k, use_numba, repeat):
    _accel.USE_NUMBA = use_numba
    out = run(kernel, A, k)
    best = np.inf
    for _ in range(repeat):
        t0 = time.perf_counter()
        run(kernel, A, k)
        best = min(best, time.perf_counter() - t0)
    return out, best


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeat", type=int, default=2)
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args(argv)
    if not _accel.HAS_NUMBA:
        print("numba unavailable (or disabled); only the numpy path can be timed")
    rng = np.random.default_rng(args.seed)
    print(f"{'kernel':<15}{'m':>4}{'n':>4}{'k':>4}{'subsets':>10}{'numpy s':>10}{'numba s':>10}{'speedup':>9}")
    for kernel, m, n, k in CASES:
        A = rng.standard_normal((m, n)) / np.sqrt(m)
        ref, t_np = timed(kernel, A, k, False, args.repeat)
        if _accel.HAS_NUMBA:
            got, t_nb = timed(kernel, A, k, True, args.repeat)
            assert np.allclose(ref, got, atol=1e-12), (kernel, ref, got)
            speed = f"{t_np / t_nb:8.1f}x"
            nb = f"{t_nb:10.4f}"
        else:
            nb, speed = f"{'-':>10}", f"{'-':>9}"
        print(f"{kernel:<15}{m:>4}{n:>4}{k:>4}{comb(n, k):>10}{t_np:10.4f}{nb}{speed}", flush=True)
    _accel.USE_NUMBA = _accel.HAS_NUMBA


if __name__ == "__main__":
    main()
