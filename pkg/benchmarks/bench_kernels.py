#!/usr/bin/env python3
"""Benchmark the compiled ranking kernels against the pure-numpy fallback.

Runs the two batch kernels and one end-to-end reference simulation at a
few problem sizes and prints a timing table. The compiled backend must be
importable (install with the extension built) for the comparison column.
"""

import argparse
import time

import numpy as np

from dpht import _kernels_py
from dpht.inference import kwabs_from_rank_sums, near_equal_sizes

try:
    from dpht import _kernels

    HAVE_COMPILED = True
except ImportError:
    _kernels = None
    HAVE_COMPILED = False


def _time(fn, *args, repeat=3):
    best = float("inf")
    for _ in range(repeat):
        start = time.perf_counter()
        fn(*args)
        best = min(best, time.perf_counter() - start)
    return best


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--reps", type=int, default=20000, help="replicates per case")
    args = parser.parse_args()

    rng = np.random.default_rng(7)
    cases = [(args.reps, 30, 3), (args.reps, 100, 3), (args.reps, 500, 2)]

    print(f"compiled backend available: {HAVE_COMPILED}")
    print(f"{'kernel':<22}{'z':>8}{'n':>6}{'python s':>11}{'compiled s':>12}{'speedup':>9}")
    for z, n, g in cases:
        u = rng.random((z, n))
        sizes = near_equal_sizes(n, g)
        t_py = _time(_kernels_py.group_rank_sums, u, sizes)
        if HAVE_COMPILED:
            t_c = _time(_kernels.group_rank_sums, u, sizes)
            same = np.array_equal(
                _kernels.group_rank_sums(u, sizes), _kernels_py.group_rank_sums(u, sizes)
            )
            assert same, "backend results differ"
            print(f"{'group_rank_sums':<22}{z:>8}{n:>6}{t_py:>11.4f}{t_c:>12.4f}{t_py / t_c:>9.2f}")
        else:
            print(f"{'group_rank_sums':<22}{z:>8}{n:>6}{t_py:>11.4f}{'-':>12}{'-':>9}")

        d = rng.standard_normal((z, n))
        d[rng.random((z, n)) < 0.2] = 0.0
        t_py = _time(_kernels_py.signed_rank_sums, d)
        if HAVE_COMPILED:
            t_c = _time(_kernels.signed_rank_sums, d)
            same = np.array_equal(_kernels.signed_rank_sums(d), _kernels_py.signed_rank_sums(d))
            assert same, "backend results differ"
            print(f"{'signed_rank_sums':<22}{z:>8}{n:>6}{t_py:>11.4f}{t_c:>12.4f}{t_py / t_c:>9.2f}")
        else:
            print(f"{'signed_rank_sums':<22}{z:>8}{n:>6}{t_py:>11.4f}{'-':>12}{'-':>9}")

    # End to end: one absolute-value Kruskal-Wallis null simulation.
    z, n, g = args.reps, 150, 3
    u = rng.random((z, n))
    sizes = near_equal_sizes(n, g)

    def end_to_end(kernels):
        kwabs_from_rank_sums(kernels.group_rank_sums(u, sizes), sizes, n)

    t_py = _time(end_to_end, _kernels_py)
    if HAVE_COMPILED:
        t_c = _time(end_to_end, _kernels)
        print(f"{'kwabs null sim':<22}{z:>8}{n:>6}{t_py:>11.4f}{t_c:>12.4f}{t_py / t_c:>9.2f}")
    else:
        print(f"{'kwabs null sim':<22}{z:>8}{n:>6}{t_py:>11.4f}{'-':>12}{'-':>9}")


if __name__ == "__main__":
    main()
