#!/usr/bin/env python3
"""Benchmark the compiled accelerator kernels against the numpy fallback.

Run after an editable install:

    python3 benchmarks/bench_kernels.py

The same arrays go through misodetect._accel._speedups (Cython) and
misodetect._accel._fallback (numpy); results are checked for agreement
before timing.
"""

import time

import numpy as np

from misodetect._accel import _fallback

try:
    from misodetect._accel import _speedups
except ImportError:
    _speedups = None


def timeit(fn, *args, repeats=3):
    best = float("inf")
    for _ in range(repeats):
        start = time.perf_counter()
        out = fn(*args)
        best = min(best, time.perf_counter() - start)
    return best, out


def bench_shapley():
    print("shapley_combine (full 2^n table -> n Shapley values)")
    print(f"{'n':>4} {'numpy':>12} {'cython':>12} {'speedup':>9}")
    rng = np.random.default_rng(0)
    for n in (10, 14, 18, 20):
        values = rng.normal(size=1 << n)
        t_py, out_py = timeit(_fallback.shapley_combine, values, n)
        if _speedups is None:
            print(f"{n:>4} {t_py * 1e3:>10.2f}ms {'-':>12} {'-':>9}")
            continue
        t_cy, out_cy = timeit(_speedups.shapley_combine, values, n)
        assert np.allclose(out_py, out_cy, atol=1e-10)
        print(f"{n:>4} {t_py * 1e3:>10.2f}ms {t_cy * 1e3:>10.2f}ms {t_py / t_cy:>8.1f}x")


def bench_signed_rank():
    print()
    print("signed_rank_counts (exact W+ distribution over 2^m signs)")
    print(f"{'m':>4} {'numpy':>12} {'cython':>12} {'speedup':>9}")
    rng = np.random.default_rng(1)
    for m in (10, 25, 100, 400):
        # doubled mid-ranks of a typical tied sample
        ranks = np.sort(rng.integers(1, 2 * m + 1, size=m)) * 2
        t_py, out_py = timeit(_fallback.signed_rank_counts, ranks)
        if _speedups is None:
            print(f"{m:>4} {t_py * 1e3:>10.2f}ms {'-':>12} {'-':>9}")
            continue
        t_cy, out_cy = timeit(_speedups.signed_rank_counts, ranks)
        assert np.array_equal(out_py, out_cy)
        print(f"{m:>4} {t_py * 1e3:>10.2f}ms {t_cy * 1e3:>10.2f}ms {t_py / t_cy:>8.1f}x")


if __name__ == "__main__":
    if _speedups is None:
        print("compiled backend not available; timing fallback only\n")
    bench_shapley()
    bench_signed_rank()
