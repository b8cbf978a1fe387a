#!/usr/bin/env python3
"""Benchmark the assignment kernel backends (compiled vs pure numpy) and the
anchor-search scaling that the compiled path supports.

Usage: python benchmarks/bench_assignment.py [--sizes 50,100,200,400] [--trials 5]
"""

import argparse
import time

import numpy as np

from anchorpad import _lap_py, lap
from anchorpad.anchor import WalkConfig, default_anchor_count, select_anchors
from anchorpad.data import apply_corruption, generate_synthetic, make_corruption_plan

try:
    from anchorpad import _lap_cy
except ImportError:
    _lap_cy = None


def time_backend(kernel, cost, trials):
    times = []
    for _ in range(trials):
        start = time.perf_counter()
        kernel.solve_square(cost)
        times.append(time.perf_counter() - start)
    return min(times)


def bench_assignment(sizes, trials, rng):
    print(f"assignment kernel (active backend: {lap.BACKEND})")
    header = f"{'n':>6} {'pure numpy':>12} {'cython':>12} {'speedup':>9}"
    print(header)
    print("-" * len(header))
    for n in sizes:
        cost = rng.random((n, n))
        t_py = time_backend(_lap_py, cost, trials)
        if _lap_cy is not None:
            t_cy = time_backend(_lap_cy, cost, trials)
            col_py, _, _ = _lap_py.solve_square(cost)
            col_cy, _, _ = _lap_cy.solve_square(cost)
            assert np.array_equal(col_py, col_cy), "backends disagree"
            print(f"{n:>6} {t_py*1e3:>10.2f}ms {t_cy*1e3:>10.2f}ms {t_py/t_cy:>8.1f}x")
        else:
            print(f"{n:>6} {t_py*1e3:>10.2f}ms {'n/a':>12} {'n/a':>9}")


def bench_anchor_search(trials):
    print("\nanchor search wall clock (full pipeline stage)")
    header = f"{'n':>6} {'median':>10} {'ratio':>7}"
    print(header)
    print("-" * len(header))
    previous = None
    for n in (500, 1000, 2000, 4000):
        ds = generate_synthetic(3, n, (10, 15), 6.0, seed=1)
        corrupted = apply_corruption(ds, make_corruption_plan(ds, 1.0, 0.0, seed=2))
        n_a = default_anchor_count(3, n)
        times = []
        for _ in range(trials):
            start = time.perf_counter()
            select_anchors(corrupted, n_a, WalkConfig(seed=3))
            times.append(time.perf_counter() - start)
        median = float(np.median(times))
        ratio = "" if previous is None else f"{median/previous:>6.2f}x"
        print(f"{n:>6} {median*1e3:>8.1f}ms {ratio:>7}")
        previous = median


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--sizes", default="50,100,200,400", help="comma-separated square sizes")
    parser.add_argument("--trials", type=int, default=5)
    args = parser.parse_args()
    sizes = [int(tok) for tok in args.sizes.split(",")]
    rng = np.random.default_rng(0)
    bench_assignment(sizes, args.trials, rng)
    bench_anchor_search(args.trials)


if __name__ == "__main__":
    main()
