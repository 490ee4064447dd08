"""Benchmark the compiled kernels against their pure-Python twins.

Run as: python benchmarks/bench_kernels.py [--repeats N]

The compiled extension covers the three hot scalar kernels (interval
lengths, 2-D clipping, signed power sums); the 3-D clipper stays in Python
because its runtime is dominated by small-list geometry bookkeeping that
gains little from static typing (numbers below include it for reference).
"""

import argparse
import time

import numpy as np

from margbounds.kernels import backends


def _time(fn, args_list, repeats):
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        for args in args_list:
            fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best


def make_cases(rng, count):
    intervals = []
    polygons = []
    polytopes = []
    irwin = []
    for _ in range(count):
        m = int(rng.integers(2, 7))
        w1 = rng.normal(size=m)
        hi = np.abs(rng.normal(size=m)) + 0.1
        intervals.append((w1, -hi, hi))
        w2 = rng.normal(size=(m, 2))
        polygons.append((w2, -hi, hi))
        w3 = rng.normal(size=(max(m, 3), 3))
        hi3 = np.abs(rng.normal(size=max(m, 3))) + 0.1
        polytopes.append((w3, -hi3, hi3))
        n = int(rng.integers(4, 13))
        c = np.abs(rng.normal(size=n)) + 0.05
        irwin.append((c, 0.5 * c.sum()))
    return {
        "interval_length": intervals,
        "polygon_area": polygons,
        "polytope_volume": polytopes,
        "irwin_hall_at": irwin,
    }


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("--repeats", type=int, default=5)
    parser.add_argument("--cases", type=int, default=2000)
    args = parser.parse_args()

    impls = backends()
    if "compiled" not in impls:
        print("compiled backend not available; nothing to compare")
        return
    rng = np.random.default_rng(0)
    cases = make_cases(rng, args.cases)
    print(f"{args.cases} cases per kernel, best of {args.repeats} repeats\n")
    print(f"{'kernel':<18}{'pure (ms)':>12}{'compiled (ms)':>15}{'speedup':>10}")
    for name, case_list in cases.items():
        pure_fn = getattr(impls["pure"], name, None)
        comp_fn = getattr(impls["compiled"], name, None)
        t_pure = _time(pure_fn, case_list, args.repeats) * 1e3
        if comp_fn is None:
            print(f"{name:<18}{t_pure:>12.2f}{'(python only)':>15}{'':>10}")
            continue
        t_comp = _time(comp_fn, case_list, args.repeats) * 1e3
        print(f"{name:<18}{t_pure:>12.2f}{t_comp:>15.2f}{t_pure / t_comp:>9.1f}x")


if __name__ == "__main__":
    main()
