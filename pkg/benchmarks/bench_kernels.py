#!/usr/bin/env python3
"""Benchmark the compiled kernel core against the pure-numpy fallback.

Times the hot paths: self-delayed table builds, a full coupled-pair
calibration, batched table queries, and the headline bound quadrature.
Both backends produce bit-identical tables; this script reports wall time
only.  Usage: python3 benchmarks/bench_kernels.py [--repeat N]
"""

import argparse
import tempfile
import time

import numpy as np

from sievekit import backend, buchstab, dde, dhr
from sievekit.bound import BoundParams, BoundTables, compute_bound


def timed(fn, repeat):
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def bench_buchstab_build():
    prob = dde.DelayProblem(power=1.0, delay=1.0, sign=1.0,
                            initial=dde.InitialSegment.recip(1.0, 2.0))
    dde.solve_dde(prob, dde.GridSpec(2.0, 64.0, 2.0 ** -10))


def bench_sigma_build():
    dhr._sigma_memo.clear()
    dhr.sigma_table(3)


def bench_calibrate_k3():
    dhr._sigma_memo.clear()
    dhr._shoot(3, dhr.default_u_max(3), dde.DEFAULT_STEP)


_query_table = None


def bench_query_1m():
    global _query_table
    if _query_table is None:
        prob = dde.DelayProblem(power=1.0, delay=1.0, sign=1.0,
                                initial=dde.InitialSegment.recip(1.0, 2.0))
        _query_table = dde.solve_dde(prob, dde.GridSpec(2.0, 64.0, 2.0 ** -10))
    us = np.linspace(1.0, 64.0, 1_000_000)
    _query_table.query_many(us)


def make_bench_bound(cache_dir):
    tables = BoundTables(3, 16.0, cache_dir=cache_dir)

    def run():
        compute_bound(BoundParams(3, 2.0, 12.0), cache_dir=cache_dir,
                      tables=tables)

    return run


BENCHES = [
    ("buchstab table [2,64], h=2^-10", bench_buchstab_build),
    ("sigma_3 table build", bench_sigma_build),
    ("DHR k=3 calibration (cold)", bench_calibrate_k3),
    ("1e6 table queries", bench_query_1m),
]


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()

    names = backend.available()
    if "compiled" not in names:
        print("compiled backend not built; timing the pure backend only")

    with tempfile.TemporaryDirectory() as cache_dir:
        # warm the disk cache once so the bound bench measures quadrature
        backend.use("auto")
        bound_bench = make_bench_bound(cache_dir)
        bound_bench()
        benches = BENCHES + [("bound quadrature (warm tables)", bound_bench)]

        results = {}
        for name in names:
            backend.use(name)
            global _query_table
            _query_table = None
            results[name] = [timed(fn, args.repeat) for _, fn in benches]
        backend.use("auto")

    width = max(len(label) for label, _ in benches)
    header = f"{'benchmark'.ljust(width)}  " + "".join(
        f"{n:>12}" for n in names
    )
    if len(names) == 2:
        header += f"{'speedup':>10}"
    print(header)
    print("-" * len(header))
    for i, (label, _) in enumerate(benches):
        row = label.ljust(width) + "  "
        row += "".join(f"{results[n][i] * 1e3:>10.2f}ms" for n in names)
        if len(names) == 2:
            pure_t = results["pure"][i]
            comp_t = results["compiled"][i]
            row += f"{pure_t / comp_t:>9.2f}x"
        print(row)


if __name__ == "__main__":
    main()
