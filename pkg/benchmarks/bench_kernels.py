#!/usr/bin/env python3
"""Throughput comparison of the grid kernels: numba JIT vs pure numpy.

Workload mirrors the brute-force oracle: tabulate quadratic costs over a
dense cartesian grid, then scan every profile for improving unilateral
deviations.  The first numba call includes JIT compilation; it is timed
separately as warmup.

Run:  python benchmarks/bench_kernels.py [--points 201] [--repeat 5]
"""

import argparse
import time

import numpy as np

from incentive_audit.expr import parse
from incentive_audit.expr.polynomial import as_polynomial
from incentive_audit.solve import kernels

CASES = {
    "2 agents": (["u1", "u2"],
                 ["u1^2 - 2*u1*u2", "u1*u2 - u2"],
                 ["(u1 - 3/4)^2 + (u2 - 2)^2"]),
    "3 agents": (["u1", "u2", "u3"],
                 ["u1^2 + u1*u2 - u1", "u2^2 - u2*u3", "u3^2 + u1*u3 + u3"],
                 ["(u1 - 1)^2 + (u2 + 1)^2 + (u3 - 1/2)^2"]),
}


def _grid(names, points):
    # keep the 3-agent case at a sane memory footprint
    per_axis = points if len(names) == 2 else min(points, 61)
    return [np.linspace(-2.0, 2.0, per_axis) for _ in names]


def bench(fn, repeat):
    best = float("inf")
    for _ in range(repeat):
        start = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - start)
    return best


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--points", type=int, default=201)
    parser.add_argument("--repeat", type=int, default=5)
    args = parser.parse_args()

    backends = ["numpy"]
    if kernels.HAVE_NUMBA:
        backends.insert(0, "numba")
    else:
        print("numba not importable; benchmarking the numpy backend only")

    print(f"{'case':<24} {'kernel':<16} " +
          " ".join(f"{b:>12}" for b in backends) + f" {'speedup':>9}")
    for label, (names, cost_texts, objective) in CASES.items():
        n = len(names)
        axes = _grid(names, args.points)
        exprs = [parse(t, names) for t in cost_texts + objective]
        tables = {}

        arrays = [as_polynomial(e).to_arrays(n) for e in exprs]
        timings = {}
        for backend in backends:
            def run_eval(backend=backend):
                return [kernels.poly_grid_eval(c, x, axes, backend=backend)
                        for c, x in arrays]

            if backend == "numba":
                run_eval()  # JIT warmup, excluded from timing
            tables[backend] = np.stack(run_eval()[:n])
            timings[backend] = bench(run_eval, args.repeat)
        _report(label, "poly_grid_eval", backends, timings)

        timings = {}
        for backend in backends:
            def run_mask(backend=backend):
                return kernels.pure_nash_mask(tables[backend],
                                              backend=backend)

            if backend == "numba":
                run_mask()
            timings[backend] = bench(run_mask, args.repeat)
        _report(label, "pure_nash_mask", backends, timings)

    if len(backends) == 2:
        a = np.stack([kernels.poly_grid_eval(c, x, _grid(["a", "b"], 51),
                                             backend="numba")
                      for c, x in arrays[:2]])
        b = np.stack([kernels.poly_grid_eval(c, x, _grid(["a", "b"], 51),
                                             backend="numpy")
                      for c, x in arrays[:2]])
        assert np.allclose(a, b, rtol=1e-13, atol=1e-13)
        print("\nbackends agree (checked to 1e-13)")


def _report(label, kernel, backends, timings):
    cells = " ".join(f"{timings[b] * 1e3:>10.2f}ms" for b in backends)
    speedup = ""
    if len(backends) == 2:
        ratio = timings["numpy"] / timings["numba"]
        speedup = f"{ratio:>8.1f}x"
    print(f"{label:<24} {kernel:<16} {cells} {speedup}")


if __name__ == "__main__":
    main()
