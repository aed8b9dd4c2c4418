"""Compare the compiled and numpy integration kernels on acceptance workloads.

Usage: python3 benchmarks/bench_kernels.py [--repeat N]
"""

import argparse
import time

import numpy as np

from crnhopf import kernels, library
from crnhopf.polyfield import build_vector_field


def workloads():
    f5 = build_vector_field(library.net5(2))
    f6 = build_vector_field(library.net6(2))
    f8 = build_vector_field(library.net8())
    return [
        ("net5 g=2, T=40", f5, np.array([2.5, 0.25, 0.25]), 40.0, False),
        ("net5 g=2, T=40, variational", f5, np.array([2.5, 0.25, 0.25]), 40.0, True),
        ("net6 g=2, T=100", f6, np.array([1.5, 1.0, 1.0]), 100.0, False),
        ("net8, T=200", f8, np.array([0.5, 0.5, 0.3]), 200.0, False),
    ]


def time_one(kernel, fld, x0, T, variational, repeat):
    best = np.inf
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = kernel.integrate(fld.E, fld.C, x0, T, rtol=1e-12, atol=1e-14, variational=variational)
        best = min(best, time.perf_counter() - t0)
    return best, np.asarray(out[2])[: fld.n]


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()
    names = kernels.available()
    if "cython" not in names:
        print("compiled kernel not available; only the numpy kernel is timed")
    print(f"{'workload':34s}" + "".join(f"{n:>12s}" for n in names) + ("   speedup   max |dx|" if len(names) > 1 else ""))
    for label, fld, x0, T, var in workloads():
        times, ends = [], []
        for n in names:
            t, y = time_one(kernels.get(n), fld, x0, T, var, args.repeat)
            times.append(t)
            ends.append(y)
        row = f"{label:34s}" + "".join(f"{t:11.4f}s" for t in times)
        if len(names) > 1:
            row += f"{times[1] / times[0]:9.1f}x   {np.abs(ends[0] - ends[1]).max():.1e}"
        print(row)


if __name__ == "__main__":
    main()
