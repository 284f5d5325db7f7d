"""Benchmark the eigenphase kernel: numba JIT vs pure-numpy batched LAPACK.

Two workloads mirror the solver's cost profile: a long scan evaluated in
one batch, and the refinement loop's stream of single-point calls.

    python benchmarks/bench_kernels.py [--repeat 5]
"""

import argparse
import math
import time

import numpy as np

from qgraph import kernels
from qgraph.presets import gue_numerics_window, preset
from qgraph.solver import bond_basis


def time_call(fn, repeat):
    best = math.inf
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("--repeat", type=int, default=5)
    args = parser.parse_args()

    graph = preset("gue").graph
    lengths, chis, smat = bond_basis(graph)
    k_lo, k_hi = gue_numerics_window(graph)
    step = math.pi / (8.0 * graph.total_length)
    scan = np.arange(k_lo, k_hi, step)
    singles = np.linspace(k_lo, k_hi, 2000)

    paths = [("numpy", kernels.eigenphases_numpy)]
    if kernels.eigenphases_numba is not None:
        kernels.eigenphases_numba(scan[:4], lengths, chis, smat)  # JIT warmup
        paths.append(("numba", kernels.eigenphases_numba))
    else:
        print("numba unavailable; benchmarking the numpy path only")

    print(f"scan batch: {scan.size} points, matrix dim {smat.shape[0]}")
    results = {}
    for name, fn in paths:
        t = time_call(lambda: fn(scan, lengths, chis, smat), args.repeat)
        results[name] = t
        print(f"  {name:6s} {t * 1e3:8.2f} ms  ({t / scan.size * 1e6:.1f} us/point)")

    print(f"single-point calls: {singles.size} sequential evaluations")
    for name, fn in paths:
        t = time_call(
            lambda: [fn(np.array([k]), lengths, chis, smat) for k in singles],
            args.repeat,
        )
        results[name + "_single"] = t
        print(f"  {name:6s} {t * 1e3:8.2f} ms  ({t / singles.size * 1e6:.1f} us/call)")

    if "numba" in results:
        print(
            f"speedup numba/numpy: batch {results['numpy'] / results['numba']:.2f}x, "
            f"single {results['numpy_single'] / results['numba_single']:.2f}x"
        )
        a = np.sort(kernels.eigenphases_numpy(singles, lengths, chis, smat), axis=1)
        b = np.sort(kernels.eigenphases_numba(singles, lengths, chis, smat), axis=1)
        print(f"max phase difference between paths: {np.abs(a - b).max():.2e}")


if __name__ == "__main__":
    main()
