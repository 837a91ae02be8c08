"""Compare the compiled and numpy Green-function kernels.

    python benchmarks/bench_kernels.py [--sizes 256 512 1024] [--repeat 5]

Times the half-space kernel (value and gradient, direct minus image) on N x N
target/source sets, then a full operator assembly of a 0.2-disk with each
backend, and reports the largest difference between the two.
"""
from __future__ import annotations

import argparse
import time

import numpy as np

from metaimpedance import kernels
from metaimpedance.geometry import make_disk
from metaimpedance.operators import assemble_np, assemble_single_layer


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def main():
    ap = argparse.ArgumentParser(description="compiled vs numpy kernel timings")
    ap.add_argument("--sizes", type=int, nargs="+", default=[256, 512, 1024])
    ap.add_argument("--nodes", type=int, default=512, help="boundary nodes for the assembly timing")
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()

    backends = ["numpy"] + (["cython"] if kernels._load_compiled() is not None else [])
    if len(backends) == 1:
        print("compiled backend unavailable; timing the numpy kernel only")
    rng = np.random.default_rng(0)

    print(f"{'N':>6} " + " ".join(f"{b + ' [ms]':>13}" for b in backends) + f" {'speedup':>8} {'max diff':>9}")
    for n in args.sizes:
        tx, ty = rng.uniform(-0.5, 0.5, n), rng.uniform(0.05, 1.0, n)
        sx, sy = rng.uniform(-0.5, 0.5, n), rng.uniform(0.05, 1.0, n)
        times, outs = [], []
        for b in backends:
            with kernels.use_backend(b):
                times.append(best_of(lambda: kernels.halfspace_pair(tx, ty, sx, sy), args.repeat))
                outs.append(kernels.halfspace_pair(tx, ty, sx, sy))
        line = f"{n:>6} " + " ".join(f"{1e3 * t:>13.2f}" for t in times)
        if len(backends) == 2:
            diff = max(float(np.max(np.abs(a - b))) for a, b in zip(*outs))
            line += f" {times[0] / times[1]:>8.2f} {diff:>9.1e}"
        print(line)

    disk = make_disk((0.0, 0.5), 0.2, args.nodes)
    print(f"\nassembly of S and K* for a 0.2-disk, n = {args.nodes}:")
    mats = []
    for b in backends:
        with kernels.use_backend(b):
            t = best_of(lambda: (assemble_single_layer(disk), assemble_np(disk)), max(1, args.repeat // 2))
            mats.append((assemble_single_layer(disk), assemble_np(disk)))
        print(f"  {b:>7}: {1e3 * t:8.1f} ms")
    if len(mats) == 2:
        diff = max(float(np.max(np.abs(a - b))) for a, b in zip(*mats))
        print(f"  max entry difference: {diff:.1e}")


if __name__ == "__main__":
    main()
