"""Compiled vs pure-Python walk kernel: throughput and bitwise agreement.

    python benchmarks/bench_walk.py [--steps 200000] [--repeat 3]
"""
from __future__ import annotations

import argparse
import time

import numpy as np

from levylab import _walk_py
from levylab.pathlab import stable_variates

try:
    from levylab import _walk
except ImportError:  # extension not built
    _walk = None


def _run(kernel, incr, nbins, stop_occ):
    state = np.zeros(4)
    occ = np.zeros(nbins)
    t0 = time.perf_counter()
    status, k = kernel(incr, state, occ, 1e-5, 1.5, 2.0, -(nbins // 2 + 0.5) * 0.01, 0.01,
                       nbins // 2, stop_occ, np.inf, 1e12)
    return time.perf_counter() - t0, status, k, state, occ


def main(argv=None) -> int:
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--steps", type=int, default=200_000)
    p.add_argument("--repeat", type=int, default=3)
    p.add_argument("--bins", type=int, default=301)
    args = p.parse_args(argv)

    rng = np.random.default_rng(1)
    incr = (1e-5) ** (1 / 1.5) * stable_variates(rng, 1.5, args.steps)
    kernels = [("python", _walk_py.walk_block)]
    if _walk is not None:
        kernels.insert(0, ("cython", _walk.walk_block))
    results = {}
    for name, fn in kernels:
        best = min(_run(fn, incr, args.bins, -1.0)[0] for _ in range(args.repeat))
        results[name] = _run(fn, incr, args.bins, -1.0)
        print(f"{name:7s} {best * 1e3:9.2f} ms  {args.steps / best / 1e6:8.2f} Msteps/s")
    if len(results) == 2:
        a, b = results["cython"], results["python"]
        same = a[1:3] == b[1:3] and np.array_equal(a[3], b[3]) and np.array_equal(a[4], b[4])
        speed = min(_run(_walk_py.walk_block, incr, args.bins, -1.0)[0] for _ in range(1)) / \
            min(_run(_walk.walk_block, incr, args.bins, -1.0)[0] for _ in range(args.repeat))
        print(f"speedup {speed:.1f}x  bitwise identical: {same}")
        return 0 if same else 1
    print("compiled kernel unavailable; only the fallback was timed")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
