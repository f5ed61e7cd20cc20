#!/usr/bin/env python3
"""Benchmark the walk-length kernels: compiled extension vs numpy fallback.

Usage: python benchmarks/bench_embed.py [--rows N] [--features K] [--reps R]
"""

import argparse
import importlib.util
import time

import numpy as np

from qwalktree.embed import _pure


def time_kernel(fn, rows, reps, repeats=5):
    best = float("inf")
    result = None
    for _ in range(repeats):
        started = time.perf_counter()
        result = fn(rows, reps)
        best = min(best, time.perf_counter() - started)
    return best, result


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--rows", type=int, default=200_000)
    parser.add_argument("--features", type=int, default=7)
    parser.add_argument("--reps", type=int, default=1)
    args = parser.parse_args()

    rng = np.random.default_rng(0)
    rows = np.ascontiguousarray(rng.normal(size=(args.rows, args.features)) * 3.0)

    print(f"rows={args.rows} features={args.features} reps={args.reps}")

    pure_time, pure_out = time_kernel(_pure.walk_lengths, rows, args.reps)
    print(f"python fallback : {pure_time:8.3f}s  ({args.rows / pure_time:12.0f} rows/s)")

    if importlib.util.find_spec("qwalktree.embed._walkcore") is None:
        print("compiled kernel : not built (pip install -e . rebuilds it)")
        return

    from qwalktree.embed import _walkcore

    core_time, core_out = time_kernel(_walkcore.walk_lengths, rows, args.reps)
    print(f"compiled kernel : {core_time:8.3f}s  ({args.rows / core_time:12.0f} rows/s)")
    print(f"speedup         : {pure_time / core_time:8.2f}x")
    print(f"max |difference|: {np.abs(np.asarray(core_out) - pure_out).max():.3e}")


if __name__ == "__main__":
    main()
