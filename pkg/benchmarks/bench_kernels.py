"""Benchmark the compiled SGD kernel against the pure-Python fallback.

Usage: python benchmarks/bench_kernels.py [--rows N] [--dims D] [--epochs E]
"""

import argparse
import time

import numpy as np

from swarmids._kernels import available_backends


def bench(epoch_fn, x, y, lam, t0, epochs, seed):
    rng = np.random.default_rng(seed)
    w = np.zeros(x.shape[1])
    b, t = 0.0, 0
    start = time.perf_counter()
    for _ in range(epochs):
        order = rng.permutation(x.shape[0]).astype(np.int64)
        b, t = epoch_fn(x, y, order, w, b, lam, t0, t)
    elapsed = time.perf_counter() - start
    return elapsed, w, b


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--rows", type=int, default=20000)
    parser.add_argument("--dims", type=int, default=20)
    parser.add_argument("--epochs", type=int, default=5)
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args()

    rng = np.random.default_rng(args.seed)
    x = np.ascontiguousarray(rng.uniform(0, 1, (args.rows, args.dims)))
    y = np.where(rng.random(args.rows) < 0.5, -1.0, 1.0)
    lam = 1.0 / args.rows
    t0 = float(args.rows)

    backends = available_backends()
    print(f"rows={args.rows} dims={args.dims} epochs={args.epochs}")
    results = {}
    for name, epoch_fn in sorted(backends.items()):
        elapsed, w, b = bench(epoch_fn, x, y, lam, t0, args.epochs, args.seed)
        rows_per_s = args.rows * args.epochs / elapsed
        results[name] = (elapsed, w, b)
        print(f"  {name:7s}: {elapsed:8.3f} s   {rows_per_s:12.0f} rows/s")
    if len(results) == 2:
        speedup = results["python"][0] / results["cython"][0]
        identical = np.array_equal(results["python"][1], results["cython"][1]) and (
            results["python"][2] == results["cython"][2]
        )
        print(f"  speedup: {speedup:.1f}x   bit-identical results: {identical}")


if __name__ == "__main__":
    main()
