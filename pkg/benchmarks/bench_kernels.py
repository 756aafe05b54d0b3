"""Time the proof-like sieve and batch unpairing on both back ends.

    python3 benchmarks/bench_kernels.py [--size N] [--repeat R]
"""

from __future__ import annotations

import argparse
import timeit

import numpy as np

from realizability import _kernels as kern


def bench(label: str, fn, repeat: int) -> float:
    fn()  # warm up (numba compiles on first call)
    best = min(timeit.repeat(fn, number=1, repeat=repeat))
    print(f"{label:<28}{best * 1e3:10.2f} ms")
    return best


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--size", type=int, default=1 << 20)
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    z = np.arange(args.size, dtype=np.int64)
    print(f"size={args.size}  numba available: {kern.HAVE_NUMBA}")
    bench("sieve / numpy", lambda: kern.prooflike_sieve_numpy(args.size), args.repeat)
    bench("unpair / numpy", lambda: kern.unpair_batch_numpy(z), args.repeat)
    if kern.HAVE_NUMBA:
        bench("sieve / numba", lambda: kern.prooflike_sieve_numba(args.size), args.repeat)
        bench("unpair / numba", lambda: kern.unpair_batch_numba(z), args.repeat)
        same = np.array_equal(kern.prooflike_sieve_numpy(args.size), kern.prooflike_sieve_numba(args.size))
        print(f"back ends agree: {same}")


if __name__ == "__main__":
    main()
