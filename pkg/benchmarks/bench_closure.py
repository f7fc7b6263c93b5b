"""Benchmark the subpower closure kernels: numba @njit vs pure numpy.

The workload is the hot loop of the cyclic-term decision: closing shift
orbits inside A^k under coordinatewise operations.  Run a couple of times;
the first numba call includes JIT compilation.

    python3 benchmarks/bench_closure.py [--k 5] [--repeat 3]
"""

import argparse
import time

import numpy as np

from finalg import kernels
from finalg.catalog import three_majority, z3_affine
from finalg.core import encode_tuple
from finalg.relations import shift_orbit


def workload(alg, k):
    """All orbit seeds of A^k, as in has_cyclic_term."""
    n = alg.size
    seeds = []
    for code in range(n**k):
        digits = []
        c = code
        for _ in range(k):
            digits.append(c % n)
            c //= n
        t = tuple(reversed(digits))
        if min(encode_tuple(s, n) for s in shift_orbit(t)) == code:
            seeds.append([encode_tuple(s, n) for s in shift_orbit(t)])
    return seeds


def _njit_path(flat, offsets, arities, n, k, seeds, stop):
    member, _, _, const = kernels._closure_njit(
        flat, offsets, arities, np.int64(n), np.int64(k), seeds, stop
    )
    return member, const


def run(alg, k, fn):
    flat, offsets, arities = alg.packed
    n = alg.size
    total_members = 0
    for seed in workload(alg, k):
        member, _ = fn(flat, offsets, arities, n, k, np.array(seed, dtype=np.int64), False)
        total_members += int(member.sum())
    return total_members


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("--k", type=int, default=5)
    parser.add_argument("--repeat", type=int, default=3)
    args = parser.parse_args()

    for name, alg in (("z3_affine", z3_affine()), ("three_majority", three_majority())):
        print(f"== {name}, k={args.k} ({alg.size}^{args.k} tuple space)")
        totals = set()
        if kernels.HAS_NUMBA:
            run(alg, 2, _njit_path)  # compile outside timing
            for r in range(args.repeat):
                t0 = time.perf_counter()
                total = run(alg, args.k, _njit_path)
                totals.add(total)
                print(f"  numba  pass {r}: {time.perf_counter() - t0:8.3f}s  members={total}")
        else:
            print("  numba unavailable")
        for r in range(args.repeat):
            t0 = time.perf_counter()
            total = run(alg, args.k, kernels._closure_numpy)
            totals.add(total)
            print(f"  numpy  pass {r}: {time.perf_counter() - t0:8.3f}s  members={total}")
        if len(totals) > 1:
            raise SystemExit("paths disagree!")


if __name__ == "__main__":
    main()
