"""Fixpoint-closure kernels over coded tuples.

Elements of a k-th power of an n-element universe are coded in mixed radix,
most significant coordinate first: code = sum a_j * n**(k-1-j).  Closing a
set of codes under dense operation tables applied coordinatewise is the hot
inner loop of the whole package (subuniverse generation, invariance checks,
cyclic-term decisions), so it is compiled with numba when available.

Set FINALG_NO_NUMBA=1 to force the pure-numpy fallback; both paths compute
identical results and are compared by benchmarks/bench_closure.py.
"""

from __future__ import annotations

import os

import numpy as np

_ENV_FLAG = "FINALG_NO_NUMBA"

try:
    from numba import njit

    HAS_NUMBA = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    HAS_NUMBA = False

    def njit(*args, **kwargs):
        def wrap(fn):
            return fn

        if args and callable(args[0]):
            return args[0]
        return wrap


def use_numba() -> bool:
    return HAS_NUMBA and os.environ.get(_ENV_FLAG, "0") != "1"


def pack_tables(ops):
    """Pack (arity, flat table) pairs into (flat, offsets, arities) arrays."""
    arities = np.array([a for a, _ in ops], dtype=np.int64)
    offsets = np.zeros(len(ops), dtype=np.int64)
    pos = 0
    chunks = []
    for i, (_, table) in enumerate(ops):
        offsets[i] = pos
        arr = np.asarray(table, dtype=np.int64)
        chunks.append(arr)
        pos += arr.size
    flat = np.concatenate(chunks) if chunks else np.zeros(0, dtype=np.int64)
    return flat, offsets, arities


@njit(cache=True)
def _closure_njit(flat, offsets, arities, n, k, seeds, stop_at_constant):
    N = 1
    for _ in range(k):
        N *= n
    member = np.zeros(N, dtype=np.bool_)
    codes = np.empty(N, dtype=np.int64)
    digits = np.empty((N, k), dtype=np.int64)
    pw = np.empty(k, dtype=np.int64)
    p = 1
    for j in range(k - 1, -1, -1):
        pw[j] = p
        p *= n
    count = 0
    for si in range(seeds.shape[0]):
        s = seeds[si]
        if member[s]:
            continue
        member[s] = True
        codes[count] = s
        c = s
        isconst = True
        for j in range(k - 1, -1, -1):
            digits[count, j] = c % n
            c //= n
        for j in range(1, k):
            if digits[count, j] != digits[count, 0]:
                isconst = False
                break
        count += 1
        if stop_at_constant and isconst:
            return member, codes, count, s

    nops = arities.shape[0]
    idx = np.empty(16, dtype=np.int64)  # max supported arity
    lo = 0
    while lo < count:
        hi = count
        for oi in range(nops):
            m = arities[oi]
            base = offsets[oi]
            # Combinations with >=1 argument in the frontier [lo, hi), each
            # counted once: classified by the first frontier position.
            for pos in range(m):
                empty = False
                for q in range(m):
                    if q < pos:
                        if lo == 0:
                            empty = True
                        idx[q] = 0
                    elif q == pos:
                        if lo >= hi:
                            empty = True
                        idx[q] = lo
                    else:
                        if hi == 0:
                            empty = True
                        idx[q] = 0
                if empty:
                    continue
                while True:
                    code = 0
                    d0 = -1
                    isconst = True
                    for j in range(k):
                        t = 0
                        for q in range(m):
                            t = t * n + digits[idx[q], j]
                        v = flat[base + t]
                        if j == 0:
                            d0 = v
                        elif v != d0:
                            isconst = False
                        code += v * pw[j]
                    if not member[code]:
                        member[code] = True
                        codes[count] = code
                        c = code
                        for j in range(k - 1, -1, -1):
                            digits[count, j] = c % n
                            c //= n
                        count += 1
                        if stop_at_constant and isconst:
                            return member, codes, count, code
                    # odometer increment, respecting per-position ranges
                    q = m - 1
                    while q >= 0:
                        idx[q] += 1
                        limit = hi
                        if q < pos:
                            limit = lo
                        if idx[q] < limit:
                            break
                        if q < pos:
                            idx[q] = 0
                        elif q == pos:
                            idx[q] = lo
                        else:
                            idx[q] = 0
                        q -= 1
                    if q < 0:
                        break
        lo = hi
    return member, codes, count, np.int64(-1)


def _constant_codes(n, k, N):
    if n == 1:
        return np.zeros(1, dtype=np.int64)
    return np.arange(n, dtype=np.int64) * ((N - 1) // (n - 1))


def _closure_numpy(flat, offsets, arities, n, k, seeds, stop_at_constant, chunk=1 << 18):
    N = n**k
    pw = n ** np.arange(k - 1, -1, -1, dtype=np.int64)
    member = np.zeros(N, dtype=np.bool_)
    codes = np.unique(np.asarray(seeds, dtype=np.int64))
    member[codes] = True
    const = _constant_codes(n, k, N)
    if stop_at_constant:
        hit = const[member[const]]
        if hit.size:
            return member, int(hit[0])
    digits = (codes[:, None] // pw[None, :]) % n
    lo = 0
    while lo < len(codes):
        hi = len(codes)
        fresh_codes = []
        for oi in range(len(arities)):
            m = int(arities[oi])
            table = flat[offsets[oi] : offsets[oi] + n**m]
            for pos in range(m):
                sizes = [lo] * pos + [hi - lo] + [hi] * (m - 1 - pos)
                total = 1
                for s in sizes:
                    total *= s
                if total == 0:
                    continue
                strides = np.ones(m, dtype=np.int64)
                for q in range(m - 2, -1, -1):
                    strides[q] = strides[q + 1] * sizes[q + 1]
                for start in range(0, total, chunk):
                    flat_ix = np.arange(start, min(start + chunk, total), dtype=np.int64)
                    arg_rows = []
                    for q in range(m):
                        r = (flat_ix // strides[q]) % sizes[q]
                        if q == pos:
                            r = r + lo
                        arg_rows.append(r)
                    out = np.zeros(flat_ix.size, dtype=np.int64)
                    for j in range(k):
                        t = np.zeros(flat_ix.size, dtype=np.int64)
                        for q in range(m):
                            t = t * n + digits[arg_rows[q], j]
                        out += table[t] * pw[j]
                    new = np.unique(out[~member[out]])
                    if new.size:
                        member[new] = True
                        fresh_codes.append(new)
                        if stop_at_constant:
                            hit = const[np.isin(const, new)]
                            if hit.size:
                                return member, int(hit[0])
        if fresh_codes:
            added = np.concatenate(fresh_codes)
            codes = np.concatenate([codes, added])
            digits = np.concatenate([digits, (added[:, None] // pw[None, :]) % n])
        lo = hi
    return member, -1


def closure(flat, offsets, arities, n, k, seeds, stop_at_constant=False):
    """Close seed codes under the packed operations.

    Returns (member mask over n**k codes, constant code or -1).  With
    stop_at_constant the mask may be partial once a constant code appears.
    """
    seeds = np.asarray(seeds, dtype=np.int64)
    if seeds.size == 0:
        return np.zeros(n**k, dtype=np.bool_), -1
    if np.any(arities > 16):
        raise ValueError("operation arity above 16 is not supported by the kernels")
    if use_numba():
        member, _, _, const = _closure_njit(
            flat, offsets, arities, np.int64(n), np.int64(k), seeds, stop_at_constant
        )
        return member, int(const)
    return _closure_numpy(flat, offsets, arities, n, k, seeds, stop_at_constant)


def closure_members(flat, offsets, arities, n, k, seeds):
    """Sorted member codes of the full closure."""
    member, _ = closure(flat, offsets, arities, n, k, seeds, stop_at_constant=False)
    return np.flatnonzero(member)


def closure_find_constant(flat, offsets, arities, n, k, seeds):
    """Constant code reachable from the seeds, or -1 after a full closure."""
    _, const = closure(flat, offsets, arities, n, k, seeds, stop_at_constant=True)
    return const
