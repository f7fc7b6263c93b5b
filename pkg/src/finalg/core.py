"""Finite algebras, terms, and the basic constructions every module consumes.

A finite algebra lives on the universe {0..n-1} and stores each basic
operation as a dense row-major table: the entry for arguments (a_0..a_{m-1})
sits at index sum a_i * n**(m-1-i).  Terms are immutable trees (shared
subtrees make them DAGs for free) over the operation symbols.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from . import kernels
from .errors import BudgetExceeded, InvalidInput, TheoremViolation

DEFAULT_TABLE_GUARD = 4_000_000  # max entries of any materialized table
DEFAULT_CLONE_ARITY = 4
DEFAULT_CLONE_TABLES = 200_000
CONGRUENCE_SIZE_GUARD = 12
ARITY_CAP = 4096  # formal positions of constructed terms


# ---------------------------------------------------------------------------
# operation tables and algebras


@dataclass(frozen=True)
class OperationTable:
    """A named dense operation table over {0..n-1}."""

    name: str
    arity: int
    table: tuple[int, ...]

    @cached_property
    def array(self) -> np.ndarray:
        return np.array(self.table, dtype=np.int64)

    def validate(self, size: int) -> None:
        if self.arity < 1:
            raise InvalidInput(f"operation {self.name!r}: arity must be positive")
        if len(self.table) != size**self.arity:
            raise InvalidInput(
                f"operation {self.name!r}: table length {len(self.table)} != {size}^{self.arity}"
            )
        if any(not (0 <= v < size) for v in self.table):
            raise InvalidInput(f"operation {self.name!r}: table entry out of range")

    def is_idempotent(self, size: int) -> bool:
        step = (size**self.arity - 1) // (size - 1) if size > 1 else 1
        return all(self.table[a * step] == a for a in range(size))

    def apply(self, size: int, args) -> int:
        idx = 0
        for a in args:
            idx = idx * size + a
        return self.table[idx]


def op_from_function(name: str, arity: int, size: int, fn) -> OperationTable:
    """Tabulate a python function into an OperationTable."""
    table = tuple(
        fn(*args) for args in itertools.product(range(size), repeat=arity)
    )
    op = OperationTable(name, arity, table)
    op.validate(size)
    return op


@dataclass(frozen=True)
class FiniteAlgebra:
    """A finite universe {0..size-1} with an ordered tuple of named operations."""

    size: int
    operations: tuple[OperationTable, ...]

    def __post_init__(self):
        if self.size < 1:
            raise InvalidInput("universe must be nonempty")
        names = [op.name for op in self.operations]
        if len(set(names)) != len(names):
            raise InvalidInput("operation names must be unique")
        for op in self.operations:
            op.validate(self.size)

    def op(self, name: str) -> OperationTable:
        for op in self.operations:
            if op.name == name:
                return op
        raise InvalidInput(f"unknown operation symbol {name!r}")

    def signature(self) -> tuple[tuple[str, int], ...]:
        return tuple((op.name, op.arity) for op in self.operations)

    def is_idempotent(self) -> bool:
        return all(op.is_idempotent(self.size) for op in self.operations)

    def require_idempotent(self) -> None:
        if not self.is_idempotent():
            raise InvalidInput("algebra is not idempotent")

    @cached_property
    def packed(self):
        return kernels.pack_tables([(op.arity, op.table) for op in self.operations])


def algebra(size: int, ops: dict[str, tuple[int, object]]) -> FiniteAlgebra:
    """Build an algebra from {name: (arity, python function or table)}."""
    built = []
    for name, (arity, fn) in ops.items():
        if callable(fn):
            built.append(op_from_function(name, arity, size, fn))
        else:
            op = OperationTable(name, arity, tuple(fn))
            op.validate(size)
            built.append(op)
    return FiniteAlgebra(size, tuple(built))


# ---------------------------------------------------------------------------
# terms


@dataclass(frozen=True)
class Var:
    index: int


@dataclass(frozen=True)
class App:
    symbol: str
    children: tuple["Term", ...]


Term = Var | App


def term_vars(t: Term) -> list[int]:
    """Distinct variable indices of t, ascending."""
    seen: set[int] = set()
    stack = [t]
    visited: set[int] = set()
    while stack:
        node = stack.pop()
        if id(node) in visited:
            continue
        visited.add(id(node))
        if isinstance(node, Var):
            seen.add(node.index)
        else:
            stack.extend(node.children)
    return sorted(seen)


def term_size(t: Term) -> int:
    """Number of distinct DAG nodes."""
    count = 0
    visited: set[int] = set()
    stack = [t]
    while stack:
        node = stack.pop()
        if id(node) in visited:
            continue
        visited.add(id(node))
        count += 1
        if isinstance(node, App):
            stack.extend(node.children)
    return count


def substitute(t: Term, mapping: dict[int, Term]) -> Term:
    """Replace variables by terms; shares rewritten subtrees."""
    memo: dict[int, Term] = {}

    def rec(node: Term) -> Term:
        got = memo.get(id(node))
        if got is not None:
            return got
        if isinstance(node, Var):
            out = mapping.get(node.index, node)
        else:
            out = App(node.symbol, tuple(rec(c) for c in node.children))
        memo[id(node)] = out
        return out

    return rec(t)


def renumber_dense(t: Term) -> Term:
    """Renumber variables to 0..d-1 preserving order."""
    vs = term_vars(t)
    if vs == list(range(len(vs))):
        return t
    return substitute(t, {v: Var(i) for i, v in enumerate(vs)})


def term_arity(t: Term) -> int:
    """1 + max variable index after dense renumbering."""
    return max(1, len(term_vars(t)))


def star_compose(t1: Term, t2: Term) -> Term:
    """kl-ary composition: t1 applied to k blocks of t2 over disjoint variables."""
    t1 = renumber_dense(t1)
    t2 = renumber_dense(t2)
    k = term_arity(t1)
    l = term_arity(t2)
    blocks = {
        i: substitute(t2, {j: Var(i * l + j) for j in range(l)}) for i in range(k)
    }
    return substitute(t1, blocks)


def check_symbols(alg: FiniteAlgebra, t: Term) -> None:
    stack = [t]
    visited: set[int] = set()
    while stack:
        node = stack.pop()
        if id(node) in visited:
            continue
        visited.add(id(node))
        if isinstance(node, App):
            op = alg.op(node.symbol)
            if op.arity != len(node.children):
                raise InvalidInput(
                    f"symbol {node.symbol!r} applied to {len(node.children)} "
                    f"arguments, declared arity {op.arity}"
                )
            stack.extend(node.children)


def eval_term(alg: FiniteAlgebra, t: Term, args: tuple[int, ...]) -> int:
    """Value of the term operation at one argument tuple."""
    check_symbols(alg, t)
    memo: dict[int, int] = {}

    def rec(node: Term) -> int:
        got = memo.get(id(node))
        if got is not None:
            return got
        if isinstance(node, Var):
            if node.index >= len(args):
                raise InvalidInput(
                    f"variable x{node.index} out of range for {len(args)} arguments"
                )
            out = args[node.index]
        else:
            op = alg.op(node.symbol)
            idx = 0
            for c in node.children:
                idx = idx * alg.size + rec(c)
            out = op.table[idx]
        memo[id(node)] = out
        return out

    return rec(t)


def eval_term_grid(alg: FiniteAlgebra, t: Term, domains: list) -> np.ndarray:
    """Values of t over the cartesian product of per-position domains.

    Row-major: position 0 is most significant.  Memoized per DAG node, so
    star-composed terms evaluate in O(nodes * grid).
    """
    check_symbols(alg, t)
    doms = [np.asarray(d, dtype=np.int64) for d in domains]
    sizes = [d.size for d in doms]
    total = 1
    for s in sizes:
        total *= s
    if total > DEFAULT_TABLE_GUARD:
        raise BudgetExceeded(f"evaluation grid of {total} entries exceeds table guard")
    strides = [1] * len(sizes)
    for i in range(len(sizes) - 2, -1, -1):
        strides[i] = strides[i + 1] * sizes[i + 1]
    memo: dict[int, np.ndarray] = {}

    def rec(node: Term) -> np.ndarray:
        got = memo.get(id(node))
        if got is not None:
            return got
        if isinstance(node, Var):
            i = node.index
            if i >= len(doms):
                raise InvalidInput(
                    f"variable x{i} out of range for {len(doms)} grid positions"
                )
            reps = total // (sizes[i] * strides[i])
            out = np.tile(np.repeat(doms[i], strides[i]), reps)
        else:
            idx = np.zeros(total, dtype=np.int64)
            for c in node.children:
                idx = idx * alg.size + rec(c)
            out = alg.op(node.symbol).array[idx]
        memo[id(node)] = out
        return out

    return rec(t)


def term_table(alg: FiniteAlgebra, t: Term, arity: int) -> np.ndarray:
    """Dense table of t viewed as an arity-ary operation."""
    return eval_term_grid(alg, t, [range(alg.size)] * arity)


def term_to_operation(alg: FiniteAlgebra, t: Term, arity: int, name: str) -> OperationTable:
    return OperationTable(name, arity, tuple(int(v) for v in term_table(alg, t, arity)))


# ---------------------------------------------------------------------------
# generation and products


def generate_subuniverse(alg: FiniteAlgebra, seed) -> frozenset[int]:
    """Least superset of seed closed under all basic operations."""
    seed = sorted(set(seed))
    if not seed:
        return frozenset()
    if any(not (0 <= a < alg.size) for a in seed):
        raise InvalidInput("seed element out of universe")
    flat, offsets, arities = alg.packed
    members = kernels.closure_members(flat, offsets, arities, alg.size, 1, seed)
    return frozenset(int(a) for a in members)


def generate_subuniverse_trace(alg: FiniteAlgebra, seed):
    """Closure with provenance: element -> None (seed) or (op name, parents).

    Deterministic: rounds are breadth-first, operations in declaration order,
    argument tuples in lexicographic order over the discovery sequence.
    """
    seed = sorted(set(seed))
    trace: dict[int, object] = {a: None for a in seed}
    order: list[int] = list(seed)
    lo = 0
    while lo < len(order):
        hi = len(order)
        for op in alg.operations:
            m = op.arity
            for pos in range(m):
                ranges = [
                    range(lo) if q < pos else range(lo, hi) if q == pos else range(hi)
                    for q in range(m)
                ]
                for combo in itertools.product(*ranges):
                    args = tuple(order[i] for i in combo)
                    idx = 0
                    for a in args:
                        idx = idx * alg.size + a
                    v = op.table[idx]
                    if v not in trace:
                        trace[v] = (op.name, args)
                        order.append(v)
        lo = hi
    return trace


def witness_term_from_trace(trace, b: int) -> tuple[Term, tuple[int, ...]]:
    """Rebuild a term and argument tuple over the seed producing b.

    Every seed leaf becomes a fresh variable, so the returned args line up
    with variable indices 0..arity-1.
    """
    args: list[int] = []

    def rec(elem: int) -> Term:
        how = trace[elem]
        if how is None:
            args.append(elem)
            return Var(len(args) - 1)
        name, parents = how
        return App(name, tuple(rec(p) for p in parents))

    if b not in trace:
        raise InvalidInput(f"element {b} is not in the generated subuniverse")
    t = rec(b)
    return t, tuple(args)


def product(algs: list[FiniteAlgebra]) -> FiniteAlgebra:
    """Direct product; elements are mixed-radix codes, most significant first."""
    if not algs:
        raise InvalidInput("empty product")
    sig = algs[0].signature()
    for a in algs[1:]:
        if a.signature() != sig:
            raise InvalidInput("signature mismatch in product")
    sizes = [a.size for a in algs]
    N = 1
    for s in sizes:
        N *= s
    ops = []
    for oi, (name, m) in enumerate(sig):
        if N**m > DEFAULT_TABLE_GUARD:
            raise BudgetExceeded(
                f"product table for {name!r} needs {N**m} entries (> guard); "
                "use the coded-tuple operations instead of materializing"
            )
        idx = np.arange(N**m, dtype=np.int64)
        argcodes = [(idx // (N ** (m - 1 - q))) % N for q in range(m)]
        out = np.zeros(N**m, dtype=np.int64)
        rem = [ac.copy() for ac in argcodes]
        # decode factor digits from most significant factor down
        factor_vals = []
        div = N
        for fi, a in enumerate(algs):
            div //= a.size
            digs = [rc // div for rc in rem]
            rem = [rc % div for rc in rem]
            t = np.zeros(N**m, dtype=np.int64)
            for q in range(m):
                t = t * a.size + digs[q]
            factor_vals.append(a.operations[oi].array[t])
        mult = 1
        for fi in range(len(algs) - 1, -1, -1):
            out += factor_vals[fi] * mult
            mult *= algs[fi].size
        ops.append(OperationTable(name, m, tuple(int(v) for v in out)))
    return FiniteAlgebra(N, tuple(ops))


def power(alg: FiniteAlgebra, m: int) -> FiniteAlgebra:
    if m < 1:
        raise InvalidInput("power exponent must be positive")
    return product([alg] * m)


def encode_tuple(t, n: int) -> int:
    code = 0
    for a in t:
        code = code * n + a
    return code


def decode_tuple(code: int, n: int, k: int) -> tuple[int, ...]:
    out = [0] * k
    for j in range(k - 1, -1, -1):
        out[j] = code % n
        code //= n
    return tuple(out)


# ---------------------------------------------------------------------------
# clone generation


@dataclass
class ClonePool:
    """Distinct term-operation tables up to an arity, each with one witness term."""

    by_arity: dict[int, dict[tuple[int, ...], Term]]
    complete: bool
    table_count: int

    def tables(self, arity: int) -> dict[tuple[int, ...], Term]:
        return self.by_arity.get(arity, {})


def clone_iter(alg: FiniteAlgebra, max_arity: int, max_tables: int):
    """Yield (arity, table, witness term) in deterministic BFS order.

    Per arity: the projections first, then rounds of basic operations applied
    to previously discovered tables.  Dedup is by table content, keeping the
    first (smallest) witness.  Ends early once max_tables have been yielded;
    the trailing sentinel (0, None, None) marks a completed fixpoint.
    """
    n = alg.size
    count = 0
    for m in range(1, max_arity + 1):
        N = n**m
        if N > DEFAULT_TABLE_GUARD:
            return
        seen: dict[tuple[int, ...], Term] = {}
        order: list[np.ndarray] = []
        idx = np.arange(N, dtype=np.int64)
        for i in range(m):
            tab = (idx // (n ** (m - 1 - i))) % n
            key = tuple(int(v) for v in tab)
            if key not in seen:
                seen[key] = Var(i)
                order.append(tab)
                count += 1
                yield m, key, seen[key]
                if count >= max_tables:
                    return
        keys = list(seen.keys())
        lo = 0
        while lo < len(order):
            hi = len(order)
            for op in alg.operations:
                q = op.arity
                arr = op.array
                for pos in range(q):
                    ranges = [
                        range(lo) if p < pos else range(lo, hi) if p == pos else range(hi)
                        for p in range(q)
                    ]
                    for combo in itertools.product(*ranges):
                        flat = np.zeros(N, dtype=np.int64)
                        for ci in combo:
                            flat = flat * n + order[ci]
                        tab = arr[flat]
                        key = tuple(int(v) for v in tab)
                        if key not in seen:
                            term = App(op.name, tuple(seen[keys[ci]] for ci in combo))
                            seen[key] = term
                            order.append(tab)
                            keys.append(key)
                            count += 1
                            yield m, key, term
                            if count >= max_tables:
                                return
            lo = hi
    yield 0, None, None


def generate_clone(
    alg: FiniteAlgebra,
    max_arity: int = DEFAULT_CLONE_ARITY,
    max_tables: int = DEFAULT_CLONE_TABLES,
) -> ClonePool:
    by_arity: dict[int, dict[tuple[int, ...], Term]] = {}
    complete = False
    total = 0
    for m, key, term in clone_iter(alg, max_arity, max_tables):
        if m == 0:
            complete = True
            break
        by_arity.setdefault(m, {})[key] = term
        total += 1
    return ClonePool(by_arity, complete, total)


# ---------------------------------------------------------------------------
# congruences and quotients


@dataclass(frozen=True)
class Congruence:
    """A partition of {0..n-1} stored as a block-index array in RGS form."""

    blocks: tuple[int, ...]

    @staticmethod
    def from_classes(n: int, classes) -> "Congruence":
        ids = [-1] * n
        for i, cls in enumerate(classes):
            for a in cls:
                ids[a] = i
        if any(v < 0 for v in ids):
            raise InvalidInput("classes do not cover the universe")
        return Congruence(_canonical_rgs(tuple(ids)))

    @staticmethod
    def diagonal(n: int) -> "Congruence":
        return Congruence(tuple(range(n)))

    @staticmethod
    def full(n: int) -> "Congruence":
        return Congruence((0,) * n)

    @property
    def size(self) -> int:
        return len(self.blocks)

    @property
    def block_count(self) -> int:
        return max(self.blocks) + 1 if self.blocks else 0

    def classes(self) -> list[list[int]]:
        out: list[list[int]] = [[] for _ in range(self.block_count)]
        for a, b in enumerate(self.blocks):
            out[b].append(a)
        return out

    def related(self, a: int, b: int) -> bool:
        return self.blocks[a] == self.blocks[b]

    def refines(self, other: "Congruence") -> bool:
        """Every block of self lies inside a block of other."""
        rep: dict[int, int] = {}
        for a in range(len(self.blocks)):
            mine = self.blocks[a]
            if mine in rep:
                if other.blocks[a] != rep[mine]:
                    return False
            else:
                rep[mine] = other.blocks[a]
        return True


def _canonical_rgs(ids: tuple[int, ...]) -> tuple[int, ...]:
    remap: dict[int, int] = {}
    out = []
    for v in ids:
        if v not in remap:
            remap[v] = len(remap)
        out.append(remap[v])
    return tuple(out)


def _partitions_rgs(n: int):
    """All partitions of {0..n-1} as restricted growth strings."""
    a = [0] * n
    b = [1] * n  # b[i] = 1 + max(a[:i])
    while True:
        yield tuple(a)
        i = n - 1
        while i > 0 and a[i] == b[i]:
            i -= 1
        if i == 0:
            return
        a[i] += 1
        for j in range(i + 1, n):
            a[j] = 0
            b[j] = max(b[i], a[i] + 1) if j == i + 1 else max(b[j - 1], a[j - 1] + 1)


def is_congruence(alg: FiniteAlgebra, part: Congruence) -> bool:
    """Closure of the block relation under all operations, single-coordinate form."""
    if len(part.blocks) != alg.size:
        raise InvalidInput("partition size mismatch")
    n = alg.size
    related = [
        [b for b in range(n) if part.blocks[a] == part.blocks[b]] for a in range(n)
    ]
    for op in alg.operations:
        m = op.arity
        for args in itertools.product(range(n), repeat=m):
            idx = 0
            for a in args:
                idx = idx * n + a
            va = op.table[idx]
            for j in range(m):
                for b in related[args[j]]:
                    if b == args[j]:
                        continue
                    jdx = 0
                    for q in range(m):
                        jdx = jdx * n + (b if q == j else args[q])
                    if part.blocks[op.table[jdx]] != part.blocks[va]:
                        return False
    return True


def congruences(alg: FiniteAlgebra, guard: int = CONGRUENCE_SIZE_GUARD) -> list[Congruence]:
    """All congruences, by restricted-growth-string partition enumeration."""
    if alg.size > guard:
        raise BudgetExceeded(
            f"congruence enumeration guarded at n<={guard} (got {alg.size})"
        )
    out = []
    for rgs in _partitions_rgs(alg.size):
        cand = Congruence(rgs)
        if is_congruence(alg, cand):
            out.append(cand)
    return out


def is_simple(alg: FiniteAlgebra, guard: int = CONGRUENCE_SIZE_GUARD) -> bool:
    """Only the diagonal and the full relation are congruences."""
    allowed = {Congruence.diagonal(alg.size).blocks, Congruence.full(alg.size).blocks}
    return all(c.blocks in allowed for c in congruences(alg, guard))


def quotient(alg: FiniteAlgebra, c: Congruence) -> FiniteAlgebra:
    """Factor algebra on the blocks; representative-independence is checked."""
    if len(c.blocks) != alg.size:
        raise InvalidInput("congruence size mismatch")
    classes = c.classes()
    m = len(classes)
    ops = []
    for op in alg.operations:
        q = op.arity
        table = [-1] * (m**q)
        for blkargs in itertools.product(range(m), repeat=q):
            idx = 0
            for b in blkargs:
                idx = idx * m + b
            val = -1
            for reps in itertools.product(*(classes[b] for b in blkargs)):
                jdx = 0
                for a in reps:
                    jdx = jdx * alg.size + a
                v = c.blocks[op.table[jdx]]
                if val == -1:
                    val = v
                elif val != v:
                    raise InvalidInput(
                        f"representative-dependent result for {op.name!r}: "
                        "the partition is not a congruence"
                    )
            table[idx] = val
        ops.append(OperationTable(op.name, q, tuple(table)))
    return FiniteAlgebra(m, tuple(ops))


def quotient_map_is_homomorphism(alg: FiniteAlgebra, c: Congruence) -> bool:
    """Entry-wise check that the natural projection commutes with every table."""
    q = quotient(alg, c)
    for op, qop in zip(alg.operations, q.operations):
        for args in itertools.product(range(alg.size), repeat=op.arity):
            idx = 0
            for a in args:
                idx = idx * alg.size + a
            jdx = 0
            for a in args:
                jdx = jdx * q.size + c.blocks[a]
            if c.blocks[op.table[idx]] != qop.table[jdx]:
                return False
    return True


# ---------------------------------------------------------------------------
# identities and special terms


def check_identity(alg: FiniteAlgebra, s: Term, t: Term) -> bool:
    """Evaluate both sides over all assignments to the shared variables."""
    vs = set(term_vars(s)) | set(term_vars(t))
    V = max(vs) + 1 if vs else 1
    if alg.size**V > DEFAULT_TABLE_GUARD:
        raise BudgetExceeded("identity check grid exceeds table guard")
    return bool(np.array_equal(term_table(alg, s, V), term_table(alg, t, V)))


def shift_index_permutation(n: int, k: int) -> np.ndarray:
    """Permutation of codes induced by one left cyclic shift of coordinates."""
    idx = np.arange(n**k, dtype=np.int64)
    return (idx % (n ** (k - 1))) * n + idx // (n ** (k - 1))


def is_cyclic_table(table: np.ndarray, arity: int, size: int) -> bool:
    if arity < 2:
        return False
    step = (size**arity - 1) // (size - 1) if size > 1 else 1
    if any(table[a * step] != a for a in range(size)):
        return False
    perm = shift_index_permutation(size, arity)
    return bool(np.array_equal(table, table[perm]))


def is_cyclic_op(op: OperationTable, size: int) -> bool:
    """Idempotent and invariant under one cyclic argument rotation."""
    return is_cyclic_table(op.array, op.arity, size)


def is_wnu_op(op: OperationTable, size: int) -> bool:
    """Idempotent and symmetric across all one-odd-argument patterns."""
    if op.arity < 2 or not op.is_idempotent(size):
        return False
    n = size
    m = op.arity
    for x in range(n):
        for y in range(n):
            ref = None
            for j in range(m):
                idx = 0
                for q in range(m):
                    idx = idx * n + (y if q == j else x)
                v = op.table[idx]
                if ref is None:
                    ref = v
                elif v != ref:
                    return False
    return True


def taylor_witnesses_for_table(table: np.ndarray, arity: int, size: int):
    """Per-coordinate identity witnesses making the table a Taylor operation.

    For coordinate j the witness is a pair of {x,y}-patterns (0 for x, 1 for
    y) with x at j on the left and y at j on the right, such that both
    substituted binary functions coincide.  Returns None when idempotency or
    some coordinate fails.
    """
    n = size
    step = (n**arity - 1) // (n - 1) if n > 1 else 1
    if any(table[a * step] != a for a in range(n)):
        return None

    def pattern_fn(pat):
        out = np.zeros((n, n), dtype=np.int64)
        for x in range(n):
            for y in range(n):
                idx = 0
                for p in pat:
                    idx = idx * n + (y if p else x)
                out[x, y] = table[idx]
        return out

    pats = list(itertools.product((0, 1), repeat=arity))
    tables = {pat: pattern_fn(pat) for pat in pats}
    witnesses = []
    for j in range(arity):
        found = None
        for left in pats:
            if left[j] != 0:
                continue
            for right in pats:
                if right[j] != 1:
                    continue
                if np.array_equal(tables[left], tables[right]):
                    found = (left, right)
                    break
            if found:
                break
        if not found:
            return None
        witnesses.append(found)
    return witnesses


def is_taylor_term(alg: FiniteAlgebra, t: Term):
    """Witness list per coordinate, or None when t is not a Taylor term."""
    k = term_arity(renumber_dense(t))
    if 2 ** (2 * k) > DEFAULT_TABLE_GUARD:
        raise BudgetExceeded("Taylor pattern search exceeds guard")
    table = term_table(alg, renumber_dense(t), k)
    return taylor_witnesses_for_table(table, k, alg.size)


def find_taylor_term(alg: FiniteAlgebra, max_arity: int = DEFAULT_CLONE_ARITY,
                     max_tables: int = 5_000):
    """First clone member that is a Taylor operation, as (term, witnesses)."""
    for op in alg.operations:
        t = App(op.name, tuple(Var(i) for i in range(op.arity)))
        w = taylor_witnesses_for_table(op.array, op.arity, alg.size)
        if w is not None:
            return t, w
    for m, key, term in clone_iter(alg, max_arity, max_tables):
        if m == 0:
            break
        w = taylor_witnesses_for_table(np.array(key, dtype=np.int64), m, alg.size)
        if w is not None:
            return term, w
    return None


# ---------------------------------------------------------------------------
# the universal generator term


@dataclass
class UniversalGeneratorTerm:
    """A single term realizing every generated element from its generating set.

    assignments maps (frozenset B, b) to an argument tuple over B whose
    evaluation is b, for every b generated by B.  factors are the star
    components in composition order (outermost first).
    """

    term: Term
    arity: int
    factors: tuple[Term, ...] = (Var(0),)
    assignments: dict[tuple[frozenset, int], tuple[int, ...]] = field(repr=False, default_factory=dict)


def construct_universal_generator_term(alg: FiniteAlgebra,
                                       arity_cap: int = ARITY_CAP) -> UniversalGeneratorTerm:
    """Star-compose per-(B, b) witness terms into one term covering all subsets."""
    alg.require_idempotent()
    n = alg.size
    factors = []  # (B frozenset, b, term, local args)
    for mask in range(1, 2**n):
        B = frozenset(a for a in range(n) if mask >> a & 1)
        trace = generate_subuniverse_trace(alg, B)
        for b in sorted(trace):
            if b in B:
                continue
            t, args = witness_term_from_trace(trace, b)
            factors.append((B, b, renumber_dense(t), args))

    if not factors:
        term = Var(0)
        arity = 1
        factor_terms: tuple[Term, ...] = (Var(0),)
    else:
        term = factors[0][2]
        arities = [term_arity(term)]
        for _, _, t, _ in factors[1:]:
            arities.append(term_arity(t))
            term = star_compose(term, t)
        arity = 1
        for a in arities:
            arity *= a
            if arity > arity_cap:
                raise BudgetExceeded(
                    f"universal generator term arity exceeds cap {arity_cap}"
                )
        factor_terms = tuple(renumber_dense(t) for _, _, t, _ in factors)

    gen = UniversalGeneratorTerm(term, arity, factor_terms)

    # argument tuple realizing factor fi: position p takes the factor-local
    # argument selected by p's fi-th mixed-radix digit; all other factors
    # collapse by idempotency (the two diagonal laws)
    if factors:
        arities = [term_arity(t) for _, _, t, _ in factors]
        strides = [1] * len(factors)
        for i in range(len(factors) - 2, -1, -1):
            strides[i] = strides[i + 1] * arities[i + 1]
        for fi, (B, b, t, local) in enumerate(factors):
            args = tuple(
                local[(p // strides[fi]) % arities[fi]] for p in range(arity)
            )
            if eval_term(alg, gen.term, args) != b:
                raise TheoremViolation(
                    f"universal generator tuple for ({set(B)}, {b}) failed to verify"
                )
            gen.assignments[(B, b)] = args

    # every b in B is realized by the constant tuple (idempotency)
    for mask in range(1, 2**n):
        B = frozenset(a for a in range(n) if mask >> a & 1)
        closure = generate_subuniverse(alg, B)
        for b in sorted(closure):
            if (B, b) in gen.assignments:
                continue
            args = (b,) * arity
            if eval_term(alg, gen.term, args) != b:
                raise TheoremViolation(
                    f"universal generator tuple for ({set(B)}, {b}) failed to verify"
                )
            gen.assignments[(B, b)] = args
    return gen
