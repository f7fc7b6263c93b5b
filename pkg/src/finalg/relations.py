"""Explicit finitary relations: subdirectness, composition, neighborhoods,
linkedness, and cyclic shifts.

Binary relations additionally carry a bit-matrix view (one int bitmask per
row) used by composition, neighborhoods and linkedness, which dominate the
binary-relation workload.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import cached_property

from . import kernels
from .core import FiniteAlgebra, decode_tuple, encode_tuple
from .errors import InvalidInput


@dataclass(frozen=True)
class Relation:
    arity: int
    sizes: tuple[int, ...]
    tuples: frozenset[tuple[int, ...]]

    def __post_init__(self):
        if self.arity < 1 or len(self.sizes) != self.arity:
            raise InvalidInput("relation arity/sizes mismatch")
        for t in self.tuples:
            if len(t) != self.arity:
                raise InvalidInput(f"tuple {t} has wrong arity")
            if any(not (0 <= a < s) for a, s in zip(t, self.sizes)):
                raise InvalidInput(f"tuple {t} out of bounds")

    @staticmethod
    def binary(size_a: int, size_b: int, pairs) -> "Relation":
        return Relation(2, (size_a, size_b), frozenset((a, b) for a, b in pairs))

    @staticmethod
    def full(sizes) -> "Relation":
        sizes = tuple(sizes)
        return Relation(
            len(sizes), sizes, frozenset(itertools.product(*(range(s) for s in sizes)))
        )

    @staticmethod
    def identity(n: int) -> "Relation":
        return Relation(2, (n, n), frozenset((a, a) for a in range(n)))

    def sorted_tuples(self) -> list[tuple[int, ...]]:
        return sorted(self.tuples)

    def project(self, coord: int) -> set[int]:
        return {t[coord] for t in self.tuples}

    @cached_property
    def rows(self) -> tuple[int, ...]:
        """Bitmask of second coordinates per first coordinate (binary only)."""
        self._require_binary()
        out = [0] * self.sizes[0]
        for a, b in self.tuples:
            out[a] |= 1 << b
        return tuple(out)

    @cached_property
    def cols(self) -> tuple[int, ...]:
        self._require_binary()
        out = [0] * self.sizes[1]
        for a, b in self.tuples:
            out[b] |= 1 << a
        return tuple(out)

    def inverse(self) -> "Relation":
        self._require_binary()
        return Relation.binary(self.sizes[1], self.sizes[0],
                               ((b, a) for a, b in self.tuples))

    def _require_binary(self):
        if self.arity != 2:
            raise InvalidInput("binary relation required")


def is_subdirect(r: Relation) -> bool:
    """Every coordinate projection is the whole factor universe."""
    return all(len(r.project(i)) == r.sizes[i] for i in range(r.arity))


def compose(s: Relation, r: Relation) -> Relation:
    """S o R = {(a,c) : exists b, (a,b) in R and (b,c) in S}."""
    s._require_binary()
    r._require_binary()
    if r.sizes[1] != s.sizes[0]:
        raise InvalidInput("middle universes do not match")
    pairs = []
    for a in range(r.sizes[0]):
        mask = r.rows[a]
        out = 0
        b = 0
        while mask:
            if mask & 1:
                out |= s.rows[b]
            mask >>= 1
            b += 1
        for c in range(s.sizes[1]):
            if out >> c & 1:
                pairs.append((a, c))
    return Relation.binary(r.sizes[0], s.sizes[1], pairs)


def iterate(r: Relation, m: int) -> Relation:
    if m < 1:
        raise InvalidInput("iteration count must be >= 1")
    out = r
    for _ in range(m - 1):
        out = compose(r, out)
    return out


def plus_neighborhood(r: Relation, X) -> frozenset[int]:
    """X^{+R}: everything R-reachable from X on the left."""
    r._require_binary()
    out = 0
    for a in X:
        out |= r.rows[a]
    return frozenset(b for b in range(r.sizes[1]) if out >> b & 1)


def minus_neighborhood(r: Relation, Y) -> frozenset[int]:
    """Y^{-R}: everything R-reaching Y from the left."""
    r._require_binary()
    out = 0
    for b in Y:
        out |= r.cols[b]
    return frozenset(a for a in range(r.sizes[0]) if out >> a & 1)


def common_plus_neighborhood(r: Relation, X) -> frozenset[int]:
    """Intersection of {a}^+ over a in X; the full right universe for empty X."""
    r._require_binary()
    out = (1 << r.sizes[1]) - 1
    for a in X:
        out &= r.rows[a]
    return frozenset(b for b in range(r.sizes[1]) if out >> b & 1)


# ---------------------------------------------------------------------------
# linkedness


@dataclass(frozen=True)
class LinkStructure:
    """Connected components of the bipartite graph of a binary relation.

    Components are numbered over non-isolated vertices; parents store a BFS
    forest from which explicit linking chains are rebuilt on demand.
    """

    left_comp: tuple[int, ...]
    right_comp: tuple[int, ...]
    isolated_left: tuple[int, ...]
    isolated_right: tuple[int, ...]
    parents: dict

    def component_count(self) -> int:
        comps = set(self.left_comp) | set(self.right_comp)
        comps.discard(-1)
        return len(comps)

    def linked(self, u, v) -> bool:
        """u, v are ('L', a) or ('R', b) nodes."""
        cu = self._comp(u)
        cv = self._comp(v)
        return cu != -1 and cu == cv

    def _comp(self, node):
        side, x = node
        return self.left_comp[x] if side == "L" else self.right_comp[x]

    def chain(self, u, v) -> list:
        """Alternating path of ('L'/'R', element) nodes from u to v."""
        if not self.linked(u, v):
            raise InvalidInput(f"{u} and {v} are not linked")
        path_u = self._to_root(u)
        path_v = self._to_root(v)
        seen = {node: i for i, node in enumerate(path_u)}
        j = 0
        while path_v[j] not in seen:
            j += 1
        meet = path_v[j]
        return path_u[: seen[meet] + 1] + path_v[:j][::-1]

    def _to_root(self, node):
        path = [node]
        while self.parents[node] is not None:
            node = self.parents[node]
            path.append(node)
        return path


def link_structure(r: Relation) -> LinkStructure:
    r._require_binary()
    na, nb = r.sizes
    left_comp = [-1] * na
    right_comp = [-1] * nb
    parents: dict = {}
    comp = 0
    for start in range(na):
        if r.rows[start] == 0 or left_comp[start] != -1:
            continue
        queue = [("L", start)]
        parents[("L", start)] = None
        left_comp[start] = comp
        qi = 0
        while qi < len(queue):
            side, x = queue[qi]
            qi += 1
            if side == "L":
                mask = r.rows[x]
                for b in range(nb):
                    if mask >> b & 1 and right_comp[b] == -1:
                        right_comp[b] = comp
                        parents[("R", b)] = ("L", x)
                        queue.append(("R", b))
            else:
                mask = r.cols[x]
                for a in range(na):
                    if mask >> a & 1 and left_comp[a] == -1:
                        left_comp[a] = comp
                        parents[("L", a)] = ("R", x)
                        queue.append(("L", a))
        comp += 1
    isolated_left = tuple(a for a in range(na) if r.rows[a] == 0)
    isolated_right = tuple(b for b in range(nb) if r.cols[b] == 0)
    return LinkStructure(
        tuple(left_comp), tuple(right_comp), isolated_left, isolated_right, parents
    )


def is_linked(r: Relation) -> tuple[bool, LinkStructure]:
    """One component after deleting isolated vertices; empty relations are not linked."""
    ls = link_structure(r)
    if not r.tuples:
        return False, ls
    return ls.component_count() == 1, ls


# ---------------------------------------------------------------------------
# cyclic shifts and invariance


def cyclic_shift(t: tuple[int, ...]) -> tuple[int, ...]:
    return t[1:] + t[:1]


def shift_orbit(t: tuple[int, ...]) -> frozenset[tuple[int, ...]]:
    out = set()
    cur = t
    while cur not in out:
        out.add(cur)
        cur = cyclic_shift(cur)
    return frozenset(out)


def is_cyclic_relation(r: Relation) -> bool:
    """Closure of the tuple set under one left shift."""
    if len(set(r.sizes)) != 1:
        raise InvalidInput("cyclic relations need one shared universe")
    return all(cyclic_shift(t) in r.tuples for t in r.tuples)


def contains_constant(r: Relation):
    """A witness element a with (a,..,a) in r, or None."""
    for t in r.sorted_tuples():
        if len(set(t)) == 1:
            return t[0]
    return None


def is_subuniverse_of_power(alg: FiniteAlgebra, r: Relation) -> bool:
    """The tuple set is closed under every basic operation applied coordinatewise."""
    if any(s != alg.size for s in r.sizes):
        raise InvalidInput("relation coordinates must live on the algebra's universe")
    if not r.tuples:
        return True
    codes = sorted(encode_tuple(t, alg.size) for t in r.tuples)
    flat, offsets, arities = alg.packed
    members = kernels.closure_members(flat, offsets, arities, alg.size, r.arity, codes)
    return len(members) == len(codes)


def relation_from_codes(codes, n: int, k: int) -> Relation:
    return Relation(k, (n,) * k, frozenset(decode_tuple(int(c), n, k) for c in codes))
