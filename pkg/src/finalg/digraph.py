"""Smooth digraphs: components, oriented paths and fences, algebraic length,
loop-finding under compatible Taylor algebras, and the smooth classifier.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property

from .core import FiniteAlgebra
from .errors import InvalidInput, TheoremViolation
from .relations import Relation, is_subuniverse_of_power
from .absorption import SearchBudget, absorption_report
from .core import find_taylor_term

FORWARD = 1
BACKWARD = -1


@dataclass(frozen=True)
class Digraph:
    vertices: int
    edges: frozenset[tuple[int, int]]

    def __post_init__(self):
        for u, v in self.edges:
            if not (0 <= u < self.vertices and 0 <= v < self.vertices):
                raise InvalidInput(f"edge ({u},{v}) out of bounds")

    @staticmethod
    def build(vertices: int, edges) -> "Digraph":
        return Digraph(vertices, frozenset((u, v) for u, v in edges))

    @staticmethod
    def cycle(k: int) -> "Digraph":
        return Digraph.build(k, [(i, (i + 1) % k) for i in range(k)])

    @staticmethod
    def symmetric(vertices: int, undirected_edges) -> "Digraph":
        out = set()
        for u, v in undirected_edges:
            out.add((u, v))
            out.add((v, u))
        return Digraph.build(vertices, out)

    @cached_property
    def succ(self) -> tuple[tuple[int, ...], ...]:
        out = [[] for _ in range(self.vertices)]
        for u, v in sorted(self.edges):
            out[u].append(v)
        return tuple(tuple(x) for x in out)

    @cached_property
    def pred(self) -> tuple[tuple[int, ...], ...]:
        out = [[] for _ in range(self.vertices)]
        for u, v in sorted(self.edges):
            out[v].append(u)
        return tuple(tuple(x) for x in out)

    def edge_relation(self) -> Relation:
        return Relation.binary(self.vertices, self.vertices, self.edges)

    def is_smooth(self) -> bool:
        return all(self.succ[v] and self.pred[v] for v in range(self.vertices))

    def is_symmetric(self) -> bool:
        return all((v, u) in self.edges for u, v in self.edges)

    def loops(self) -> list[int]:
        return sorted(v for v in range(self.vertices) if (v, v) in self.edges)

    def induced(self, within) -> "Digraph":
        within = set(within)
        return Digraph(
            self.vertices,
            frozenset((u, v) for u, v in self.edges if u in within and v in within),
        )


@dataclass(frozen=True)
class OrientedPath:
    """A sequence of +1 (forward) / -1 (backward) edge directions."""

    steps: tuple[int, ...]

    def __post_init__(self):
        if any(s not in (FORWARD, BACKWARD) for s in self.steps):
            raise InvalidInput("path steps must be +1 or -1")

    @property
    def algebraic_length(self) -> int:
        return sum(self.steps)

    def __add__(self, other: "OrientedPath") -> "OrientedPath":
        return OrientedPath(self.steps + other.steps)


def forward_path(k: int) -> OrientedPath:
    return OrientedPath((FORWARD,) * k)


def fence(k: int, n: int) -> OrientedPath:
    """k forward then k backward edges, n times: 2kn edges, algebraic length 0."""
    return OrientedPath(((FORWARD,) * k + (BACKWARD,) * k) * n)


def smooth_part(g: Digraph, within) -> frozenset[int]:
    """Greatest subset whose induced subgraph has no sources or sinks."""
    cur = set(within)
    if any(not (0 <= v < g.vertices) for v in cur):
        raise InvalidInput("vertex out of range")
    while True:
        nxt = {
            v
            for v in cur
            if any(w in cur for w in g.succ[v]) and any(w in cur for w in g.pred[v])
        }
        if nxt == cur:
            return frozenset(cur)
        cur = nxt


def weak_components(g: Digraph) -> list[frozenset[int]]:
    comp = [-1] * g.vertices
    out = []
    for start in range(g.vertices):
        if comp[start] != -1:
            continue
        cid = len(out)
        queue = [start]
        comp[start] = cid
        members = [start]
        qi = 0
        while qi < len(queue):
            v = queue[qi]
            qi += 1
            for w in g.succ[v] + g.pred[v]:
                if comp[w] == -1:
                    comp[w] = cid
                    members.append(w)
                    queue.append(w)
        out.append(frozenset(members))
    return out


def strong_components(g: Digraph) -> list[frozenset[int]]:
    """Tarjan, iterative."""
    index = [-1] * g.vertices
    low = [0] * g.vertices
    on_stack = [False] * g.vertices
    stack: list[int] = []
    out: list[frozenset[int]] = []
    counter = 0
    for root in range(g.vertices):
        if index[root] != -1:
            continue
        work = [(root, 0)]
        while work:
            v, pi = work[-1]
            if pi == 0:
                index[v] = low[v] = counter
                counter += 1
                stack.append(v)
                on_stack[v] = True
            advanced = False
            for i in range(pi, len(g.succ[v])):
                w = g.succ[v][i]
                if index[w] == -1:
                    work[-1] = (v, i + 1)
                    work.append((w, 0))
                    advanced = True
                    break
                if on_stack[w]:
                    low[v] = min(low[v], index[w])
            if advanced:
                continue
            work.pop()
            if low[v] == index[v]:
                comp = []
                while True:
                    w = stack.pop()
                    on_stack[w] = False
                    comp.append(w)
                    if w == v:
                        break
                out.append(frozenset(comp))
            if work:
                u, _ = work[-1]
                low[u] = min(low[u], low[v])
    return out


def algebraic_length(g: Digraph, component) -> int | None:
    """Minimal positive algebraic length of a closed walk in the component.

    Spanning-tree potentials: root the component in the underlying undirected
    graph, give each vertex the algebraic length of a tree path from the
    root, and gcd the discrepancies |pot(u)+1-pot(v)| over all edges.  None
    means every closed walk has algebraic length zero.
    """
    comp = set(component)
    if not comp:
        raise InvalidInput("empty component")
    root = min(comp)
    pot = {root: 0}
    queue = [root]
    qi = 0
    while qi < len(queue):
        v = queue[qi]
        qi += 1
        for w in g.succ[v]:
            if w in comp and w not in pot:
                pot[w] = pot[v] + 1
                queue.append(w)
        for w in g.pred[v]:
            if w in comp and w not in pot:
                pot[w] = pot[v] - 1
                queue.append(w)
    if set(pot) != comp:
        raise InvalidInput("vertex set is not a single weak component")
    d = 0
    for u, v in sorted(g.edges):
        if u in comp and v in comp:
            d = math.gcd(d, abs(pot[u] + 1 - pot[v]))
    return d if d > 0 else None


def digraph_algebraic_length(g: Digraph) -> int | None:
    """Minimum of the component lengths; None when all are infinite."""
    best = None
    for comp in weak_components(g):
        d = algebraic_length(g, comp)
        if d is not None and (best is None or d < best):
            best = d
    return best


def path_image(g: Digraph, start, p: OrientedPath) -> frozenset[int]:
    """Set of endpoints of p-shaped walks starting in `start`."""
    cur = set(start)
    for step in p.steps:
        nxt = set()
        for v in cur:
            nxt.update(g.succ[v] if step == FORWARD else g.pred[v])
        cur = nxt
    return frozenset(cur)


def connected_via(g: Digraph, a: int, b: int, p: OrientedPath) -> bool:
    return b in path_image(g, [a], p)


# ---------------------------------------------------------------------------
# loop theorem


@dataclass
class LoopReport:
    vertex: int
    minimal_set: frozenset | None
    minimal_vertex: int | None


def find_loop_smooth_taylor(g: Digraph, alg: FiniteAlgebra,
                            budget: SearchBudget | None = None) -> LoopReport:
    """A loop vertex guaranteed by smoothness + algebraic length 1 + Taylor.

    When some absorbing subuniverse sits inside a component of algebraic
    length one, a loop inside a minimal absorbing subuniverse is also
    reported.  Absence of any loop on verified input is an implementation
    bug, surfaced as a theorem violation.
    """
    budget = budget or SearchBudget()
    if g.vertices != alg.size:
        raise InvalidInput("vertex set must be the algebra's universe")
    if not g.is_smooth():
        raise InvalidInput("digraph is not smooth")
    comps = weak_components(g)
    length_one = [c for c in comps if algebraic_length(g, c) == 1]
    if not length_one:
        raise InvalidInput("no weak component of algebraic length 1")
    if not is_subuniverse_of_power(alg, g.edge_relation()):
        raise InvalidInput("edge set is not invariant under the algebra")
    alg.require_idempotent()
    if find_taylor_term(alg) is None:
        raise InvalidInput("no Taylor witness found for the algebra")

    loops = g.loops()
    if not loops:
        raise TheoremViolation("smooth + algebraic length 1 + Taylor digraph has no loop")
    report = absorption_report(alg, budget)
    side_sets = [
        S
        for S in ([w.subuniverse for w in report.proper_absorbing]
                  + [frozenset(range(alg.size))])
        if any(S <= c for c in length_one)
    ]
    if side_sets:
        for J in report.minimal_absorbing:
            inside = sorted(v for v in loops if v in J)
            if inside:
                return LoopReport(loops[0], J, inside[0])
        raise TheoremViolation(
            "no loop inside any minimal absorbing subuniverse despite the side condition"
        )
    return LoopReport(loops[0], None, None)


# ---------------------------------------------------------------------------
# circles and the smooth classifier


def is_circle(g: Digraph, component) -> bool:
    """One directed cycle visiting each component vertex once, no chords."""
    comp = sorted(set(component))
    edges = [(u, v) for u, v in g.edges if u in set(comp) and v in set(comp)]
    if len(edges) != len(comp):
        return False
    succ = {}
    for u, v in edges:
        if u in succ:
            return False
        succ[u] = v
    if set(succ) != set(comp):
        return False
    cur = comp[0]
    for _ in range(len(comp)):
        cur = succ[cur]
    if cur != comp[0]:
        return False
    seen = {comp[0]}
    cur = succ[comp[0]]
    while cur not in seen:
        seen.add(cur)
        cur = succ[cur]
    return len(seen) == len(comp)


def is_disjoint_union_of_circles(g: Digraph) -> bool:
    return all(is_circle(g, c) for c in weak_components(g))


def classify_smooth_digraph(g: Digraph, budget: int = 8) -> str:
    """Dichotomy verdict for a smooth digraph via its core's components."""
    from .csp import compute_core, digraph_structure, structure_digraph

    if not g.is_smooth():
        raise InvalidInput("classifier requires a smooth digraph")
    core = compute_core(digraph_structure(g), budget)
    core_g = structure_digraph(core)
    if is_disjoint_union_of_circles(core_g):
        return "PolynomialTime"
    return "NPComplete"


def classify_undirected(g: Digraph) -> str:
    """Bipartite undirected graphs are tractable, the rest NP-complete."""
    if not g.is_symmetric():
        raise InvalidInput("undirected classifier requires a symmetric edge set")
    if g.loops():
        return "PolynomialTime"
    color = [-1] * g.vertices
    for start in range(g.vertices):
        if color[start] != -1:
            continue
        color[start] = 0
        queue = [start]
        qi = 0
        while qi < len(queue):
            v = queue[qi]
            qi += 1
            for w in g.succ[v]:
                if color[w] == -1:
                    color[w] = 1 - color[v]
                    queue.append(w)
                elif color[w] == color[v]:
                    return "NPComplete"
    return "PolynomialTime"


def solve_circle_csp(instance: Digraph, template: Digraph):
    """Homomorphism into a disjoint union of circles, or None.

    A weak component maps onto a circle of length L iff its algebraic length
    is divisible by L (no closed walk of positive algebraic length meaning no
    constraint); the map is reconstructed from potentials mod L.
    """
    if not is_disjoint_union_of_circles(template):
        raise InvalidInput("template is not a disjoint union of circles")
    circles = []
    for comp in weak_components(template):
        order = [min(comp)]
        succ = {u: v for u, v in template.edges if u in comp}
        while len(order) < len(comp):
            order.append(succ[order[-1]])
        circles.append(order)
    circles.sort(key=len)

    mapping = [-1] * instance.vertices
    for comp in weak_components(instance):
        d = algebraic_length(instance, comp)
        target = None
        for circle in circles:
            L = len(circle)
            if d is None or d % L == 0:
                target = circle
                break
        if target is None:
            return None
        L = len(target)
        root = min(comp)
        pot = {root: 0}
        queue = [root]
        qi = 0
        while qi < len(queue):
            v = queue[qi]
            qi += 1
            for w in instance.succ[v]:
                if w in comp and w not in pot:
                    pot[w] = pot[v] + 1
                    queue.append(w)
            for w in instance.pred[v]:
                if w in comp and w not in pot:
                    pot[w] = pot[v] - 1
                    queue.append(w)
        for v in comp:
            mapping[v] = target[pot[v] % L]
    for u, v in instance.edges:
        if (mapping[u], mapping[v]) not in template.edges:
            raise TheoremViolation("reconstructed circle homomorphism failed to verify")
    return tuple(mapping)
