"""Relational structures, homomorphism search, cores, polymorphisms,
pp-formula evaluation, and the template classifier.

One backtracking solver (generalized arc consistency, minimum-remaining-values
variable order, ascending value order) backs every search; polymorphism
searches are homomorphism problems from categorical powers with pinned cells.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

from .core import FiniteAlgebra, OperationTable, decode_tuple, encode_tuple
from .cyclic import next_prime_above
from .digraph import Digraph
from .errors import BudgetExceeded, InvalidInput, TheoremViolation
from .relations import Relation, contains_constant, is_cyclic_relation, shift_orbit

CELL_GUARD = 10**6
COMBO_GUARD = 500_000
NODE_GUARD = 5_000_000
CORE_GUARD = 8


@dataclass(frozen=True)
class RelationalStructure:
    size: int
    relations: tuple[tuple[str, Relation], ...]

    def __post_init__(self):
        names = [name for name, _ in self.relations]
        if len(set(names)) != len(names):
            raise InvalidInput("relation names must be unique")
        for name, rel in self.relations:
            if any(s != self.size for s in rel.sizes):
                raise InvalidInput(f"relation {name!r} is not over the universe")

    def signature(self) -> tuple[tuple[str, int], ...]:
        return tuple((name, rel.arity) for name, rel in self.relations)

    def relation(self, name: str) -> Relation:
        for nm, rel in self.relations:
            if nm == name:
                return rel
        raise InvalidInput(f"unknown relation {name!r}")


def structure(size: int, relations: dict[str, list]) -> RelationalStructure:
    rels = []
    for name, tuples in relations.items():
        tuples = [tuple(t) for t in tuples]
        arity = len(tuples[0]) if tuples else 2
        rels.append((name, Relation(arity, (size,) * arity, frozenset(tuples))))
    return RelationalStructure(size, tuple(rels))


def digraph_structure(g: Digraph) -> RelationalStructure:
    return RelationalStructure(
        g.vertices, (("E", Relation.binary(g.vertices, g.vertices, g.edges)),)
    )


def structure_digraph(a: RelationalStructure) -> Digraph:
    if len(a.relations) != 1 or a.relations[0][1].arity != 2:
        raise InvalidInput("structure is not a digraph")
    return Digraph(a.size, frozenset(a.relations[0][1].tuples))


# ---------------------------------------------------------------------------
# the solver


class _Exhausted(Exception):
    pass


def _normalize(scope, allowed):
    """Collapse repeated scope variables, filtering inconsistent tuples."""
    distinct = []
    first_pos = {}
    for i, v in enumerate(scope):
        if v not in first_pos:
            first_pos[v] = i
            distinct.append(v)
    if len(distinct) == len(scope):
        return tuple(scope), frozenset(allowed)
    kept = []
    for t in allowed:
        if all(t[i] == t[first_pos[v]] for i, v in enumerate(scope)):
            kept.append(tuple(t[first_pos[v]] for v in distinct))
    return tuple(distinct), frozenset(kept)


@dataclass
class CSPSearch:
    nvars: int
    domains: list[set[int]]
    constraints: list  # (scope, allowed frozenset)
    node_budget: int = NODE_GUARD

    def __post_init__(self):
        normed = {}
        for scope, allowed in self.constraints:
            scope, allowed = _normalize(scope, allowed)
            key = scope
            if key in normed:
                normed[key] = normed[key] & allowed
            else:
                normed[key] = allowed
        self.constraints = sorted(normed.items())
        self.touching = [[] for _ in range(self.nvars)]
        for ci, (scope, _) in enumerate(self.constraints):
            for v in scope:
                self.touching[v].append(ci)
        self.nodes = 0

    def _revise(self, domains, queue):
        """Generalized arc consistency to fixpoint; False on a wipeout."""
        while queue:
            ci = queue.pop()
            scope, allowed = self.constraints[ci]
            live = [t for t in allowed if all(t[i] in domains[v] for i, v in enumerate(scope))]
            for i, v in enumerate(scope):
                support = {t[i] for t in live}
                if domains[v] <= support:
                    continue
                domains[v] &= support
                if not domains[v]:
                    return False
                for cj in self.touching[v]:
                    if cj != ci and cj not in queue:
                        queue.append(cj)
        return True

    def solutions(self, domains=None):
        """Yield assignments in deterministic order."""
        if domains is None:
            domains = [set(d) for d in self.domains]
        else:
            domains = [set(d) for d in domains]
        if not self._revise(domains, list(range(len(self.constraints)))):
            return
        yield from self._branch(domains)

    def _branch(self, domains):
        self.nodes += 1
        if self.nodes > self.node_budget:
            raise _Exhausted
        unassigned = [v for v in range(self.nvars) if len(domains[v]) > 1]
        if not unassigned:
            if all(domains[v] for v in range(self.nvars)):
                yield tuple(min(domains[v]) for v in range(self.nvars))
            return
        var = min(unassigned, key=lambda v: (len(domains[v]), v))
        for value in sorted(domains[var]):
            child = [set(d) for d in domains]
            child[var] = {value}
            if self._revise(child, list(self.touching[var])):
                yield from self._branch(child)

    def first(self, domains=None):
        try:
            for sol in self.solutions(domains):
                return sol
        except _Exhausted:
            raise BudgetExceeded(
                f"solver exceeded {self.node_budget} nodes"
            ) from None
        return None


# ---------------------------------------------------------------------------
# homomorphisms and cores


def _hom_search(x: RelationalStructure, a: RelationalStructure,
                domains=None, node_budget: int = NODE_GUARD) -> CSPSearch:
    if x.signature() != a.signature():
        raise InvalidInput("signature mismatch")
    constraints = []
    for (name, rx), (_, ra) in zip(x.relations, a.relations):
        for scope in sorted(rx.tuples):
            constraints.append((scope, ra.tuples))
    search = CSPSearch(
        x.size,
        domains or [set(range(a.size)) for _ in range(x.size)],
        constraints,
        node_budget,
    )
    return search


def verify_homomorphism(x: RelationalStructure, a: RelationalStructure, mapping) -> bool:
    for (name, rx), (_, ra) in zip(x.relations, a.relations):
        for t in rx.tuples:
            if tuple(mapping[v] for v in t) not in ra.tuples:
                return False
    return True


def find_homomorphism(x: RelationalStructure, a: RelationalStructure,
                      node_budget: int = NODE_GUARD):
    """Backtracking with arc-consistency; the result is re-verified atom-by-atom."""
    sol = _hom_search(x, a, node_budget=node_budget).first()
    if sol is None:
        return None
    if not verify_homomorphism(x, a, sol):
        raise TheoremViolation("solver returned a non-homomorphism")
    return sol


def _induced(a: RelationalStructure, kept: list[int]) -> RelationalStructure:
    pos = {v: i for i, v in enumerate(kept)}
    rels = []
    for name, rel in a.relations:
        tuples = [
            tuple(pos[x] for x in t) for t in rel.tuples if all(x in pos for x in t)
        ]
        rels.append((name, Relation(rel.arity, (len(kept),) * rel.arity,
                                    frozenset(tuples))))
    return RelationalStructure(len(kept), tuple(rels))


def compute_core(a: RelationalStructure, budget: int = CORE_GUARD) -> RelationalStructure:
    """Retract along non-surjective endomorphisms until all are bijective."""
    if a.size > budget:
        raise BudgetExceeded(f"core computation guarded at n<={budget} (got {a.size})")
    current = a
    while True:
        found = None
        for missing in range(current.size):
            domains = [
                set(range(current.size)) - {missing} for _ in range(current.size)
            ]
            sol = _hom_search(current, current).first(domains)
            if sol is not None:
                found = sol
                break
        if found is None:
            return current
        kept = sorted(set(found))
        current = _induced(current, kept)


def is_core(a: RelationalStructure, budget: int = CORE_GUARD) -> bool:
    return compute_core(a, budget).size == a.size


# ---------------------------------------------------------------------------
# polymorphisms


def is_polymorphism(a: RelationalStructure, op: OperationTable) -> bool:
    n = a.size
    for name, rel in a.relations:
        for combo in itertools.product(sorted(rel.tuples), repeat=op.arity):
            out = tuple(
                op.table[_cell(tuple(t[j] for t in combo), n)]
                for j in range(rel.arity)
            )
            if out not in rel.tuples:
                return False
    return True


def _cell(args: tuple[int, ...], n: int) -> int:
    idx = 0
    for v in args:
        idx = idx * n + v
    return idx


def _compat_constraints(a: RelationalStructure, m: int, var_of_cell,
                        combo_guard: int = COMBO_GUARD):
    """Indicator constraints: columns of m relation tuples must map into the relation."""
    n = a.size
    constraints = []
    for name, rel in a.relations:
        combos = len(rel.tuples) ** m
        if combos > combo_guard:
            raise BudgetExceeded(
                f"{combos} tuple combinations for {name!r} exceed the combo guard"
            )
        for combo in itertools.product(sorted(rel.tuples), repeat=m):
            scope = tuple(
                var_of_cell(_cell(tuple(t[j] for t in combo), n))
                for j in range(rel.arity)
            )
            constraints.append((scope, rel.tuples))
    return constraints


def idempotent_polymorphisms(a: RelationalStructure, m: int,
                             cell_guard: int = CELL_GUARD,
                             node_budget: int = NODE_GUARD) -> list[OperationTable]:
    """All idempotent arity-m polymorphisms, as a hom search from the m-th power."""
    n = a.size
    if n**m > cell_guard:
        raise BudgetExceeded(f"{n}^{m} cells exceed the guard")
    ncells = n**m
    domains = [set(range(n)) for _ in range(ncells)]
    step = (ncells - 1) // (n - 1) if n > 1 else 1
    for v in range(n):
        domains[v * step] = {v}
    constraints = _compat_constraints(a, m, lambda c: c)
    search = CSPSearch(ncells, domains, constraints, node_budget)
    out = []
    try:
        for sol in search.solutions():
            out.append(OperationTable(f"poly{m}_{len(out)}", m, sol))
    except _Exhausted:
        raise BudgetExceeded(f"polymorphism enumeration exceeded {node_budget} nodes")
    for op in out:
        if not is_polymorphism(a, op):
            raise TheoremViolation("enumerated table is not a polymorphism")
    return out


def polymorphism_algebra(a: RelationalStructure, max_arity: int = 3,
                         cell_guard: int = CELL_GUARD) -> FiniteAlgebra:
    """The algebra of idempotent polymorphisms up to an arity bound."""
    ops = []
    for m in range(1, max_arity + 1):
        for op in idempotent_polymorphisms(a, m, cell_guard):
            ops.append(OperationTable(f"f{len(ops)}", m, op.table))
    return FiniteAlgebra(a.size, tuple(ops))


def find_cyclic_polymorphism(a: RelationalStructure, p: int,
                             cell_guard: int = CELL_GUARD,
                             combo_guard: int = COMBO_GUARD,
                             node_budget: int = NODE_GUARD):
    """An idempotent cyclic arity-p polymorphism, or None after exhaustion.

    Search variables are shift-orbit representatives of argument tuples, so
    cyclicity is built into the encoding; a budget overrun raises instead of
    returning None.
    """
    n = a.size
    if n**p > cell_guard:
        raise BudgetExceeded(f"{n}^{p} cells exceed the guard")
    N = n**p
    rep = {}
    reps = []
    for code in range(N):
        orbit = _orbit(code, n, p)
        r = min(orbit)
        if r == code:
            rep[code] = len(reps)
            reps.append(code)
        else:
            rep[code] = rep[r]
    domains = [set(range(n)) for _ in reps]
    step = (N - 1) // (n - 1) if n > 1 else 1
    for v in range(n):
        domains[rep[v * step]] = {v}
    constraints = _compat_constraints(a, p, lambda c: rep[c], combo_guard)
    search = CSPSearch(len(reps), domains, constraints, node_budget)
    sol = search.first()
    if sol is None:
        return None
    table = tuple(sol[rep[code]] for code in range(N))
    op = OperationTable(f"cyc{p}", p, table)
    if not op.is_idempotent(n):
        raise TheoremViolation("cyclic search produced a non-idempotent table")
    for code in range(N):
        if table[_shift_code(code, n, p)] != table[code]:
            raise TheoremViolation("cyclic search produced a non-cyclic table")
    if not is_polymorphism(a, op):
        raise TheoremViolation("cyclic search produced an incompatible table")
    return op


def _orbit(code: int, n: int, k: int) -> list[int]:
    out = [code]
    cur = code
    while True:
        cur = _shift_code(cur, n, k)
        if cur == code:
            return out
        out.append(cur)


def _shift_code(code: int, n: int, k: int) -> int:
    step = n ** (k - 1)
    return (code % step) * n + code // step


# ---------------------------------------------------------------------------
# pp formulas


@dataclass(frozen=True)
class Atom:
    kind: str  # "rel" | "eq" | "one"
    scope: tuple[int, ...]
    name: str | None = None
    element: int | None = None


@dataclass(frozen=True)
class PPFormula:
    """Conjunction of atoms with existential quantification over non-free variables."""

    nvars: int
    free: tuple[int, ...]
    atoms: tuple[Atom, ...]

    def __post_init__(self):
        for atom in self.atoms:
            if any(not (0 <= v < self.nvars) for v in atom.scope):
                raise InvalidInput("atom scope out of range")
            if atom.kind == "eq" and len(atom.scope) != 2:
                raise InvalidInput("equality atoms are binary")
            if atom.kind == "one" and (len(atom.scope) != 1 or atom.element is None):
                raise InvalidInput("singleton atoms are unary with an element")
        if not self.free:
            raise InvalidInput("pp formulas need at least one free variable")
        if any(not (0 <= v < self.nvars) for v in self.free):
            raise InvalidInput("free variable out of range")


def _atom_tuples(a: RelationalStructure, atom: Atom) -> frozenset:
    if atom.kind == "rel":
        rel = a.relation(atom.name)
        if rel.arity != len(atom.scope):
            raise InvalidInput(f"atom scope does not match arity of {atom.name!r}")
        return rel.tuples
    if atom.kind == "eq":
        return frozenset((v, v) for v in range(a.size))
    if atom.kind == "one":
        if not (0 <= atom.element < a.size):
            raise InvalidInput("singleton element out of universe")
        return frozenset({(atom.element,)})
    raise InvalidInput(f"unknown atom kind {atom.kind!r}")


def eval_pp_formula(a: RelationalStructure, f: PPFormula) -> Relation:
    """Join atoms left to right, projecting out dead bound variables early."""
    needed_later = []
    seen: set[int] = set(f.free)
    for atom in reversed(f.atoms):
        needed_later.append(set(seen))
        seen |= set(atom.scope)
    needed_later.reverse()

    cur_vars: tuple[int, ...] = ()
    cur: set[tuple[int, ...]] = {()}
    for ai, atom in enumerate(f.atoms):
        tuples = _atom_tuples(a, atom)
        seen_scope: list[int] = []
        uniq_new: list[int] = []
        for v in atom.scope:
            if v not in cur_vars and v not in seen_scope:
                uniq_new.append(v)
            seen_scope.append(v)
        merged_vars = tuple(list(cur_vars) + uniq_new)
        pos = {v: i for i, v in enumerate(merged_vars)}
        joined = set()
        for base in cur:
            for t in tuples:
                row = list(base) + [None] * len(uniq_new)
                ok = True
                for i, v in enumerate(atom.scope):
                    j = pos[v]
                    if row[j] is None:
                        row[j] = t[i]
                    elif row[j] != t[i]:
                        ok = False
                        break
                if ok:
                    joined.add(tuple(row))
        keep = [i for i, v in enumerate(merged_vars) if v in needed_later[ai]]
        cur_vars = tuple(merged_vars[i] for i in keep)
        cur = {tuple(row[i] for i in keep) for row in joined}
        if not cur:
            break

    pos = {v: i for i, v in enumerate(cur_vars)}
    out = set()
    loose = [v for v in f.free if v not in pos]
    for row in cur:
        base = [row[pos[v]] if v in pos else None for v in f.free]
        if loose:
            for fill in itertools.product(range(a.size), repeat=len(loose)):
                it = iter(fill)
                out.add(tuple(next(it) if b is None else b for b in base))
        else:
            out.add(tuple(base))
    return Relation(len(f.free), (a.size,) * len(f.free), frozenset(out))


def brute_pp_formula(a: RelationalStructure, f: PPFormula) -> Relation:
    """Assignment enumeration oracle for pp evaluation (exponential)."""
    out = set()
    for assign in itertools.product(range(a.size), repeat=f.nvars):
        ok = True
        for atom in f.atoms:
            vals = tuple(assign[v] for v in atom.scope)
            if vals not in _atom_tuples(a, atom):
                ok = False
                break
        if ok:
            out.add(tuple(assign[v] for v in f.free))
    return Relation(len(f.free), (a.size,) * len(f.free), frozenset(out))


def p_cycle_relation(g: Digraph, p: int,
                     relation_name: str = "E") -> tuple[Relation, PPFormula]:
    """Closed p-walks of a digraph, with their defining pp formula."""
    if p < 2:
        raise InvalidInput("cycle relation needs arity >= 2")
    tuples = set()
    stack = [(v, (v,)) for v in range(g.vertices)]
    while stack:
        v, walk = stack.pop()
        if len(walk) == p:
            if walk[0] in g.succ[v]:
                tuples.add(walk)
            continue
        for w in g.succ[v]:
            stack.append((w, walk + (w,)))
    rel = Relation(p, (g.vertices,) * p, frozenset(tuples))
    if not is_cyclic_relation(rel):
        raise TheoremViolation("closed-walk relation is not cyclic")
    atoms = tuple(
        Atom("rel", (i, (i + 1) % p), name=relation_name) for i in range(p)
    )
    formula = PPFormula(p, tuple(range(p)), atoms)
    return rel, formula


# ---------------------------------------------------------------------------
# generated subpowers via pinned searches


def _pinned_poly_search(a: RelationalStructure, matrix_rows, targets,
                        combo_guard=COMBO_GUARD, node_budget=NODE_GUARD):
    """Is there an idempotent polymorphism f with f(row_j) = target_j for all j?"""
    n = a.size
    m = len(matrix_rows[0])
    ncells = n**m
    domains = [set(range(n)) for _ in range(ncells)]
    step = (ncells - 1) // (n - 1) if n > 1 else 1
    for v in range(n):
        domains[v * step] &= {v}
    for row, t in zip(matrix_rows, targets):
        c = _cell(tuple(row), n)
        domains[c] &= {t}
        if not domains[c]:
            return False
    constraints = _compat_constraints(a, m, lambda c: c, combo_guard)
    search = CSPSearch(ncells, domains, constraints, node_budget)
    return search.first(domains) is not None


def generated_subpower(a: RelationalStructure, seeds, p: int,
                       combo_guard=COMBO_GUARD, node_budget=NODE_GUARD) -> Relation:
    """The least pp-definable (invariant) p-ary relation containing the seeds.

    Membership of each candidate tuple is a pinned polymorphism search over
    the seed matrix; exact but exponential, for desk-scale universes only.
    """
    seeds = sorted(set(tuple(s) for s in seeds))
    if not seeds:
        raise InvalidInput("empty seed set")
    m = len(seeds)
    rows = [[s[j] for s in seeds] for j in range(p)]
    n = a.size
    if n**m > CELL_GUARD:
        raise BudgetExceeded("seed matrix too wide for the pinned search")
    members = set()
    for code in range(n**p):
        t = decode_tuple(code, n, p)
        if _pinned_poly_search(a, rows, t, combo_guard, node_budget):
            members.add(t)
    return Relation(p, (n,) * p, frozenset(members))


# ---------------------------------------------------------------------------
# the template classifier


@dataclass
class TemplateVerdict:
    outcome: str  # "NPComplete" | "ConjecturedTractable" | "Inconclusive"
    prime: int
    core_size: int
    witness_table: OperationTable | None = None
    witness_relation: Relation | None = None
    witness_formula: PPFormula | None = None
    reason: str = ""


def classify_template(a: RelationalStructure,
                      core_guard: int = CORE_GUARD,
                      cell_guard: int = CELL_GUARD,
                      combo_guard: int = COMBO_GUARD,
                      node_budget: int = NODE_GUARD) -> TemplateVerdict:
    """Dichotomy verdict for the core of a template at the smallest safe prime.

    A found cyclic polymorphism is only conjectured tractable; exhaustive
    refutation is NP-complete with a constant-free cyclic witness relation
    where one is extractable; budget exhaustion is reported honestly.
    """
    core = compute_core(a, core_guard)
    p = next_prime_above(core.size)

    # cheap witness first: for a loopless digraph template a nonempty closed
    # p-walk relation is constant-free, cyclic and pp-defined, which settles
    # NP-completeness (and rules out a cyclic polymorphism) without a search
    if len(core.relations) == 1 and core.relations[0][1].arity == 2:
        g = structure_digraph(core)
        if not g.loops():
            cand, cand_formula = p_cycle_relation(g, p, core.relations[0][0])
            if cand.tuples:
                return TemplateVerdict("NPComplete", p, core.size,
                                       witness_relation=cand,
                                       witness_formula=cand_formula)

    try:
        op = find_cyclic_polymorphism(core, p, cell_guard, combo_guard, node_budget)
    except BudgetExceeded as exc:
        return TemplateVerdict("Inconclusive", p, core.size, reason=str(exc))
    if op is not None:
        return TemplateVerdict("ConjecturedTractable", p, core.size,
                               witness_table=op)
    rel = _extract_constant_free_witness(core, p, combo_guard, node_budget)
    return TemplateVerdict("NPComplete", p, core.size,
                           witness_relation=rel,
                           reason="" if rel is not None else
                           "cyclic refutation exhaustive; no witness extracted in budget")


def _extract_constant_free_witness(core, p, combo_guard, node_budget):
    """Constant-free generated subpower among shift orbits, None on budget."""
    n = core.size
    try:
        for code in range(n**p):
            t = decode_tuple(code, n, p)
            if len(set(t)) == 1:
                continue
            if min(encode_tuple(s, n) for s in shift_orbit(t)) < code:
                continue
            orbit = sorted(shift_orbit(t))
            rows_matrix = [[s[j] for s in orbit] for j in range(p)]
            constant_free = True
            for c in range(n):
                if _pinned_poly_search(core, rows_matrix, (c,) * p,
                                       combo_guard, node_budget):
                    constant_free = False
                    break
            if constant_free:
                rel = generated_subpower(core, orbit, p, combo_guard, node_budget)
                if contains_constant(rel) is None and is_cyclic_relation(rel):
                    return rel
    except BudgetExceeded:
        return None
    return None
