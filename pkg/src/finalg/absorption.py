"""Absorbing subuniverses: detection with witness terms, minimal absorbing
sets, the spreading-term construction, and the Absorption Theorem verdict.

Absorption is semi-decided by a bounded clone search; every report carries
its budget and an explicit completeness flag.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .core import (
    App,
    DEFAULT_CLONE_ARITY,
    DEFAULT_CLONE_TABLES,
    DEFAULT_TABLE_GUARD,
    ARITY_CAP,
    FiniteAlgebra,
    OperationTable,
    Term,
    Var,
    clone_iter,
    construct_universal_generator_term,
    eval_term_grid,
    find_taylor_term,
    generate_subuniverse,
    is_taylor_term,
    renumber_dense,
    star_compose,
    term_arity,
    term_table,
)
from .errors import BudgetExceeded, InvalidInput
from .relations import Relation, is_linked, is_subdirect, link_structure

SUBUNIVERSE_GUARD = 8


@dataclass(frozen=True)
class SearchBudget:
    """Limits for the witness search; all CLI-overridable."""

    max_arity: int = DEFAULT_CLONE_ARITY
    max_tables: int = DEFAULT_CLONE_TABLES
    star_rounds: int = 1
    case_guard: int = DEFAULT_TABLE_GUARD
    subuniverse_guard: int = SUBUNIVERSE_GUARD
    arity_cap: int = ARITY_CAP


@dataclass(frozen=True)
class AbsorptionWitness:
    subuniverse: frozenset
    term: Term
    arity: int


@dataclass
class AbsorptionReport:
    proper_absorbing: list[AbsorptionWitness]
    minimal_absorbing: list[frozenset]
    budget: SearchBudget
    complete: bool

    def witness_for(self, B) -> AbsorptionWitness | None:
        B = frozenset(B)
        for w in self.proper_absorbing:
            if w.subuniverse == B:
                return w
        return None


def _require_subuniverse(alg: FiniteAlgebra, B) -> frozenset:
    B = frozenset(B)
    if not B:
        raise InvalidInput("absorption is defined for nonempty subuniverses")
    if generate_subuniverse(alg, B) != B:
        raise InvalidInput(f"{sorted(B)} is not a subuniverse")
    return B


def check_absorption(alg: FiniteAlgebra, B, t: Term,
                     case_guard: int = DEFAULT_TABLE_GUARD) -> bool:
    """All-but-one-argument-in-B evaluations land in B, checked exhaustively."""
    B = _require_subuniverse(alg, B)
    t = renumber_dense(t)
    m = term_arity(t)
    bs = sorted(B)
    cases = len(bs) ** (m - 1) * alg.size
    if cases > case_guard:
        raise BudgetExceeded(
            f"absorption check needs {cases} cases per coordinate (> guard)"
        )
    universe = list(range(alg.size))
    bset = B
    for j in range(m):
        domains = [bs] * m
        domains[j] = universe
        values = eval_term_grid(alg, t, domains)
        if not all(int(v) in bset for v in np.unique(values)):
            return False
    return True


def check_absorption_table(table: np.ndarray, arity: int, B, size: int) -> bool:
    """Table-level absorption check used by the clone scan."""
    bs = np.array(sorted(B), dtype=np.int64)
    bset = set(int(b) for b in bs)
    full = np.arange(size, dtype=np.int64)
    for j in range(arity):
        idx = np.zeros(1, dtype=np.int64)
        for q in range(arity):
            dom = full if q == j else bs
            idx = (idx[:, None] * size + dom[None, :]).ravel()
        vals = table[idx]
        if not all(int(v) in bset for v in np.unique(vals)):
            return False
    return True


def find_absorption_witness(
    alg: FiniteAlgebra,
    B,
    budget: SearchBudget | None = None,
    extra_terms: tuple = (),
) -> AbsorptionWitness | None:
    """First witness in the fixed search order, or None within budget.

    A None result means no witness within the budget, not a disproof.
    Search order: basic operations, clone tables by arity then discovery
    order, then star compositions of the supplied extra terms.
    """
    budget = budget or SearchBudget()
    B = _require_subuniverse(alg, B)
    if B == frozenset(range(alg.size)):
        t = (
            App(alg.operations[0].name,
                tuple(Var(i) for i in range(alg.operations[0].arity)))
            if alg.operations
            else Var(0)
        )
        return AbsorptionWitness(B, t, term_arity(t))
    for op in alg.operations:
        if check_absorption_table(op.array, op.arity, B, alg.size):
            t = App(op.name, tuple(Var(i) for i in range(op.arity)))
            return AbsorptionWitness(B, t, op.arity)
    for m, key, witness in clone_iter(alg, budget.max_arity, budget.max_tables):
        if m == 0:
            break
        if check_absorption_table(np.array(key, dtype=np.int64), m, B, alg.size):
            return AbsorptionWitness(B, witness, m)
    found = list(extra_terms)
    for _ in range(budget.star_rounds):
        new_layer = []
        for t1, t2 in itertools.product(found, repeat=2):
            cand = star_compose(t1, t2)
            if term_arity(cand) > budget.arity_cap:
                continue
            try:
                if check_absorption(alg, B, cand, budget.case_guard):
                    return AbsorptionWitness(B, cand, term_arity(cand))
            except BudgetExceeded:
                continue
            new_layer.append(cand)
        found = found + new_layer
    return None


def enumerate_subuniverses(alg: FiniteAlgebra,
                           guard: int = SUBUNIVERSE_GUARD) -> list[frozenset]:
    """All nonempty subuniverses, as closures of all nonempty seeds."""
    if alg.size > guard:
        raise BudgetExceeded(
            f"subuniverse enumeration guarded at n<={guard} (got {alg.size})"
        )
    out = set()
    for mask in range(1, 2**alg.size):
        seed = [a for a in range(alg.size) if mask >> a & 1]
        out.add(generate_subuniverse(alg, seed))
    return sorted(out, key=lambda s: (len(s), sorted(s)))


_REPORT_CACHE: dict = {}
_FIRST_WITNESS_CACHE: dict = {}


def absorption_report(alg: FiniteAlgebra,
                      budget: SearchBudget | None = None) -> AbsorptionReport:
    """Witnessed proper absorbing subuniverses and the inclusion-minimal ones.

    Results are cached per (algebra, budget); all inputs are immutable.
    """
    budget = budget or SearchBudget()
    cached = _REPORT_CACHE.get((alg, budget))
    if cached is not None:
        return cached
    alg.require_idempotent()
    subs = enumerate_subuniverses(alg, budget.subuniverse_guard)
    full = frozenset(range(alg.size))
    proper = [B for B in subs if B != full]
    witnesses: dict[frozenset, AbsorptionWitness] = {}

    for op in alg.operations:
        for B in proper:
            if B in witnesses:
                continue
            if check_absorption_table(op.array, op.arity, B, alg.size):
                t = App(op.name, tuple(Var(i) for i in range(op.arity)))
                witnesses[B] = AbsorptionWitness(B, t, op.arity)

    clone_complete = False
    if len(witnesses) < len(proper):
        for m, key, witness in clone_iter(alg, budget.max_arity, budget.max_tables):
            if m == 0:
                clone_complete = True
                break
            if len(witnesses) == len(proper):
                break
            arr = np.array(key, dtype=np.int64)
            for B in proper:
                if B in witnesses:
                    continue
                if check_absorption_table(arr, m, B, alg.size):
                    witnesses[B] = AbsorptionWitness(B, witness, m)
    if len(witnesses) == len(proper):
        clone_complete = True

    # star-composition stage over terms found so far (transitivity style)
    for _ in range(budget.star_rounds):
        if len(witnesses) == len(proper):
            break
        terms = [w.term for _, w in sorted(witnesses.items(), key=lambda kv: (len(kv[0]), sorted(kv[0])))]
        for B in proper:
            if B in witnesses:
                continue
            for t1, t2 in itertools.product(terms, repeat=2):
                cand = star_compose(t1, t2)
                if term_arity(cand) > budget.arity_cap:
                    continue
                try:
                    if check_absorption(alg, B, cand, budget.case_guard):
                        witnesses[B] = AbsorptionWitness(B, cand, term_arity(cand))
                        break
                except BudgetExceeded:
                    continue

    found = [witnesses[B] for B in proper if B in witnesses]
    absorbing_sets = [w.subuniverse for w in found] + [full]
    minimal = [
        S for S in absorbing_sets
        if not any(T < S for T in absorbing_sets)
    ]
    minimal.sort(key=lambda s: (len(s), sorted(s)))
    report = AbsorptionReport(found, minimal, budget, clone_complete)
    _REPORT_CACHE[(alg, budget)] = report
    return report


def find_first_proper_absorbing(alg: FiniteAlgebra,
                                budget: SearchBudget | None = None):
    """First proper absorbing witness in search order, or (None, complete).

    Cheaper than a full report: stops at the first subuniverse any candidate
    absorbs, so algebras whose basic operations already witness absorption
    never touch the clone.  Returns (witness | None, search_complete).
    """
    budget = budget or SearchBudget()
    key = (alg, budget)
    cached = _FIRST_WITNESS_CACHE.get(key)
    if cached is not None:
        return cached
    alg.require_idempotent()
    subs = enumerate_subuniverses(alg, budget.subuniverse_guard)
    full = frozenset(range(alg.size))
    proper = [B for B in subs if B != full]
    result = None
    for op in alg.operations:
        for B in proper:
            if check_absorption_table(op.array, op.arity, B, alg.size):
                t = App(op.name, tuple(Var(i) for i in range(op.arity)))
                result = (AbsorptionWitness(B, t, op.arity), True)
                break
        if result:
            break
    complete = True
    if result is None:
        for m, tab, witness in clone_iter(alg, budget.max_arity, budget.max_tables):
            if m == 0:
                break
            arr = np.array(tab, dtype=np.int64)
            for B in proper:
                if check_absorption_table(arr, m, B, alg.size):
                    result = (AbsorptionWitness(B, witness, m), True)
                    break
            if result:
                break
        else:
            complete = False  # budget-truncated before the fixpoint sentinel
    if result is None:
        result = (None, complete)
    _FIRST_WITNESS_CACHE[key] = result
    return result


def transitivity_compose(alg: FiniteAlgebra, w_cb: AbsorptionWitness,
                         w_ba: AbsorptionWitness,
                         case_guard: int = DEFAULT_TABLE_GUARD) -> AbsorptionWitness:
    """C absorbs B via s and B absorbs A via t, so C absorbs A via s*t."""
    C, B = w_cb.subuniverse, w_ba.subuniverse
    if not C <= B:
        raise InvalidInput("transitivity needs C <= B")
    composed = star_compose(w_cb.term, w_ba.term)
    if not check_absorption(alg, C, composed, case_guard):
        raise InvalidInput(
            "composed term does not absorb: an input witness was invalid"
        )
    return AbsorptionWitness(C, composed, term_arity(composed))


# ---------------------------------------------------------------------------
# spreading term (every pinned coordinate still reaches the whole universe)


def pinned_value_set(alg: FiniteAlgebra, t: Term, b: int, i: int) -> frozenset:
    """Values of t over all argument tuples with position i pinned to b."""
    t = renumber_dense(t)
    m = term_arity(t)
    domains = [list(range(alg.size))] * m
    domains[i] = [b]
    values = eval_term_grid(alg, t, domains)
    return frozenset(int(v) for v in np.unique(values))


def _image_with_pin(table: np.ndarray, arity: int, size: int, j: int, S) -> frozenset:
    dom = np.array(sorted(S), dtype=np.int64)
    full = np.arange(size, dtype=np.int64)
    idx = np.zeros(1, dtype=np.int64)
    for q in range(arity):
        d = dom if q == j else full
        idx = (idx[:, None] * size + d[None, :]).ravel()
    return frozenset(int(v) for v in np.unique(table[idx]))


def _classes_through_chain(alg, chain_tables, base_classes):
    """Fold pinned-value classes outward along a star chain of factor tables.

    For an idempotent outer factor f, the pinned-value sets of f*inner are
    exactly the images of f with one position restricted to a pinned-value
    set of inner and the rest free.
    """
    classes = base_classes
    for table, arity in reversed(chain_tables):
        classes = frozenset(
            _image_with_pin(table, arity, alg.size, j, S)
            for j in range(arity)
            for S in classes
        )
    return classes


@dataclass
class SpreadingTerm:
    term: Term
    arity: int
    stages: int


def construct_spreading_term(alg: FiniteAlgebra, taylor_term: Term,
                             budget: SearchBudget | None = None) -> SpreadingTerm:
    """Iterate v <- s * (taylor * v) until every pinned coordinate spans A.

    Preconditions: idempotent, a verified Taylor term, and no proper
    absorbing subuniverse found within the budget.
    """
    budget = budget or SearchBudget()
    alg.require_idempotent()
    if alg.size == 1:
        return SpreadingTerm(Var(0), 1, 0)
    if is_taylor_term(alg, taylor_term) is None:
        raise InvalidInput("supplied term is not a Taylor term of the algebra")
    witness, _ = find_first_proper_absorbing(alg, budget)
    if witness is not None:
        raise InvalidInput(
            f"precondition fails: {sorted(witness.subuniverse)} is a proper "
            "absorbing subuniverse"
        )

    taylor = renumber_dense(taylor_term)
    t_arity = term_arity(taylor)
    t_table = term_table(alg, taylor, t_arity)

    gen = construct_universal_generator_term(alg)
    s_term = gen.term
    s_factors = []
    for f in gen.factors:
        fa = term_arity(f)
        s_factors.append((term_table(alg, f, fa), fa))

    v = taylor
    v_arity = t_arity
    classes_by_b = {
        b: frozenset(
            frozenset(int(x) for x in np.unique(
                _pin_table(t_table, t_arity, alg.size, i, b)))
            for i in range(t_arity)
        )
        for b in range(alg.size)
    }
    _verify_stage(alg, v, v_arity, classes_by_b, budget)

    stages = 0
    full = frozenset(range(alg.size))
    while any(S != full for b in range(alg.size) for S in classes_by_b[b]):
        stages += 1
        if stages > alg.size:
            raise BudgetExceeded(
                "pinned-value sets stopped growing; a proper absorbing "
                "subuniverse may exist beyond the budget"
            )
        new_chain = s_factors + [(t_table, t_arity)]
        for b in range(alg.size):
            classes_by_b[b] = _classes_through_chain(alg, new_chain, classes_by_b[b])
        v = star_compose(s_term, star_compose(taylor, v))
        v_arity = v_arity * t_arity * term_arity(s_term)
        if v_arity > budget.arity_cap:
            raise BudgetExceeded(
                f"spreading term arity {v_arity} exceeds cap {budget.arity_cap}"
            )
        _verify_stage(alg, v, v_arity, classes_by_b, budget)
    return SpreadingTerm(v, v_arity, stages)


def _pin_table(table: np.ndarray, arity: int, size: int, i: int, b: int) -> np.ndarray:
    idx = np.zeros(1, dtype=np.int64)
    for q in range(arity):
        d = np.array([b], dtype=np.int64) if q == i else np.arange(size, dtype=np.int64)
        idx = (idx[:, None] * size + d[None, :]).ravel()
    return table[idx]


def _verify_stage(alg, v, v_arity, classes_by_b, budget):
    """Direct enumeration cross-check of the staged pinned-value sets."""
    if alg.size**v_arity > budget.case_guard:
        return
    for b in range(alg.size):
        direct = frozenset(
            pinned_value_set(alg, v, b, i) for i in range(v_arity)
        )
        if direct != classes_by_b[b]:
            raise InvalidInput(
                "staged pinned-value sets disagree with direct enumeration"
            )


# ---------------------------------------------------------------------------
# the Absorption Theorem as a checkable verdict


@dataclass
class AbsorptionTheoremVerdict:
    kind: str  # "full" | "absorption_in_a" | "absorption_in_b" | "undecided"
    witness: AbsorptionWitness | None
    budget: SearchBudget


def is_invariant_pair_relation(algA: FiniteAlgebra, algB: FiniteAlgebra,
                               r: Relation) -> bool:
    """r is closed under every shared operation acting as (f^A, f^B)."""
    if algA.signature() != algB.signature():
        raise InvalidInput("the two algebras must share a signature")
    if r.arity != 2 or r.sizes != (algA.size, algB.size):
        raise InvalidInput("relation must be binary over the two universes")
    tuples = sorted(r.tuples)
    for opA, opB in zip(algA.operations, algB.operations):
        m = opA.arity
        for combo in itertools.product(tuples, repeat=m):
            ia = 0
            ib = 0
            for a, b in combo:
                ia = ia * algA.size + a
                ib = ib * algB.size + b
            if (opA.table[ia], opB.table[ib]) not in r.tuples:
                return False
    return True


def absorption_theorem_check(algA: FiniteAlgebra, algB: FiniteAlgebra,
                             r: Relation,
                             budget: SearchBudget | None = None) -> AbsorptionTheoremVerdict:
    """Full product, or a proper absorbing witness in one factor.

    Undecided is only possible when the budgeted search misses a witness;
    on valid inputs the Absorption Theorem rules it out, and the verify
    suite treats it as a failure.
    """
    budget = budget or SearchBudget()
    if not is_invariant_pair_relation(algA, algB, r):
        raise InvalidInput("relation is not a subuniverse of the product")
    if not is_subdirect(r):
        raise InvalidInput("relation is not subdirect")
    linked, _ = is_linked(r)
    if not linked:
        raise InvalidInput("relation is not linked")
    for name, alg in (("A", algA), ("B", algB)):
        alg.require_idempotent()
        if find_taylor_term(alg) is None:
            raise InvalidInput(f"no Taylor witness found for algebra {name}")
    if len(r.tuples) == algA.size * algB.size:
        return AbsorptionTheoremVerdict("full", None, budget)
    witnessA, _ = find_first_proper_absorbing(algA, budget)
    if witnessA is not None:
        return AbsorptionTheoremVerdict("absorption_in_a", witnessA, budget)
    witnessB, _ = find_first_proper_absorbing(algB, budget)
    if witnessB is not None:
        return AbsorptionTheoremVerdict("absorption_in_b", witnessB, budget)
    return AbsorptionTheoremVerdict("undecided", None, budget)


# ---------------------------------------------------------------------------
# helpers for minimal-absorbing product and chain properties


def relation_algebra(algA: FiniteAlgebra, algB: FiniteAlgebra, r: Relation):
    """r viewed as an algebra: universe = sorted pairs, operations pairwise.

    Returns (algebra, pairs) where pairs[i] is the tuple behind element i.
    """
    if not is_invariant_pair_relation(algA, algB, r):
        raise InvalidInput("relation is not closed under the pair action")
    pairs = sorted(r.tuples)
    index = {p: i for i, p in enumerate(pairs)}
    N = len(pairs)
    ops = []
    for opA, opB in zip(algA.operations, algB.operations):
        m = opA.arity
        table = []
        for combo in itertools.product(pairs, repeat=m):
            ia = 0
            ib = 0
            for a, b in combo:
                ia = ia * algA.size + a
                ib = ib * algB.size + b
            table.append(index[(opA.table[ia], opB.table[ib])])
        ops.append(OperationTable(opA.name, m, tuple(table)))
    return FiniteAlgebra(N, tuple(ops)), pairs


def chain_within_minimal(r: Relation, minimalA, minimalB, c: int, d_node):
    """Linking chain from left element c to d_node through minimal absorbing sets.

    d_node is ('L', x) or ('R', y); every chain element is membership-checked
    against the union of the supplied minimal absorbing subuniverses.
    """
    ua = set().union(*minimalA) if minimalA else set()
    ub = set().union(*minimalB) if minimalB else set()
    restricted = Relation.binary(
        r.sizes[0], r.sizes[1],
        [(a, b) for a, b in r.tuples if a in ua and b in ub],
    )
    ls = link_structure(restricted)
    chain = ls.chain(("L", c), d_node)
    for side, x in chain:
        if side == "L" and x not in ua:
            return None
        if side == "R" and x not in ub:
            return None
    return chain
