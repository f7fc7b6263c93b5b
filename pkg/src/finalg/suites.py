"""Named verification suites: theorem property checks over built-in and
seed-generated instances.  The CLI exposes them as `finalg verify <name>`
and the acceptance tests drive the same entry points.
"""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .absorption import SearchBudget, absorption_theorem_check, check_absorption
from .catalog import (
    boolean_affine,
    boolean_majority,
    suite_taylor_algebras,
)
from .core import (
    FiniteAlgebra,
    OperationTable,
    algebra,
    clone_iter,
    find_taylor_term,
    is_cyclic_table,
    power,
)
from .cyclic import (
    arity_spectrum,
    has_cyclic_term,
    smallest_cyclic_prime_check,
)
from .digraph import (
    Digraph,
    algebraic_length,
    find_loop_smooth_taylor,
    solve_circle_csp,
    weak_components,
)
from .csp import RelationalStructure, digraph_structure, find_homomorphism
from .errors import InvalidInput, TheoremViolation
from .relations import Relation, is_linked, is_subdirect

SUITE_NAMES = ("absorption-theorem", "cyclic-prime", "loop-theorem", "spectra", "oracles")


@dataclass
class SuiteReport:
    name: str
    seed: int
    instances: int = 0
    passes: int = 0
    violations: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations and self.passes == self.instances

    def record(self, ok: bool, detail: str = ""):
        self.instances += 1
        if ok:
            self.passes += 1
        else:
            self.violations.append(detail)

    def to_json(self) -> dict:
        return {
            "suite": self.name,
            "seed": self.seed,
            "instances": self.instances,
            "passes": self.passes,
            "violations": self.violations,
            "ok": self.ok,
        }


def run_suite(name: str, seed: int = 1,
              budget: SearchBudget | None = None) -> SuiteReport:
    if name == "absorption-theorem":
        return absorption_theorem_suite(seed, budget)
    if name == "cyclic-prime":
        return cyclic_prime_suite(seed)
    if name == "loop-theorem":
        return loop_theorem_suite(seed)
    if name == "spectra":
        return spectra_suite(seed)
    if name == "oracles":
        return oracles_suite(seed)
    raise InvalidInput(f"unknown suite {name!r}; choose from {', '.join(SUITE_NAMES)}")


# ---------------------------------------------------------------------------
# cyclic-prime: every suite Taylor algebra has a cyclic term at the first prime


def cyclic_prime_suite(seed: int = 1) -> SuiteReport:
    report = SuiteReport("cyclic-prime", seed)
    for name, alg in suite_taylor_algebras().items():
        found = find_taylor_term(alg)
        if found is None:
            report.record(False, f"{name}: no Taylor witness")
            continue
        try:
            p, decision = smallest_cyclic_prime_check(alg, found[0])
            report.record(decision.has_cyclic_term, f"{name}: p={p}")
        except TheoremViolation as exc:
            report.record(False, f"{name}: {exc}")
    return report


# ---------------------------------------------------------------------------
# absorption-theorem: exhaustive linked subdirect proper invariant relations


def invariant_binary_relations(alg: FiniteAlgebra) -> list[Relation]:
    """All subuniverses of the square, by closing every edge subset is too
    expensive; instead filter all binary relations at n <= 3."""
    n = alg.size
    pairs = list(itertools.product(range(n), repeat=2))
    out = []
    flat, offsets, arities = alg.packed
    for mask in range(1, 2 ** len(pairs)):
        chosen = [pairs[i] for i in range(len(pairs)) if mask >> i & 1]
        codes = sorted(a * n + b for a, b in chosen)
        members = kernels.closure_members(flat, offsets, arities, n, 2, codes)
        if len(members) == len(codes):
            out.append(Relation.binary(n, n, chosen))
    return out


def absorption_theorem_suite(seed: int = 1,
                             budget: SearchBudget | None = None) -> SuiteReport:
    report = SuiteReport("absorption-theorem", seed)
    budget = budget or SearchBudget()
    for name, alg in suite_taylor_algebras().items():
        n = alg.size
        full_count = n * n
        for rel in invariant_binary_relations(alg):
            if len(rel.tuples) == full_count:
                continue
            if not is_subdirect(rel):
                continue
            linked, _ = is_linked(rel)
            if not linked:
                continue
            verdict = absorption_theorem_check(alg, alg, rel, budget)
            if verdict.kind == "undecided":
                report.record(False, f"{name}: undecided on {rel.sorted_tuples()}")
            elif verdict.kind == "full":
                report.record(False, f"{name}: proper relation reported full")
            else:
                w = verdict.witness
                ok = check_absorption(alg, w.subuniverse, w.term)
                detail = f"{name}: witness {sorted(w.subuniverse)} failed re-verification"
                report.record(ok, detail if not ok else "")
    return report


# ---------------------------------------------------------------------------
# loop-theorem: random invariant smooth digraphs of algebraic length one


def _random_invariant_digraph(alg: FiniteAlgebra, rng: random.Random) -> Digraph:
    n = alg.size
    pairs = list(itertools.product(range(n), repeat=2))
    count = rng.randint(1, len(pairs))
    chosen = rng.sample(pairs, count)
    codes = sorted(a * n + b for a, b in chosen)
    flat, offsets, arities = alg.packed
    members = kernels.closure_members(flat, offsets, arities, n, 2, codes)
    return Digraph.build(n, [divmod(int(c), n) for c in members])


def loop_theorem_suite(seed: int = 1, instances_per_algebra: int = 60) -> SuiteReport:
    report = SuiteReport("loop-theorem", seed)
    rng = random.Random(seed)
    algebras = []
    for base in (boolean_majority(), boolean_affine()):
        algebras.append(base)
        algebras.append(power(base, 2))
    for alg in algebras:
        for _ in range(instances_per_algebra):
            g = _random_invariant_digraph(alg, rng)
            if not g.is_smooth():
                report.record(True)
                continue
            comps = weak_components(g)
            if not any(algebraic_length(g, c) == 1 for c in comps):
                report.record(True)
                continue
            try:
                loop = find_loop_smooth_taylor(g, alg)
                report.record((loop.vertex, loop.vertex) in g.edges,
                              f"reported loop {loop.vertex} is not a loop")
            except (TheoremViolation, InvalidInput) as exc:
                report.record(False, f"{sorted(g.edges)}: {exc}")
    return report


# ---------------------------------------------------------------------------
# spectra: multiplicativity of the cyclic arity spectrum


def spectra_suite(seed: int = 1, max_k: int = 9) -> SuiteReport:
    report = SuiteReport("spectra", seed)
    alg = boolean_majority()
    spectrum = arity_spectrum(alg, max_k).members
    for m in range(2, max_k + 1):
        for n in range(2, max_k + 1):
            if m * n > max_k:
                continue
            both = m in spectrum and n in spectrum
            prod = (m * n) in spectrum
            report.record(both == prod, f"pair ({m},{n}): {both} vs product {prod}")
    aff = boolean_affine()
    aff_spec = arity_spectrum(aff, 4).members
    report.record(2 not in aff_spec and 4 not in aff_spec,
                  f"affine spectrum {sorted(aff_spec)} should omit 2 and 4")
    return report


# ---------------------------------------------------------------------------
# oracles: decision procedures vs brute force


def all_one_op_two_element_algebras(max_arity: int = 3) -> list[FiniteAlgebra]:
    """Every idempotent 2-element algebra with one basic operation of arity <= 3."""
    out = []
    seen = set()
    for arity in range(1, max_arity + 1):
        for table in itertools.product((0, 1), repeat=2**arity):
            op = OperationTable("f", arity, table)
            if not op.is_idempotent(2):
                continue
            if table in seen:
                continue
            seen.add(table)
            out.append(FiniteAlgebra(2, (op,)))
    return out


def brute_force_has_cyclic(alg: FiniteAlgebra, k: int,
                           max_tables: int = 100_000) -> bool:
    """Clone search oracle: some arity-k clone table is cyclic."""
    for m, key, _term in clone_iter(alg, k, max_tables):
        if m == 0:
            break
        if m == k and is_cyclic_table(np.array(key, dtype=np.int64), k, alg.size):
            return True
    return False


def _random_template(rng: random.Random) -> RelationalStructure:
    n = rng.randint(2, 3)
    rels = []
    for ri in range(rng.randint(1, 2)):
        arity = rng.randint(1, 2)
        universe = list(itertools.product(range(n), repeat=arity))
        count = rng.randint(1, len(universe))
        rels.append((f"R{ri}", Relation(arity, (n,) * arity,
                                        frozenset(rng.sample(universe, count)))))
    return RelationalStructure(n, tuple(rels))


def _random_instance(rng: random.Random, template: RelationalStructure) -> RelationalStructure:
    size = rng.randint(1, 6)
    rels = []
    for name, rel in template.relations:
        universe = list(itertools.product(range(size), repeat=rel.arity))
        count = rng.randint(0, min(len(universe), 2 * size))
        rels.append((name, Relation(rel.arity, (size,) * rel.arity,
                                    frozenset(rng.sample(universe, count)))))
    return RelationalStructure(size, tuple(rels))


def brute_force_homomorphism(x: RelationalStructure, a: RelationalStructure):
    for mapping in itertools.product(range(a.size), repeat=x.size):
        ok = True
        for (name, rx), (_, ra) in zip(x.relations, a.relations):
            for t in rx.tuples:
                if tuple(mapping[v] for v in t) not in ra.tuples:
                    ok = False
                    break
            if not ok:
                break
        if ok:
            return mapping
    return None


def _random_circle_union(rng: random.Random) -> Digraph:
    lengths = [rng.randint(1, 4) for _ in range(rng.randint(1, 3))]
    edges = []
    base = 0
    for L in lengths:
        for i in range(L):
            edges.append((base + i, base + (i + 1) % L))
        base += L
    return Digraph.build(base, edges)


def _random_digraph(rng: random.Random) -> Digraph:
    n = rng.randint(1, 6)
    pairs = list(itertools.product(range(n), repeat=2))
    count = rng.randint(0, min(len(pairs), 10))
    return Digraph.build(n, rng.sample(pairs, count))


def oracles_suite(seed: int = 1, hom_instances: int = 500,
                  circle_instances: int = 200) -> SuiteReport:
    report = SuiteReport("oracles", seed)
    rng = random.Random(seed)

    for alg in all_one_op_two_element_algebras():
        decided = has_cyclic_term(alg, 3).has_cyclic_term
        brute = brute_force_has_cyclic(alg, 3)
        report.record(decided == brute,
                      f"table {alg.operations[0].table}: decision {decided} vs clone {brute}")

    for _ in range(hom_instances):
        template = _random_template(rng)
        instance = _random_instance(rng, template)
        fast = find_homomorphism(instance, template)
        brute = brute_force_homomorphism(instance, template)
        report.record((fast is None) == (brute is None),
                      f"hom search mismatch on |X|={instance.size}")

    for _ in range(circle_instances):
        template = _random_circle_union(rng)
        instance = _random_digraph(rng)
        fast = solve_circle_csp(instance, template)
        brute = brute_force_homomorphism(
            digraph_structure(instance), digraph_structure(template)
        )
        report.record((fast is None) == (brute is None),
                      f"circle solver mismatch on {sorted(instance.edges)}")
    return report
