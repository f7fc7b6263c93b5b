"""JSON encodings for algebras, terms, relations, digraphs, and templates."""

from __future__ import annotations

import json

from .core import App, FiniteAlgebra, OperationTable, Term, Var
from .digraph import Digraph
from .csp import RelationalStructure
from .errors import InvalidInput
from .relations import Relation


def dumps(obj) -> str:
    return json.dumps(obj, sort_keys=True, indent=2) + "\n"


def algebra_to_json(alg: FiniteAlgebra) -> dict:
    return {
        "size": alg.size,
        "operations": [
            {"name": op.name, "arity": op.arity, "table": list(op.table)}
            for op in alg.operations
        ],
    }


def algebra_from_json(data: dict) -> FiniteAlgebra:
    try:
        ops = tuple(
            OperationTable(o["name"], int(o["arity"]), tuple(int(v) for v in o["table"]))
            for o in data["operations"]
        )
        return FiniteAlgebra(int(data["size"]), ops)
    except (KeyError, TypeError) as exc:
        raise InvalidInput(f"malformed algebra JSON: {exc}") from exc


def term_to_json(t: Term):
    if isinstance(t, Var):
        return ["var", t.index]
    return ["app", t.symbol, [term_to_json(c) for c in t.children]]


def term_from_json(data) -> Term:
    try:
        if data[0] == "var":
            return Var(int(data[1]))
        if data[0] == "app":
            return App(data[1], tuple(term_from_json(c) for c in data[2]))
    except (IndexError, TypeError) as exc:
        raise InvalidInput(f"malformed term JSON: {exc}") from exc
    raise InvalidInput(f"malformed term JSON: unknown tag {data[0]!r}")


def relation_to_json(r: Relation) -> dict:
    return {
        "arity": r.arity,
        "sizes": list(r.sizes),
        "tuples": [list(t) for t in r.sorted_tuples()],
    }


def relation_from_json(data: dict) -> Relation:
    try:
        return Relation(
            int(data["arity"]),
            tuple(int(s) for s in data["sizes"]),
            frozenset(tuple(int(v) for v in t) for t in data["tuples"]),
        )
    except (KeyError, TypeError) as exc:
        raise InvalidInput(f"malformed relation JSON: {exc}") from exc


def digraph_to_json(g: Digraph) -> dict:
    return {
        "vertices": g.vertices,
        "edges": [list(e) for e in sorted(g.edges)],
    }


def digraph_from_json(data: dict) -> Digraph:
    try:
        return Digraph.build(
            int(data["vertices"]), [(int(u), int(v)) for u, v in data["edges"]]
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise InvalidInput(f"malformed digraph JSON: {exc}") from exc


def template_to_json(a: RelationalStructure) -> dict:
    return {
        "size": a.size,
        "relations": [
            {"name": name, "arity": rel.arity,
             "tuples": [list(t) for t in rel.sorted_tuples()]}
            for name, rel in a.relations
        ],
    }


def template_from_json(data: dict) -> RelationalStructure:
    try:
        rels = tuple(
            (
                r["name"],
                Relation(
                    int(r["arity"]),
                    (int(data["size"]),) * int(r["arity"]),
                    frozenset(tuple(int(v) for v in t) for t in r["tuples"]),
                ),
            )
            for r in data["relations"]
        )
        return RelationalStructure(int(data["size"]), rels)
    except (KeyError, TypeError) as exc:
        raise InvalidInput(f"malformed template JSON: {exc}") from exc
