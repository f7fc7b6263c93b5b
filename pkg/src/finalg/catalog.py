"""Small named algebras used across the test and verification suites."""

from __future__ import annotations

from .core import FiniteAlgebra, algebra


def one_element() -> FiniteAlgebra:
    return algebra(1, {"f": (1, lambda x: x)})


def boolean_meet() -> FiniteAlgebra:
    """Two-element meet semilattice."""
    return algebra(2, {"meet": (2, lambda x, y: x & y)})


def three_chain_meet() -> FiniteAlgebra:
    """Meet semilattice of the chain 0 < 1 < 2."""
    return algebra(3, {"meet": (2, min)})


def boolean_majority() -> FiniteAlgebra:
    return algebra(2, {"maj": (3, lambda x, y, z: (x & y) | (x & z) | (y & z))})


def boolean_affine() -> FiniteAlgebra:
    """The minority operation x + y + z over Z2."""
    return algebra(2, {"aff": (3, lambda x, y, z: (x + y + z) % 2)})


def z3_affine() -> FiniteAlgebra:
    """The Maltsev operation x - y + z over Z3."""
    return algebra(3, {"mal": (3, lambda x, y, z: (x - y + z) % 3)})


def three_majority() -> FiniteAlgebra:
    """Dual discriminator on {0,1,2}: majority when two agree, else first."""

    def dd(x, y, z):
        if y == z:
            return y
        if x == y or x == z:
            return x
        return x

    return algebra(3, {"maj": (3, dd)})


def projections_only() -> FiniteAlgebra:
    """Two-element algebra whose single basic operation is a projection."""
    return algebra(2, {"p0": (2, lambda x, y: x)})


def rock_paper_scissors() -> FiniteAlgebra:
    """Commutative idempotent groupoid where element (i+1) mod 3 beats i."""

    def beats(x, y):
        if x == y:
            return x
        if (x - y) % 3 == 1:
            return x
        return y

    return algebra(3, {"rps": (2, beats)})


def suite_taylor_algebras() -> dict[str, FiniteAlgebra]:
    """The Taylor algebras the acceptance suites quantify over."""
    return {
        "boolean_majority": boolean_majority(),
        "boolean_affine": boolean_affine(),
        "three_majority": three_majority(),
        "z3_affine": z3_affine(),
    }


NAMED = {
    "one_element": one_element,
    "boolean_meet": boolean_meet,
    "three_chain_meet": three_chain_meet,
    "boolean_majority": boolean_majority,
    "boolean_affine": boolean_affine,
    "z3_affine": z3_affine,
    "three_majority": three_majority,
    "projections_only": projections_only,
    "rock_paper_scissors": rock_paper_scissors,
}
