"""Linear algebra over GF(2) for min-indicator sets.

Vectors are Python ints used as bitsets: bit ``i`` is coordinate ``i``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

from .order import TemporalRelation, chi0, enumerate_weak_orders, min_tuple


def to_bits(vec: Sequence[int]) -> int:
    return sum(1 << i for i, b in enumerate(vec) if b)


def from_bits(bits: int, n: int) -> tuple[int, ...]:
    return tuple(bits >> i & 1 for i in range(n))


def rref(rows: Iterable[int], n: int) -> list[int]:
    """Reduced row echelon basis of the row span; the pivot of a row is its highest bit."""
    basis: list[int] = []
    for row in rows:
        for b in basis:
            if row >> (b.bit_length() - 1) & 1:
                row ^= b
        if row:
            pivot = row.bit_length() - 1
            basis = [b ^ row if b >> pivot & 1 else b for b in basis]
            basis.append(row)
    return sorted(basis, reverse=True)


def span(basis: Sequence[int]) -> set[int]:
    out = {0}
    for b in basis:
        out |= {v ^ b for v in out}
    return out


def null_space(basis: Sequence[int], n: int) -> list[int]:
    """Rows ``a`` with ``a . v = 0`` for every ``v`` in the span of ``basis``."""
    pivots = {b.bit_length() - 1: b for b in basis}
    free = [i for i in range(n) if i not in pivots]
    out = []
    for f in free:
        # the equation sets x_f = sum of the pivot coordinates it feeds
        a = 1 << f
        for p, b in pivots.items():
            if b >> f & 1:
                a |= 1 << p
        out.append(a)
    return rref(out, n)


@dataclass(frozen=True)
class GF2System:
    """A linear subspace of GF(2)^n, held as a reduced row echelon basis."""

    n: int
    basis: tuple[int, ...]

    def vectors(self) -> set[tuple[int, ...]]:
        return {from_bits(v, self.n) for v in span(self.basis)}

    def equations(self) -> list[tuple[int, ...]]:
        """Rows of a homogeneous system ``A x = 0`` whose solutions are the span."""
        return [from_bits(a, self.n) for a in null_space(self.basis, self.n)]

    def satisfies(self, vec: Sequence[int]) -> bool:
        x = to_bits(vec)
        return all(bin(a & x).count("1") % 2 == 0 for a in null_space(self.basis, self.n))

    def format_equations(self, names: Sequence[str] | None = None) -> list[str]:
        names = names or [f"x{i + 1}" for i in range(self.n)]
        out = []
        for row in self.equations():
            terms = [names[i] for i, b in enumerate(row) if b]
            out.append(" + ".join(terms) + " = 0")
        return out


def is_linear(vectors: Iterable[Sequence[int]]) -> bool:
    vs = {to_bits(v) for v in vectors}
    return 0 in vs and all(a ^ b in vs for a in vs for b in vs)


def chi0_system(rel: TemporalRelation) -> GF2System | None:
    """The space chi0(rel) as a GF2System, or None when it is not closed under addition."""
    vectors = chi0(rel)
    if not is_linear(vectors):
        return None
    return GF2System(rel.arity, tuple(rref((to_bits(v) for v in vectors), rel.arity)))


def determined_by_min_tuples(rel: TemporalRelation) -> bool:
    """chi0(rel) is a linear space and rel is exactly the tuples whose min-tuple lies in it.

    Such relations are preserved by mx.  The converse fails: a relation
    preserved by mx may need several conjuncts on different variable subsets.
    """
    system = chi0_system(rel)
    if system is None:
        return False
    allowed = system.vectors()
    expected = {o for o in enumerate_weak_orders(rel.arity) if min_tuple(o) in allowed}
    return expected == set(rel.orbits)
