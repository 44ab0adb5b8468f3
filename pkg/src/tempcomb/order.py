"""Finite representation of temporal relations.

A tuple of rationals is described up to order automorphisms by its *weak
order*: the vector of ranks of its coordinates among the sorted distinct
values.  ``(5, 1, 1, 9)`` becomes ``(1, 0, 0, 2)``.  A temporal relation of
arity ``n`` is then nothing more than a set of such rank vectors.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from itertools import permutations
from typing import Iterable, Iterator, Mapping, Sequence

from .errors import ArityError

WeakOrder = tuple[int, ...]
MinTuple = tuple[int, ...]

DEFAULT_CAP = 6


def orbit_of(values: Sequence) -> WeakOrder:
    """Rank vector of ``values`` (any mutually comparable items)."""
    ranks = {v: i for i, v in enumerate(sorted(set(values)))}
    return tuple(ranks[v] for v in values)


def is_weak_order(ranks: Sequence[int]) -> bool:
    if not ranks:
        return False
    return set(ranks) == set(range(max(ranks) + 1))


def restrict(order: Sequence[int], positions: Sequence[int]) -> WeakOrder:
    return orbit_of([order[p] for p in positions])


def blocks(order: WeakOrder) -> int:
    return max(order) + 1


def _extend(orders: Iterable[WeakOrder]) -> Iterator[WeakOrder]:
    # every weak order on n+1 points arises exactly once from its restriction
    # to the first n points
    for w in orders:
        k = max(w) + 1 if w else 0
        for b in range(k):
            yield w + (b,)
        for g in range(k + 1):
            yield tuple(r + 1 if r >= g else r for r in w) + (g,)


@lru_cache(maxsize=None)
def enumerate_weak_orders(n: int) -> tuple[WeakOrder, ...]:
    """All weak orders of length ``n`` in lexicographic order."""
    if n < 1:
        raise ArityError(f"arity must be positive, got {n}")
    if n == 1:
        return ((0,),)
    return tuple(sorted(_extend(enumerate_weak_orders(n - 1))))


@lru_cache(maxsize=None)
def weak_order_index(n: int) -> dict[WeakOrder, int]:
    return {w: i for i, w in enumerate(enumerate_weak_orders(n))}


def check_arity(n: int, cap: int = DEFAULT_CAP) -> None:
    if n < 1:
        raise ArityError(f"arity must be positive, got {n}")
    if n > cap:
        raise ArityError(f"arity {n} exceeds the configured cap {cap}")


def kernel(order: WeakOrder) -> tuple[int, ...]:
    """Equality kernel: each coordinate labelled by its first equal coordinate."""
    first: dict[int, int] = {}
    return tuple(first.setdefault(r, i) for i, r in enumerate(order))


def min_tuple(order: WeakOrder) -> MinTuple:
    return tuple(1 if r == 0 else 0 for r in order)


@dataclass(frozen=True)
class TemporalRelation:
    """A temporal relation stored extensionally as its set of orbits."""

    arity: int
    orbits: frozenset[WeakOrder]
    name: str | None = field(default=None, compare=False)

    def __post_init__(self):
        if self.arity < 1:
            raise ArityError(f"arity must be positive, got {self.arity}")
        orbits = frozenset(tuple(o) for o in self.orbits)
        for o in orbits:
            if len(o) != self.arity or not is_weak_order(o):
                raise ArityError(f"{o!r} is not a weak order of length {self.arity}")
        object.__setattr__(self, "orbits", orbits)

    @classmethod
    def from_predicate(cls, arity: int, pred, name: str | None = None) -> "TemporalRelation":
        return cls(arity, frozenset(w for w in enumerate_weak_orders(arity) if pred(w)), name)

    @classmethod
    def full(cls, arity: int, name: str | None = None) -> "TemporalRelation":
        return cls(arity, frozenset(enumerate_weak_orders(arity)), name)

    @classmethod
    def empty(cls, arity: int, name: str | None = None) -> "TemporalRelation":
        return cls(arity, frozenset(), name)

    def __contains__(self, item) -> bool:
        return orbit_of(item) in self.orbits

    def __len__(self) -> int:
        return len(self.orbits)

    def __iter__(self) -> Iterator[WeakOrder]:
        return iter(sorted(self.orbits))

    def __and__(self, other: "TemporalRelation") -> "TemporalRelation":
        if other.arity != self.arity:
            raise ArityError("intersection of relations with different arities")
        return TemporalRelation(self.arity, self.orbits & other.orbits)

    def __or__(self, other: "TemporalRelation") -> "TemporalRelation":
        if other.arity != self.arity:
            raise ArityError("union of relations with different arities")
        return TemporalRelation(self.arity, self.orbits | other.orbits)

    def named(self, name: str | None) -> "TemporalRelation":
        return TemporalRelation(self.arity, self.orbits, name)

    def dual(self) -> "TemporalRelation":
        """The relation ``{-t : t in R}``: every orbit with its order reversed."""
        return TemporalRelation(
            self.arity,
            frozenset(tuple(max(o) - r for r in o) for o in self.orbits),
            f"-{self.name}" if self.name else None,
        )

    def permute(self, positions: Sequence[int]) -> "TemporalRelation":
        """Relation ``{(t[p0], t[p1], ...) : t in R}``."""
        return TemporalRelation(
            len(positions), frozenset(restrict(o, positions) for o in self.orbits)
        )

    def mask(self) -> int:
        index = weak_order_index(self.arity)
        m = 0
        for o in self.orbits:
            m |= 1 << index[o]
        return m

    @classmethod
    def from_mask(cls, arity: int, mask: int, name: str | None = None) -> "TemporalRelation":
        orders = enumerate_weak_orders(arity)
        return cls(arity, frozenset(w for i, w in enumerate(orders) if mask >> i & 1), name)

    def __repr__(self) -> str:
        label = f" {self.name}" if self.name else ""
        return f"<TemporalRelation{label}/{self.arity} {sorted(self.orbits)}>"


def chi(rel: TemporalRelation) -> frozenset[MinTuple]:
    return frozenset(min_tuple(o) for o in rel.orbits)


def chi0(rel: TemporalRelation) -> frozenset[MinTuple]:
    return chi(rel) | {(0,) * rel.arity}


def preserved_by_all_permutations(rel: TemporalRelation) -> bool:
    """Closed under replacing an orbit by any other with the same kernel."""
    for o in rel.orbits:
        k = max(o) + 1
        for perm in permutations(range(k)):
            if tuple(perm[r] for r in o) not in rel.orbits:
                return False
    return True


@dataclass(frozen=True)
class TemporalStructure:
    """Named temporal relations over the common domain of the rationals."""

    name: str
    relations: Mapping[str, TemporalRelation]

    def __post_init__(self):
        object.__setattr__(self, "relations", dict(self.relations))

    def __getitem__(self, symbol: str) -> TemporalRelation:
        return self.relations[symbol]

    def __contains__(self, symbol: str) -> bool:
        return symbol in self.relations

    def __iter__(self):
        return iter(self.relations)

    def __hash__(self):
        return hash((self.name, tuple(sorted(self.relations))))

    def __eq__(self, other):
        if not isinstance(other, TemporalStructure):
            return NotImplemented
        return self.name == other.name and self.relations == other.relations

    def extended(self, name: str | None = None, **relations: TemporalRelation) -> "TemporalStructure":
        merged = dict(self.relations)
        merged.update(relations)
        return TemporalStructure(name or self.name, merged)

    def with_relation(self, symbol: str, rel: TemporalRelation) -> "TemporalStructure":
        merged = dict(self.relations)
        merged[symbol] = rel
        return TemporalStructure(self.name, merged)

    def renamed(self, prefix: str) -> "TemporalStructure":
        return TemporalStructure(
            self.name, {f"{prefix}{s}": r for s, r in self.relations.items()}
        )

    def dual(self) -> "TemporalStructure":
        return TemporalStructure(f"-{self.name}", {s: r.dual() for s, r in self.relations.items()})

    def find(self, rel: TemporalRelation) -> str | None:
        """Symbol of a relation with exactly the orbits of ``rel``, if any."""
        for s, r in self.relations.items():
            if r.arity == rel.arity and r.orbits == rel.orbits:
                return s
        return None


def has_constant_polymorphism(structure: TemporalStructure) -> bool:
    for rel in structure.relations.values():
        if rel.orbits and (0,) * rel.arity not in rel.orbits:
            return False
    return True


def structure_preserved_by_all_permutations(structure: TemporalStructure) -> bool:
    return all(preserved_by_all_permutations(r) for r in structure.relations.values())
