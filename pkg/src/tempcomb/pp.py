"""Primitive positive formulas over temporal structures.

A formula is an existentially quantified conjunction of atoms.  Evaluation
decides, for every weak order of the free variables, whether some placement
of the bound variables on the same line satisfies every atom.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from functools import lru_cache
from itertools import count
from typing import Iterable, Mapping, Sequence

from .errors import ArityError, SignatureError
from .order import TemporalRelation, TemporalStructure, enumerate_weak_orders, orbit_of
from .syntax import TokenStream

EVAL_CAP = 12

EQ = TemporalRelation(2, frozenset({(0, 0)}), "=")
_INFIX = {"<", "<=", "=", "!="}
_SWAP = {">": "<", ">=": "<="}


@dataclass(frozen=True)
class Atom:
    symbol: str
    args: tuple[str, ...]

    def __post_init__(self):
        object.__setattr__(self, "args", tuple(self.args))

    def rename(self, mapping: Mapping[str, str]) -> "Atom":
        return Atom(self.symbol, tuple(mapping.get(a, a) for a in self.args))

    def __str__(self) -> str:
        if self.symbol in _INFIX and len(self.args) == 2:
            return f"{self.args[0]} {_pretty(self.symbol)} {self.args[1]}"
        return f"{self.symbol}({','.join(self.args)})"


def _pretty(symbol: str) -> str:
    return {"<=": "≤", "!=": "≠"}.get(symbol, symbol)


def _natural_key(name: str):
    m = re.fullmatch(r"(.*?)(\d+)", name)
    return (m.group(1), int(m.group(2))) if m else (name, -1)


@dataclass(frozen=True)
class PPFormula:
    free: tuple[str, ...]
    bound: tuple[str, ...] = ()
    atoms: tuple[Atom, ...] = field(default_factory=tuple)

    def __post_init__(self):
        object.__setattr__(self, "free", tuple(self.free))
        object.__setattr__(self, "bound", tuple(self.bound))
        object.__setattr__(self, "atoms", tuple(self.atoms))
        names = self.free + self.bound
        if len(set(names)) != len(names):
            raise ValueError("free and bound variables must be distinct")
        known = set(names)
        for atom in self.atoms:
            for a in atom.args:
                if a not in known:
                    raise ValueError(f"variable {a!r} in {atom} is neither free nor bound")

    @property
    def variables(self) -> tuple[str, ...]:
        return self.free + self.bound

    def symbols(self) -> set[str]:
        return {a.symbol for a in self.atoms}

    def __str__(self) -> str:
        body = " ∧ ".join(str(a) for a in self.atoms) if self.atoms else "true"
        if not self.bound:
            return body
        head = "∃" + ",".join(self.bound)
        if len(self.atoms) == 1:
            return f"{head}. {body}"
        return f"{head} ({body})"

    def rename(self, mapping: Mapping[str, str]) -> "PPFormula":
        return PPFormula(
            tuple(mapping.get(v, v) for v in self.free),
            tuple(mapping.get(v, v) for v in self.bound),
            tuple(a.rename(mapping) for a in self.atoms),
        )

    def check_signature(self, structure: TemporalStructure) -> None:
        for atom in self.atoms:
            rel = lookup(structure, atom.symbol)
            if rel.arity != len(atom.args):
                raise SignatureError(
                    f"{atom.symbol} has arity {rel.arity} but is applied to {len(atom.args)} variables"
                )


def lookup(structure: TemporalStructure, symbol: str) -> TemporalRelation:
    if symbol in structure:
        return structure[symbol]
    if symbol == "=":
        return EQ
    raise SignatureError(f"unknown relation symbol {symbol!r} in structure {structure.name!r}")


# ------------------------------------------------------------------ parsing

def parse_pp(text: str, free: Sequence[str] | None = None) -> PPFormula:
    """Parse ``∃h (X(z,z,h) ∧ X(x,y,h))``, ``exists z. T3(x,y,z)``, ``x < y & R(x,y,z)``.

    Binary comparisons may be written infix; ``x > y`` and ``x >= y`` become
    ``<``/``<=`` atoms with the arguments swapped.  Without ``free`` the free
    variables are taken in natural order.
    """
    stream = TokenStream(text)
    formula = parse_pp_tokens(stream, free)
    stream.expect("eof")
    return formula


def parse_pp_tokens(stream: TokenStream, free: Sequence[str] | None = None,
                    stop: Iterable[str] = ("eof", ";", "}")) -> PPFormula:
    bound: list[str] = []
    atoms: list[Atom] = []
    seen: list[str] = []

    def note(name: str) -> None:
        if name not in seen:
            seen.append(name)

    def quantified() -> None:
        while stream.accept("exists"):
            while True:
                tok = stream.expect("ident")
                if tok.text in bound:
                    raise stream.error(f"variable {tok.text!r} bound twice", tok)
                bound.append(tok.text)
                if not stream.accept(","):
                    break
            stream.accept(".")
        conjunction()

    def conjunction() -> None:
        while True:
            item()
            if not stream.accept("amp"):
                return

    def item() -> None:
        if stream.accept("("):
            quantified()
            stream.expect(")")
            return
        if stream.at("exists"):
            quantified()
            return
        if stream.at("ident", "true"):
            stream.next()
            return
        name = stream.expect("ident")
        if stream.accept("("):
            args = []
            if not stream.at(")"):
                while True:
                    args.append(stream.expect("ident").text)
                    if not stream.accept(","):
                        break
            stream.expect(")")
            for a in args:
                note(a)
            atoms.append(Atom(name.text, tuple(args)))
            return
        op = stream.expect("op")
        right = stream.expect("ident")
        note(name.text)
        note(right.text)
        if op.text in _SWAP:
            atoms.append(Atom(_SWAP[op.text], (right.text, name.text)))
        else:
            atoms.append(Atom(op.text, (name.text, right.text)))

    quantified()
    free_vars = [v for v in seen if v not in bound]
    if free is None:
        free = sorted(free_vars, key=_natural_key)
    else:
        free = list(free)
        for v in free_vars:
            if v not in free:
                raise stream.error(f"variable {v!r} is neither free nor bound")
    for v in bound:
        if v not in seen:
            raise stream.error(f"bound variable {v!r} is never used")
    return PPFormula(tuple(free), tuple(bound), tuple(atoms))


# --------------------------------------------------------------- evaluation

def _insertions(ranks: tuple[int, ...]):
    """Ways to add one more point to a weak order given as ranks."""
    k = max(ranks) + 1 if ranks else 0
    for b in range(k):
        yield ranks + (b,)
    for g in range(k + 1):
        yield tuple(r + 1 if r >= g else r for r in ranks) + (g,)


def _components(formula: PPFormula):
    """Group bound variables linked through atoms; each with its atoms and free neighbours."""
    parent = {v: v for v in formula.bound}

    def find(v):
        while parent[v] != v:
            parent[v] = parent[parent[v]]
            v = parent[v]
        return v

    bound = set(formula.bound)
    for atom in formula.atoms:
        bs = [a for a in atom.args if a in bound]
        for a, b in zip(bs, bs[1:]):
            parent[find(a)] = find(b)
    groups: dict[str, list[str]] = {}
    for v in formula.bound:
        groups.setdefault(find(v), []).append(v)
    out = []
    for members in groups.values():
        ms = set(members)
        atoms = [a for a in formula.atoms if ms & set(a.args)]
        free = sorted({x for a in atoms for x in a.args if x not in bound}, key=formula.free.index)
        out.append((members, atoms, free))
    return out


def _order_members(members, atoms, placed: set[str]) -> list[str]:
    order: list[str] = []
    done = set(placed)
    remaining = list(members)
    while remaining:
        def score(v):
            linked = sum(1 for a in atoms if v in a.args and all(x in done or x == v for x in a.args))
            touching = sum(1 for a in atoms if v in a.args)
            return (-linked, -touching, members.index(v))
        v = min(remaining, key=score)
        order.append(v)
        done.add(v)
        remaining.remove(v)
    return order


class _ComponentSearch:
    def __init__(self, members, atoms, free, structure: TemporalStructure):
        self.free = list(free)
        self.order = _order_members(members, atoms, set(free))
        names = self.free + self.order
        self.pos = {v: i for i, v in enumerate(names)}
        # atoms grouped by the step at which their last variable gets placed
        self.checks: list[list[tuple[tuple[int, ...], frozenset]]] = [[] for _ in self.order]
        base_atoms = []
        for atom in atoms:
            idx = tuple(self.pos[a] for a in atom.args)
            orbits = lookup(structure, atom.symbol).orbits
            step = max(idx) - len(self.free)
            if step < 0:
                base_atoms.append((idx, orbits))
            else:
                self.checks[step].append((idx, orbits))
        self.base = base_atoms
        self.memo: dict[tuple[int, ...], bool] = {}

    def exists(self, free_ranks: tuple[int, ...]) -> bool:
        key = orbit_of(free_ranks) if free_ranks else ()
        hit = self.memo.get(key)
        if hit is None:
            hit = self._search(key, 0)
            self.memo[key] = hit
        return hit

    def _search(self, ranks: tuple[int, ...], step: int) -> bool:
        if step == len(self.order):
            return True
        for cand in _insertions(ranks):
            if all(orbit_of([cand[i] for i in idx]) in orbits for idx, orbits in self.checks[step]):
                if self._search(cand, step + 1):
                    return True
        return False


def eval_pp(formula: PPFormula, structure: TemporalStructure, cap: int = EVAL_CAP) -> TemporalRelation:
    """The relation defined by ``formula`` over ``structure``, on its free variables."""
    formula.check_signature(structure)
    if len(formula.variables) > cap:
        raise ArityError(f"formula has {len(formula.variables)} variables, cap is {cap}")
    k = len(formula.free)
    if k == 0:
        raise ArityError("formula has no free variables")
    fpos = {v: i for i, v in enumerate(formula.free)}
    bound = set(formula.bound)
    free_atoms = [
        (tuple(fpos[a] for a in atom.args), lookup(structure, atom.symbol).orbits)
        for atom in formula.atoms
        if not bound & set(atom.args)
    ]
    searches = []
    for members, atoms, free in _components(formula):
        search = _ComponentSearch(members, atoms, free, structure)
        searches.append((search, [fpos[v] for v in free]))
    orbits = set()
    for o in enumerate_weak_orders(k):
        if not all(orbit_of([o[i] for i in idx]) in rel for idx, rel in free_atoms):
            continue
        if all(s.exists(tuple(o[i] for i in idx)) for s, idx in searches):
            orbits.add(o)
    return TemporalRelation(k, frozenset(orbits))


# ------------------------------------------------------------- substitution

def substitute(formula: PPFormula, definitions: Mapping[str, PPFormula]) -> PPFormula:
    """Replace atoms over defined symbols by the defining formulas, with fresh bound names."""
    taken = set(formula.variables)
    fresh = count(1)
    bound = list(formula.bound)
    atoms: list[Atom] = []

    def new_name(base: str) -> str:
        stem = re.sub(r"\d+$", "", base) or "w"
        while True:
            name = f"{stem}{next(fresh)}"
            if name not in taken:
                taken.add(name)
                return name

    def expand(atom: Atom) -> None:
        d = definitions.get(atom.symbol)
        if d is None:
            atoms.append(atom)
            return
        if len(d.free) != len(atom.args):
            raise SignatureError(f"{atom.symbol} defined with {len(d.free)} free variables")
        mapping = dict(zip(d.free, atom.args))
        for b in d.bound:
            mapping[b] = new_name(b)
            bound.append(mapping[b])
        for inner in d.atoms:
            expand(inner.rename(mapping))

    for atom in formula.atoms:
        expand(atom)
    return PPFormula(formula.free, tuple(bound), tuple(atoms))


# ---------------------------------------------------------------- R^mix_n

def rmix_n_inductive(n: int, symbol: str = "Rmix") -> PPFormula:
    """pp-definition of R^mix_n from R^mix, built by adding one coordinate at a time.

    ``R^mix_n(x1..xn)`` iff ``∃h (R^mix_{n-1}(x1, h, x3..x_{n-1}) ∧ R^mix(h, x2, xn))``.
    """
    if n < 3:
        raise ValueError(f"Rmix_n needs n >= 3, got {n}")
    xs = tuple(f"x{i}" for i in range(1, n + 1))
    if n == 3:
        return PPFormula(xs, (), (Atom(symbol, xs),))
    inner = rmix_n_inductive(n - 1, symbol)
    h = f"h{n}"
    mapping = {"x2": h}
    inner = inner.rename(mapping)
    return PPFormula(xs, inner.bound + (h,), inner.atoms + (Atom(symbol, (h, "x2", xs[-1])),))


@lru_cache(maxsize=None)
def _rmix_structure() -> TemporalStructure:
    from .library import builtin

    return TemporalStructure("Q;<,Rmix", {"<": builtin("<"), "Rmix": builtin("Rmix")})


def rmix_n_via_induction(n: int) -> TemporalRelation:
    return eval_pp(rmix_n_inductive(n), _rmix_structure())
