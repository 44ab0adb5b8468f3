"""Built-in temporal relations, computed from their defining formulas."""

from __future__ import annotations

import re
from functools import lru_cache

from .cnf import Literal, parse_cnf, relation_from_cnf
from .errors import LookupFailure
from .order import TemporalRelation, check_arity

# name -> (arity, CNF over x1..xk)
_CNF_DEFS: dict[str, tuple[int, str]] = {
    "Rmix": (3, "(x1 >= x2 | x1 > x3) & (x2 >= x1 | x2 > x3)"),
    "Rmi": (3, "x1 >= x2 | x1 > x3"),
    "Rmin_le": (3, "x1 >= x2 | x1 >= x3"),
    "Smi": (3, "x1 != x2 | x1 >= x3"),
    "<": (2, "x1 < x2"),
    "<=": (2, "x1 <= x2"),
    "=": (2, "x1 = x2"),
    "!=": (2, "x1 != x2"),
    ">": (2, "x1 > x2"),
    ">=": (2, "x1 >= x2"),
    "FALSE": (1, "false"),
}

# relations given as disjunctions of order chains such as ``x1 < x2 = x3``
_CHAIN_DEFS: dict[str, tuple[int, str]] = {
    "Betw": (3, "x1 < x2 < x3 | x3 < x2 < x1"),
    "Cycl": (3, "x1 < x2 < x3 | x2 < x3 < x1 | x3 < x1 < x2"),
    # arguments (x, y, u, v)
    "Sep": (4, "x1 < x3 < x2 < x4 | x2 < x3 < x1 < x4 | x1 < x4 < x2 < x3 | x2 < x4 < x1 < x3"),
    "X": (3, "x1 = x2 < x3 | x1 = x3 < x2 | x2 = x3 < x1"),
    "T3": (3, "x1 = x2 < x3 | x1 = x3 < x2"),
}


def relation_from_chains(arity: int, text: str, name: str | None = None) -> TemporalRelation:
    """Relation defined by a disjunction of comparison chains over ``x1..xk``."""
    variables = tuple(f"x{i + 1}" for i in range(arity))
    disjuncts = []
    for part in text.split("|"):
        tokens = re.findall(r"<=|>=|!=|<|>|=|[A-Za-z_][A-Za-z0-9_]*", part)
        names, ops = tokens[0::2], tokens[1::2]
        lits = [Literal(a, op, b) for a, op, b in zip(names, ops, names[1:])]
        disjuncts.append(lits)
    pos = {v: i for i, v in enumerate(variables)}

    def pred(o):
        return any(all(l.holds(o[pos[l.left]], o[pos[l.right]]) for l in d) for d in disjuncts)

    return TemporalRelation.from_predicate(arity, pred, name)


_ALIASES = {"Lt": "<", "Le": "<=", "Eq": "=", "Neq": "!=", "Gt": ">", "Ge": ">=", "Rmin": "Rmin_le"}

BUILTIN_NAMES = tuple(_CNF_DEFS) + tuple(_CHAIN_DEFS) + ("Rmix_<n>",)


def rmix_n(n: int, cap: int = 8) -> TemporalRelation:
    """``min(x3..xn) >= min(x1, x2)`` implies ``x1 = x2``."""
    if n < 3:
        raise ValueError(f"Rmix_n needs n >= 3, got {n}")
    check_arity(n, cap)

    def pred(o):
        return o[0] == o[1] or min(o[2:]) < min(o[0], o[1])

    return TemporalRelation.from_predicate(n, pred, f"Rmix_{n}")


@lru_cache(maxsize=None)
def builtin(name: str) -> TemporalRelation:
    """Look up a library relation by name (``Rmix``, ``T3``, ``<=``, ``Rmix_4`` ...).

    A leading ``-`` gives the dual relation.
    """
    if name.startswith("-") and len(name) > 1:
        return builtin(name[1:]).dual().named(name)
    key = _ALIASES.get(name, name)
    if key in _CNF_DEFS:
        arity, text = _CNF_DEFS[key]
        variables = tuple(f"x{i + 1}" for i in range(arity))
        return relation_from_cnf(parse_cnf(text, variables), cap=arity, name=key)
    if key in _CHAIN_DEFS:
        arity, text = _CHAIN_DEFS[key]
        return relation_from_chains(arity, text, key)
    m = re.fullmatch(r"Rmix_?(\d+)", key)
    if m:
        return rmix_n(int(m.group(1)))
    raise LookupFailure(f"unknown builtin relation {name!r}")
