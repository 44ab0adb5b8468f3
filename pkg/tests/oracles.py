"""Reference implementations used only by the tests.

Everything here works on concrete integer tuples rather than on rank
vectors, so it shares no code path with the package beyond the relation
objects it is compared against.
"""

from __future__ import annotations

from functools import lru_cache
from itertools import combinations, product
from math import comb

import numpy as np


# ------------------------------------------------------------ combinatorics

def ordered_bell(n: int) -> int:
    """Number of weak orders on n points: a(n) = sum_k C(n,k) a(n-k)."""
    a = [1]
    for m in range(1, n + 1):
        a.append(sum(comb(m, k) * a[m - k] for k in range(1, m + 1)))
    return a[n]


@lru_cache(maxsize=None)
def delannoy(k: int, m: int) -> int:
    if k == 0 or m == 0:
        return 1
    return delannoy(k - 1, m) + delannoy(k, m - 1) + delannoy(k - 1, m - 1)


def bell(n: int) -> int:
    row = [1]
    for _ in range(n):
        nxt = [row[-1]]
        for v in row:
            nxt.append(nxt[-1] + v)
        row = nxt
    return row[0]


# ------------------------------------------------------- concrete relations

def pattern(values) -> tuple:
    """Pairwise comparison signs of a concrete tuple."""
    return tuple((a > b) - (a < b) for a, b in combinations(values, 2))


def orbit_patterns(rel) -> set:
    """Comparison patterns of the orbits of a package relation."""
    return {pattern(o) for o in rel.orbits}


def concrete_relation(n: int, pred) -> set:
    """Patterns of all tuples over {0..n-1}^n satisfying ``pred``."""
    return {pattern(t) for t in product(range(n), repeat=n) if pred(t)}


DEFINING_PREDICATES = {
    "Rmix": (3, lambda t: t[0] == t[1] or (t[2] < t[0] and t[2] < t[1])),
    "X": (3, lambda t: (t[0] == t[1] < t[2]) or (t[0] == t[2] < t[1]) or (t[1] == t[2] < t[0])),
    "T3": (3, lambda t: (t[0] == t[1] < t[2]) or (t[0] == t[2] < t[1])),
    "Betw": (3, lambda t: t[0] < t[1] < t[2] or t[2] < t[1] < t[0]),
    "Cycl": (3, lambda t: t[0] < t[1] < t[2] or t[1] < t[2] < t[0] or t[2] < t[0] < t[1]),
    "Rmin_le": (3, lambda t: t[0] >= t[1] or t[0] >= t[2]),
    "Rmi": (3, lambda t: t[0] >= t[1] or t[0] > t[2]),
    "Smi": (3, lambda t: t[0] != t[1] or t[0] >= t[2]),
    "<": (2, lambda t: t[0] < t[1]),
    "<=": (2, lambda t: t[0] <= t[1]),
    "!=": (2, lambda t: t[0] != t[1]),
    "=": (2, lambda t: t[0] == t[1]),
}


def rmix_n_pred(t) -> bool:
    return min(t[2:]) < min(t[0], t[1]) or t[0] == t[1]


# ------------------------------------------------------ concrete operations
# Each function maps integer arrays to integers inducing the weak order the
# operation is defined by.  ll and pp use 0 as the threshold.

def _big(x, y):
    return int(max(np.abs(x).max(), np.abs(y).max())) * 4 + 8


def op_min(x, y):
    return np.minimum(x, y)


def op_mi(x, y):
    return np.where(x == y, 3 * x, np.where(x > y, 3 * y + 1, 3 * x + 2))


def op_mx(x, y):
    return np.where(x != y, 2 * np.minimum(x, y), 2 * x + 1)


def op_mix(x, y):
    return np.where(x < y, 3 * x + 1, np.where(x == y, 3 * x + 2, 3 * y))


def op_lex(x, y):
    B = _big(x, y)
    return x * B + y


def op_ll(x, y):
    B = _big(x, y)
    # first argument <= 0: lexicographic; positive: second argument first
    return np.where(x <= 0, x * B + y, B * B * 4 + y * B + x)


def op_pp(x, y):
    B = _big(x, y)
    return np.where(x <= 0, x, B * 4 + y)


def dual(f):
    def g(x, y):
        return -f(-x, -y)
    return g


CONCRETE_OPS = {
    "min": op_min, "mi": op_mi, "mx": op_mx, "mix": op_mix, "lex": op_lex,
    "ll": op_ll, "pp": op_pp,
    "dual-min": dual(op_min), "dual-mi": dual(op_mi), "dual-mx": dual(op_mx),
    "dll": dual(op_ll), "dpp": dual(op_pp),
}


def _codes(arr: np.ndarray) -> np.ndarray:
    n = arr.shape[-1]
    code = np.zeros(arr.shape[:-1], dtype=np.int64)
    for i in range(n):
        for j in range(i + 1, n):
            code = code * 3 + (np.sign(arr[..., i] - arr[..., j]) + 1)
    return code


def concrete_preserves(name: str, rel, span: int = 3) -> bool:
    """Brute force over all tuples of ``rel`` with entries in [-span, span]."""
    n = rel.arity
    allowed = np.array(sorted({int(_codes(np.array(o))) for o in rel.orbits}), dtype=np.int64)
    if len(allowed) == 0:
        return True
    pts = np.array(list(product(range(-span, span + 1), repeat=n)), dtype=np.int64)
    members = pts[np.isin(_codes(pts), allowed)]
    f = CONCRETE_OPS[name]
    image = f(members[:, None, :], members[None, :, :])
    return bool(np.isin(_codes(image), allowed).all())


# ----------------------------------------------------------------- GF(2)

def xor_closed(vectors) -> bool:
    vs = {tuple(v) for v in vectors}
    return all(tuple(a ^ b for a, b in zip(u, w)) in vs for u in vs for w in vs)


def solutions(rows, n: int) -> set:
    """All x in GF(2)^n with every row . x = 0."""
    return {x for x in product((0, 1), repeat=n)
            if all(sum(r[i] * x[i] for i in range(n)) % 2 == 0 for r in rows)}


# ------------------------------------------------- pp evaluation / solving

def _member(rel, values) -> bool:
    return pattern(values) in orbit_patterns(rel)


def brute_eval(free, bound, atoms, relations) -> set:
    """Patterns of free assignments extendable to all variables (values in 0..n-1)."""
    names = list(free) + list(bound)
    n = len(names)
    pats = {s: orbit_patterns(r) for s, r in relations.items()}
    out = set()
    for vals in product(range(n), repeat=n):
        env = dict(zip(names, vals))
        if all(pattern([env[a] for a in args]) in pats[s] for s, args in atoms):
            out.add(pattern(vals[:len(free)]))
    return out


def brute_sat(variables, constraints, relations) -> bool:
    n = len(variables)
    pats = {s: orbit_patterns(r) for s, r in relations.items()}
    for vals in product(range(n), repeat=n):
        env = dict(zip(variables, vals))
        if all(pattern([env[a] for a in args]) in pats[s] for s, args in constraints):
            return True
    return False


def brute_combined_sat(variables, side1, rel1, side2, rel2) -> bool:
    """Two assignments with the same equalities, each satisfying its side."""
    n = len(variables)
    p1 = {s: orbit_patterns(r) for s, r in rel1.items()}
    p2 = {s: orbit_patterns(r) for s, r in rel2.items()}
    by_kernel: dict[tuple, list[bool]] = {}
    for vals in product(range(n), repeat=n):
        env = dict(zip(variables, vals))
        kern = tuple(vals.index(v) for v in vals)
        ok1 = all(pattern([env[a] for a in args]) in p1[s] for s, args in side1)
        ok2 = all(pattern([env[a] for a in args]) in p2[s] for s, args in side2)
        seen = by_kernel.setdefault(kern, [False, False])
        seen[0] |= ok1
        seen[1] |= ok2
    return any(a and b for a, b in by_kernel.values())


# reference values of the concrete mix table on {0..3}^2, keyed by (x, y)
MIX_GRID = {
    (0, 0): 2, (1, 0): 0, (2, 0): 0, (3, 0): 0,
    (0, 1): 1, (0, 2): 1, (0, 3): 1,
    (1, 1): 5, (2, 1): 3, (3, 1): 3, (1, 2): 4, (1, 3): 4,
    (2, 2): 8, (3, 2): 6, (2, 3): 7, (3, 3): 11,
}
