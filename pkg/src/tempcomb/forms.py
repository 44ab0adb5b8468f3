"""Syntactic normal forms for relations preserved by pp, min, mi, mix and ll.

Recognition is a purely syntactic match on each clause.  Synthesis enumerates
every clause of the requested shape over the relation's variables, keeps the
ones the relation entails, and checks whether their conjunction already
defines the relation.  A deterministic greedy pass then removes redundant
clauses and literals.
"""

from __future__ import annotations

from collections import Counter
from functools import lru_cache
from itertools import combinations, product

from .cnf import Clause, Literal, OrderCNF, clause_truth, truth_to_mask
from .order import DEFAULT_CAP, TemporalRelation, check_arity, enumerate_weak_orders

FORMS = ("pp", "min", "mi", "mix", "ll")
SYNTH_FORMS = ("pp", "min", "mi", "mix")

# connectives allowed between the head and the other variables
_HEAD_OPS = {"pp": ("!=", ">="), "min": (">", ">="), "mi": ("!=", ">", ">=")}


def _oriented(lit: Literal, head: str) -> Literal | None:
    o = lit.oriented(head)
    if o is None:
        return None
    if o.op in ("<", "<="):
        return None
    return o


def _head_clause(clause: Clause, form: str) -> bool:
    """Some variable heads every literal with an allowed connective."""
    if not clause:
        return True
    allowed = _HEAD_OPS[form]
    names = {lit.left for lit in clause} | {lit.right for lit in clause}
    for head in sorted(names):
        oriented = [_oriented(lit, head) for lit in clause]
        if any(o is None or o.op not in allowed for o in oriented):
            continue
        if form == "mi" and sum(o.op == ">=" for o in oriented) > 1:
            continue
        return True
    return False


def _mix_single(clause: Clause) -> bool:
    """``x != z1 | ... | x > y1 | ...`` for a common head ``x``."""
    if not clause:
        return True
    names = {lit.left for lit in clause} | {lit.right for lit in clause}
    for head in sorted(names):
        oriented = [_oriented(lit, head) for lit in clause]
        if all(o is not None and o.op in ("!=", ">") for o in oriented):
            return True
    return False


def _mix_half(clause: Clause):
    """``(x, y, Z)`` when the clause reads ``x >= y | x > z1 | ... ``, else None."""
    names = {lit.left for lit in clause} | {lit.right for lit in clause}
    for head in sorted(names):
        oriented = [_oriented(lit, head) for lit in clause]
        if any(o is None for o in oriented):
            continue
        geq = [o.right for o in oriented if o.op == ">="]
        gt = [o.right for o in oriented if o.op == ">"]
        if len(geq) == 1 and len(gt) == len(oriented) - 1:
            return head, geq[0], frozenset(gt)
    return None


def _ll_clause(clause: Clause) -> bool:
    if not clause:
        return True
    core = [lit for lit in clause if lit.op != "!="]
    neqs = [lit for lit in clause if lit.op == "!="]
    core_vars: set[str] = set()
    if core:
        names = {lit.left for lit in core} | {lit.right for lit in core}
        ok = False
        for head in sorted(names):
            oriented = [_oriented(lit, head) for lit in core]
            if any(o is None for o in oriented):
                continue
            ops = [o.op for o in oriented]
            # x1 > x2 | ... | x1 > xm, or x1 >= x2 (m = 2 with the equality part)
            if all(op == ">" for op in ops) or ops == [">="]:
                ok = True
                core_vars = {head} | {o.right for o in oriented}
                break
        if not ok:
            return False
    used = set(core_vars)
    for lit in neqs:
        pair = {lit.left, lit.right}
        if len(pair) < 2 or pair & used:
            return False
        used |= pair
    return True


def recognize_form(formula: OrderCNF, form: str) -> bool:
    """Whether every clause of ``formula`` has the shape of the given normal form."""
    if form not in FORMS:
        raise ValueError(f"unknown form {form!r}")
    clauses = formula.clauses
    if form in _HEAD_OPS:
        return all(_head_clause(c, form) for c in clauses)
    if form == "ll":
        return all(_ll_clause(c) for c in clauses)
    # mix: single clauses, plus clauses with one >= that pair up into phi^mix
    halves: Counter = Counter()
    for c in clauses:
        if _mix_single(c):
            continue
        half = _mix_half(c)
        if half is None:
            return False
        halves[half] += 1
    for (x, y, z), count in halves.items():
        if halves.get((y, x, z), 0) != count or x == y:
            return False
    return True


# ---------------------------------------------------------------- synthesis

def _candidates(form: str, variables: tuple[str, ...]) -> list[tuple[Clause, ...]]:
    """Candidate units (one clause, or a phi^mix pair) in deterministic order."""
    units: list[tuple[Clause, ...]] = [((),)]
    if form in _HEAD_OPS:
        ops = _HEAD_OPS[form]
        for head in variables:
            others = [v for v in variables if v != head]
            for choice in product((None,) + ops, repeat=len(others)):
                if form == "mi" and choice.count(">=") > 1:
                    continue
                clause = tuple(Literal(head, op, v) for v, op in zip(others, choice) if op)
                if clause:
                    units.append((clause,))
        return units
    if form != "mix":
        raise ValueError(f"no synthesizer for form {form!r}")
    for head in variables:
        others = [v for v in variables if v != head]
        for choice in product((None, "!=", ">"), repeat=len(others)):
            clause = tuple(Literal(head, op, v) for v, op in zip(others, choice) if op)
            if clause:
                units.append((clause,))
    for x, y in combinations(variables, 2):
        rest = [v for v in variables if v not in (x, y)]
        for r in range(len(rest) + 1):
            for zs in combinations(rest, r):
                units.append(_mix_pair(x, y, zs))
    return units


def _mix_pair(x: str, y: str, zs) -> tuple[Clause, Clause]:
    return (
        (Literal(x, ">=", y),) + tuple(Literal(x, ">", z) for z in zs),
        (Literal(y, ">=", x),) + tuple(Literal(y, ">", z) for z in zs),
    )


@lru_cache(maxsize=None)
def _candidate_masks(form: str, n: int) -> tuple[tuple[tuple[Clause, ...], int], ...]:
    variables = tuple(f"x{i + 1}" for i in range(n))
    out = []
    seen = set()
    for unit in _candidates(form, variables):
        mask = -1
        for clause in unit:
            mask &= truth_to_mask(clause_truth(clause, variables))
        key = (unit, mask)
        if key not in seen:
            seen.add(key)
            out.append((unit, mask))
    return tuple(out)


def _unit_size(unit) -> int:
    return sum(len(c) for c in unit)


def _shrinks(unit: tuple[Clause, ...]):
    """Replacements for ``unit`` with one literal fewer that keep the shape.

    Each replacement is a list of units.
    """
    if len(unit) == 1:
        (clause,) = unit
        for i in range(len(clause)):
            yield [(clause[:i] + clause[i + 1:],)]
        return
    cx, cy = unit
    x, y = cx[0].left, cy[0].left
    zs = [lit.right for lit in cx[1:]]
    for i in range(len(zs)):
        yield [_mix_pair(x, y, zs[:i] + zs[i + 1:])]
    # without the >= literals the pair splits into two single clauses
    if zs:
        yield [(cx[1:],), (cy[1:],)]


def _unit_mask(unit: tuple[Clause, ...], n: int) -> int:
    variables = tuple(f"x{i + 1}" for i in range(n))
    mask = -1
    for clause in unit:
        mask &= truth_to_mask(clause_truth(clause, variables))
    return mask


def synthesize_form(rel: TemporalRelation, form: str, cap: int = DEFAULT_CAP,
                    variables: tuple[str, ...] | None = None) -> OrderCNF | None:
    """Reduced CNF of the requested form defining ``rel``, or None if none exists."""
    if form not in SYNTH_FORMS:
        raise ValueError(f"no synthesizer for form {form!r}")
    n = rel.arity
    check_arity(n, cap)
    target = rel.mask()
    full = (1 << _orbit_count(n)) - 1
    entailed = [(u, m) for u, m in _candidate_masks(form, n) if target & ~m & full == 0]
    conj = full
    for _, m in entailed:
        conj &= m
    if conj != target:
        return None
    # a unit implied by a stronger entailed unit is never needed
    prime = []
    for u, m in entailed:
        if any(w != m and w & ~m & full == 0 for _, w in entailed):
            continue
        prime.append((u, m))
    # units with the same mask: keep the first (smallest) one
    seen: set[int] = set()
    kept = []
    for u, m in sorted(prime, key=lambda um: (_unit_size(um[0]), str(um[0]))):
        if m not in seen:
            seen.add(m)
            kept.append((u, m))
    prime = kept
    units = _reduce(prime, target, full, n)
    names = tuple(f"x{i + 1}" for i in range(n))
    clauses = [c for u, _ in units for c in u]
    formula = OrderCNF(names, tuple(clauses))
    if variables is not None:
        formula = rename(formula, dict(zip(names, variables)))
    return formula


def _reduce(units, target: int, full: int, n: int):
    units = sorted(units, key=lambda um: (_unit_size(um[0]), str(um[0])))
    changed = True
    while changed:
        changed = False
        # drop whole units, largest first
        for i in sorted(range(len(units)), key=lambda i: (-_unit_size(units[i][0]), i)):
            rest = full
            for j, (_, m) in enumerate(units):
                if j != i:
                    rest &= m
            if rest == target:
                del units[i]
                changed = True
                break
        if changed:
            continue
        # drop literals while everything stays entailed
        for i, (u, _) in enumerate(units):
            for replacement in _shrinks(u):
                masks = [_unit_mask(r, n) for r in replacement]
                if all(target & ~m & full == 0 for m in masks):
                    units[i:i + 1] = list(zip(replacement, masks))
                    changed = True
                    break
            if changed:
                break
    return units


def _orbit_count(n: int) -> int:
    return len(enumerate_weak_orders(n))


def rename(formula: OrderCNF, mapping: dict[str, str]) -> OrderCNF:
    return OrderCNF(
        tuple(mapping.get(v, v) for v in formula.variables),
        tuple(
            tuple(Literal(mapping.get(l.left, l.left), l.op, mapping.get(l.right, l.right)) for l in c)
            for c in formula.clauses
        ),
    )
