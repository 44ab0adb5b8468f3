"""Satisfiability of single and combined temporal constraint instances."""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from itertools import combinations
from typing import Callable, Sequence

from .errors import FragmentError, InternalError, ResourceError, SignatureError
from .forms import synthesize_form
from .order import TemporalStructure, WeakOrder, orbit_of
from .pp import PPFormula, lookup

ORACLE_CAP = 8
NEQ_SYMBOL = "≠"  # reserved: cannot be written as an identifier in the DSL


@dataclass(frozen=True)
class Instance:
    """A conjunction of atomic constraints over one structure."""

    variables: tuple[str, ...]
    constraints: tuple[tuple[str, tuple[str, ...]], ...]
    structure: TemporalStructure

    def __post_init__(self):
        object.__setattr__(self, "variables", tuple(dict.fromkeys(self.variables)))
        object.__setattr__(
            self, "constraints", tuple((s, tuple(args)) for s, args in self.constraints)
        )
        known = set(self.variables)
        for symbol, args in self.constraints:
            rel = lookup(self.structure, symbol)
            if rel.arity != len(args):
                raise SignatureError(f"{symbol} has arity {rel.arity}, got {len(args)} arguments")
            for a in args:
                if a not in known:
                    raise ValueError(f"constraint {symbol}{args} uses undeclared variable {a!r}")

    @classmethod
    def build(cls, structure: TemporalStructure, constraints) -> "Instance":
        """Instance whose variables are those mentioned, in order of appearance."""
        constraints = [(s, tuple(a)) for s, a in constraints]
        variables = tuple(dict.fromkeys(v for _, args in constraints for v in args))
        return cls(variables, tuple(constraints), structure)

    def with_constraints(self, extra, variables: Sequence[str] = ()) -> "Instance":
        return Instance(self.variables + tuple(variables), self.constraints + tuple(extra), self.structure)

    def rename(self, mapping: dict[str, str]) -> "Instance":
        variables = tuple(dict.fromkeys(mapping.get(v, v) for v in self.variables))
        constraints = tuple((s, tuple(mapping.get(a, a) for a in args)) for s, args in self.constraints)
        return Instance(variables, constraints, self.structure)


def with_disequality(structure: TemporalStructure) -> TemporalStructure:
    from .library import builtin

    return structure.with_relation(NEQ_SYMBOL, builtin("!="))


# ------------------------------------------------------------- the oracle

def _variable_order(variables, constraints) -> list[str]:
    """Place constrained variables early, each next to the ones already placed."""
    order: list[str] = []
    remaining = list(variables)
    while remaining:
        placed = set(order)

        def score(v):
            closing = sum(1 for _, args in constraints if v in args and all(a in placed or a == v for a in args))
            touching = sum(1 for _, args in constraints if v in args)
            return (-closing, -touching, variables.index(v))

        v = min(remaining, key=score)
        order.append(v)
        remaining.remove(v)
    return order


def _backtrack(order: list[str], constraints, structure, injective: bool = False):
    pos = {v: i for i, v in enumerate(order)}
    checks: list[list[tuple[tuple[int, ...], frozenset]]] = [[] for _ in order]
    for symbol, args in constraints:
        idx = tuple(pos[a] for a in args)
        checks[max(idx)].append((idx, lookup(structure, symbol).orbits))

    def extend(ranks: tuple[int, ...], step: int):
        if step == len(order):
            return ranks
        k = max(ranks) + 1 if ranks else 0
        options = [] if injective else [ranks + (b,) for b in range(k)]
        options += [tuple(r + 1 if r >= g else r for r in ranks) + (g,) for g in range(k + 1)]
        for cand in options:
            if all(orbit_of([cand[i] for i in idx]) in orbits for idx, orbits in checks[step]):
                found = extend(cand, step + 1)
                if found is not None:
                    return found
        return None

    return extend((), 0)


def solve_oracle(instance: Instance, cap: int = ORACLE_CAP) -> WeakOrder | None:
    """A weak order on the instance variables satisfying every constraint, or None."""
    n = len(instance.variables)
    if n > cap:
        raise ResourceError(f"instance has {n} variables, oracle cap is {cap}")
    if n == 0:
        return ()
    order = _variable_order(list(instance.variables), instance.constraints)
    found = _backtrack(order, instance.constraints, instance.structure)
    if found is None:
        return None
    ranks = dict(zip(order, found))
    return orbit_of([ranks[v] for v in instance.variables])


def satisfies(instance: Instance, values: Sequence) -> bool:
    pos = {v: i for i, v in enumerate(instance.variables)}
    return all(
        orbit_of([values[pos[a]] for a in args]) in lookup(instance.structure, s).orbits
        for s, args in instance.constraints
    )


# ------------------------------------------------------ combined instances

@dataclass(frozen=True)
class CombinedInstance:
    """Constraints over two structures with disjoint signatures on shared variables."""

    variables: tuple[str, ...]
    side1: tuple[tuple[str, tuple[str, ...]], ...]
    side2: tuple[tuple[str, tuple[str, ...]], ...]
    structure1: TemporalStructure
    structure2: TemporalStructure

    def __post_init__(self):
        object.__setattr__(self, "variables", tuple(dict.fromkeys(self.variables)))
        self.part(1)
        self.part(2)

    def part(self, side: int) -> Instance:
        if side == 1:
            return Instance(self.variables, self.side1, self.structure1)
        return Instance(self.variables, self.side2, self.structure2)


def set_partitions(n: int):
    """Restricted growth strings of length ``n``: block index per element."""
    if n == 0:
        yield ()
        return

    def rec(prefix: list[int], top: int):
        if len(prefix) == n:
            yield tuple(prefix)
            return
        for b in range(top + 2):
            prefix.append(b)
            yield from rec(prefix, max(top, b))
            prefix.pop()

    yield from rec([0], 0)


def _linear_on_blocks(instance: Instance, blocks: tuple[int, ...]):
    """Strict order of the blocks satisfying the instance with merged variables, or None."""
    names = [f"b{i}" for i in range(max(blocks) + 1)]
    mapping = {v: names[b] for v, b in zip(instance.variables, blocks)}
    constraints = [(s, tuple(mapping[a] for a in args)) for s, args in instance.constraints]
    order = _variable_order(names, constraints)
    found = _backtrack(order, constraints, instance.structure, injective=True)
    if found is None:
        return None
    ranks = dict(zip(order, found))
    return tuple(ranks[mapping[v]] for v in instance.variables)


def solve_combined_oracle(instance: CombinedInstance, cap: int = ORACLE_CAP):
    """Weak orders ``(o1, o2)`` with the same equalities satisfying each side, or None."""
    n = len(instance.variables)
    if n > cap:
        raise ResourceError(f"instance has {n} variables, oracle cap is {cap}")
    if n == 0:
        return (), ()
    left, right = instance.part(1), instance.part(2)
    for blocks in set_partitions(n):
        o1 = _linear_on_blocks(left, blocks)
        if o1 is None:
            continue
        o2 = _linear_on_blocks(right, blocks)
        if o2 is not None:
            return o1, o2
    return None


# ------------------------------------------------------- min-closed solver

def compile_min_clauses(instance: Instance, cap: int = 6):
    """Each constraint as clauses ``(head, [(op, target), ...])`` with ``op`` in ``>``, ``>=``."""
    cache: dict[str, object] = {}
    clauses = []
    for symbol, args in instance.constraints:
        rel = lookup(instance.structure, symbol)
        if symbol not in cache:
            cnf = synthesize_form(rel, "min", cap=max(cap, rel.arity))
            if cnf is None:
                raise FragmentError(f"relation {symbol} is not preserved by min")
            cache[symbol] = cnf
        cnf = cache[symbol]
        mapping = dict(zip(cnf.variables, args))
        for clause in cnf.clauses:
            lits = []
            head = None
            satisfied = False
            for lit in clause:
                o = lit if lit.op in (">", ">=") else lit.flipped()
                if o.op not in (">", ">="):
                    raise FragmentError(f"clause {clause} of {symbol} is not in min form")
                h, t = mapping[o.left], mapping[o.right]
                if head is not None and h != head:
                    raise FragmentError(f"clause {clause} of {symbol} has no common head")
                head = h
                if h == t:
                    if o.op == ">=":
                        satisfied = True
                    continue
                lits.append((o.op, t))
            if satisfied:
                continue
            clauses.append((head, lits))
    return clauses


def solve_min_closed(instance: Instance) -> WeakOrder | None:
    """Decide an instance whose relations are all preserved by min.

    Builds the solution level by level from the bottom: the largest set of
    variables that can consistently share the minimum value forms the next
    level.  Raises FragmentError outside the min-closed fragment.
    """
    clauses = compile_min_clauses(instance)
    if any(not lits for _, lits in clauses):
        return None
    remaining = list(instance.variables)
    level: dict[str, int] = {}
    depth = 0
    while remaining:
        M = set(remaining)
        changed = True
        while changed:
            changed = False
            for head, lits in clauses:
                if head in M and not any(op == ">=" and t in M for op, t in lits):
                    M.discard(head)
                    changed = True
        if not M:
            return None
        for v in M:
            level[v] = depth
        depth += 1
        clauses = [
            (head, lits) for head, lits in clauses
            if head not in M and not any(t in M for _, t in lits)
        ]
        remaining = [v for v in remaining if v not in M]
    return tuple(level[v] for v in instance.variables)


# ----------------------------------------------------- Nelson-Oppen combiner

@dataclass(frozen=True)
class EpDefinition:
    """Disjunction of pp-formulas in two free variables that together define ``x != y``."""

    disjuncts: tuple[PPFormula, ...]

    def __str__(self) -> str:
        return " ∨ ".join(f"({d})" if d.bound or len(d.atoms) > 1 else str(d) for d in self.disjuncts)

    def validate(self, structure: TemporalStructure) -> bool:
        from .library import builtin
        from .pp import eval_pp

        neq = builtin("!=").orbits
        union: set = set()
        for d in self.disjuncts:
            rel = eval_pp(d, structure)
            if not rel.orbits <= neq:
                return False
            union |= rel.orbits
        return union == neq


def find_ep_definition(structure: TemporalStructure, search: bool = True) -> EpDefinition | None:
    """An ep-definition of ``!=``: a native relation, ``<`` both ways, or a searched formula."""
    from .library import builtin
    from .pp import Atom

    def binary(symbol: str, a: str, b: str) -> PPFormula:
        return PPFormula(("x", "y"), (), (Atom(symbol, (a, b)),))

    neq = structure.find(builtin("!="))
    if neq is not None:
        return EpDefinition((binary(neq, "x", "y"),))
    lt = structure.find(builtin("<"))
    if lt is not None:
        return EpDefinition((binary(lt, "x", "y"), binary(lt, "y", "x")))
    if not search:
        return None
    from .definability import bounded_ppdef_search

    phi = bounded_ppdef_search(structure, builtin("!="))
    if phi is not None:
        return EpDefinition((phi.rename(dict(zip(phi.free, ("x", "y")))),))
    phi = bounded_ppdef_search(structure, builtin("<"))
    if phi is not None:
        phi = phi.rename(dict(zip(phi.free, ("x", "y"))))
        return EpDefinition((phi, phi.rename({"x": "y", "y": "x"})))
    return None


def _with_disjunct(instance: Instance, d: PPFormula, a: str, b: str, tag: str) -> Instance:
    mapping = dict(zip(d.free, (a, b)))
    fresh = []
    for i, v in enumerate(d.bound):
        mapping[v] = f"{tag}{i}"
        fresh.append(mapping[v])
    extra = [(atom.symbol, tuple(mapping[x] for x in atom.args)) for atom in d.atoms]
    return instance.with_constraints(extra, fresh)


@dataclass
class CombineReport:
    sat: bool
    merges: list[tuple[str, str]] = field(default_factory=list)
    calls: int = 0
    n: int = 0
    trace: list[dict] = field(default_factory=list)

    @property
    def call_constant(self) -> float:
        return self.calls / max(1, self.n) ** 3


def combine_nelson_oppen(
    s1: Instance,
    s2: Instance,
    solver1: Callable[[Instance], object],
    solver2: Callable[[Instance], object],
    ep1: EpDefinition | None,
    ep2: EpDefinition | None,
) -> CombineReport:
    """Decide ``s1 ∧ s2`` by propagating entailed equalities between the sides.

    For every pair of variables and every disjunct of each side's definition
    of ``!=``, the side is tested with the disjunct added.  When no disjunct
    is satisfiable the two variables must be equal and are merged on both
    sides.  At the fixpoint the answer is whether both sides are satisfiable.
    The solvers must decide their sides; ``!=`` must be independent from both.
    """
    if ep1 is None or ep2 is None:
        raise ValueError("both sides need an existential positive definition of !=")
    variables = list(dict.fromkeys(s1.variables + s2.variables))
    n = len(variables)
    # every variable occurs on both sides
    pad = [("=", (v, v)) for v in variables]
    sides = [
        Instance(tuple(variables), s1.constraints + tuple(pad), s1.structure),
        Instance(tuple(variables), s2.constraints + tuple(pad), s2.structure),
    ]
    solvers = (solver1, solver2)
    eps = (ep1, ep2)
    report = CombineReport(sat=False, n=n)

    def call(i: int, inst: Instance) -> bool:
        report.calls += 1
        result = solvers[i](inst)
        return result is not None and result is not False

    changed = True
    while changed:
        changed = False
        current = list(sides[0].variables)
        for a, b in combinations(current, 2):
            for i in (0, 1):
                outcomes = []
                for j, d in enumerate(eps[i].disjuncts):
                    ok = call(i, _with_disjunct(sides[i], d, a, b, f"_d{i}_{j}_"))
                    outcomes.append(ok)
                    report.trace.append({
                        "event": "test", "side": i + 1, "pair": [a, b], "disjunct": j,
                        "result": "sat" if ok else "unsat",
                    })
                    if ok:
                        break
                if not any(outcomes):
                    sides = [s.rename({b: a}) for s in sides]
                    report.merges.append((a, b))
                    report.trace.append({"event": "merge", "side": i + 1, "keep": a, "drop": b})
                    if len(report.merges) >= n:
                        raise InternalError("more merges than variables")
                    changed = True
                    break
            if changed:
                break
    report.sat = call(0, sides[0]) and call(1, sides[1])
    report.trace.append({"event": "final", "result": "sat" if report.sat else "unsat"})
    return report


def oracle_solver(instance: Instance):
    return solve_oracle(instance)


# ------------------------------------------------ independence falsifier

@dataclass
class IndependenceReport:
    certified: bool
    counterexample: dict | None = None
    trials: int = 0
    reason: str = ""

    @property
    def found(self) -> bool:
        return self.counterexample is not None


def independence_falsifier(
    structure: TemporalStructure,
    ep: EpDefinition | None = None,
    trials: int = 2000,
    max_vars: int = 5,
    seed: int = 0,
    max_atoms: int = 4,
) -> IndependenceReport:
    """Search for atomic constraints where each disequality alone is consistent but not all together.

    Structures preserved by ll or its dual have a binary injective
    polymorphism, so no such instance exists and the search is skipped.
    Finding nothing is not a proof of independence.
    """
    from .ops import op, preserves

    relations = list(structure.relations.values())
    for label in ("ll", "dll"):
        if all(preserves(op(label), r) for r in relations):
            return IndependenceReport(True, reason=f"preserved by {label}, a binary injective operation")
    rng = random.Random(seed)
    symbols = sorted(structure.relations)
    neq_structure = with_disequality(structure)
    for trial in range(1, trials + 1):
        n = rng.randint(2, max_vars)
        names = [f"v{i}" for i in range(n)]
        atoms = []
        for _ in range(rng.randint(1, max_atoms)):
            s = rng.choice(symbols)
            atoms.append((s, tuple(rng.choice(names) for _ in range(structure[s].arity))))
        base = Instance(tuple(names), tuple(atoms), neq_structure)
        if solve_oracle(base) is None:
            continue
        pairs = [(a, b) for a, b in combinations(names, 2)
                 if _neq_sat(base, a, b, ep, structure)]
        if len(pairs) < 2:
            continue
        joint = base.with_constraints([(NEQ_SYMBOL, p) for p in pairs])
        if solve_oracle(joint) is None:
            return IndependenceReport(
                False,
                {"constraints": [[s, list(a)] for s, a in atoms], "disequalities": [list(p) for p in pairs],
                 "variables": names},
                trial,
            )
    return IndependenceReport(False, None, trials, reason="no counterexample found (not a proof)")


def _neq_sat(base: Instance, a: str, b: str, ep: EpDefinition | None, structure) -> bool:
    if ep is None:
        return solve_oracle(base.with_constraints([(NEQ_SYMBOL, (a, b))])) is not None
    plain = Instance(base.variables, base.constraints, structure)
    return any(
        solve_oracle(_with_disjunct(plain, d, a, b, "_e")) is not None for d in ep.disjuncts
    )
