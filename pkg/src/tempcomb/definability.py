"""Constructive pp-definitions: cross prevention, bounded search, and R^mix extraction."""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from itertools import product

import numpy as np

from .errors import InternalError
from .forms import synthesize_form
from .library import builtin
from .ops import _orbit_codes, _sign_codes, op, preserves
from .order import TemporalRelation, TemporalStructure, WeakOrder, enumerate_weak_orders, weak_order_index
from .pp import EVAL_CAP, Atom, PPFormula, eval_pp, lookup, parse_pp, substitute
from .solvers import NEQ_SYMBOL, Instance, solve_oracle, with_disequality

SEARCH_BUDGET = 200_000


# ---------------------------------------------------------- cross prevention

def cross_prevention_conditions(structure: TemporalStructure, phi: PPFormula) -> tuple[bool, bool, bool]:
    """Satisfiability of ``phi`` under the three equality patterns on its free (x, y, u, v)."""
    if len(phi.free) != 4:
        raise ValueError("a cross prevention formula has exactly four free variables")
    x, y, u, v = phi.free
    base = with_disequality(structure)
    atoms = tuple((a.symbol, a.args) for a in phi.atoms)

    def sat(extra) -> bool:
        inst = Instance(phi.variables, atoms + tuple(extra), base)
        return solve_oracle(inst) is not None

    def ne(a, b):
        return (NEQ_SYMBOL, (a, b))

    def eq(a, b):
        return ("=", (a, b))

    one = sat([eq(x, y), ne(u, v), ne(x, u), ne(x, v)])
    two = sat([ne(x, y), eq(u, v), ne(x, u), ne(y, u)])
    three = sat([eq(x, y), eq(u, v)])
    return one, two, three


def check_cross_prevention(structure: TemporalStructure, phi: PPFormula) -> bool:
    one, two, three = cross_prevention_conditions(structure, phi)
    return one and two and not three


# ----------------------------------------------------------- bounded search

def _free_names(k: int) -> tuple[str, ...]:
    return ("x", "y", "z")[:k] if k <= 3 else tuple(f"x{i + 1}" for i in range(k))


def _bound_names(free: tuple[str, ...], b: int) -> tuple[str, ...]:
    pool = [n for n in ("z", "w", "h", "u", "v") if n not in free]
    pool += [f"w{i}" for i in range(1, b + 1)]
    return tuple(pool[:b])


@lru_cache(maxsize=None)
def _projection(k: int, n: int) -> np.ndarray:
    """Index of the restriction to the first ``k`` coordinates, per weak order on ``n``."""
    index = weak_order_index(k)
    from .order import orbit_of

    return np.array([index[orbit_of(o[:k])] for o in enumerate_weak_orders(n)], dtype=np.int64)


def _atom_truth(rel: TemporalRelation, args: tuple[int, ...], n: int) -> np.ndarray:
    W = np.array(enumerate_weak_orders(n), dtype=np.int64).reshape(-1, n)
    codes = _sign_codes(W[:, list(args)])
    index = weak_order_index(rel.arity)
    allowed = _orbit_codes(rel.arity)[[index[o] for o in rel.orbits]]
    return np.isin(codes, allowed)


def bounded_ppdef_search(
    structure: TemporalStructure,
    target: TemporalRelation,
    max_bound_vars: int = 2,
    max_atoms: int = 4,
    budget: int = SEARCH_BUDGET,
) -> PPFormula | None:
    """A pp-formula over ``structure`` defining ``target``, or None.

    Tries conjunctions of at most ``max_atoms`` atoms with at most
    ``max_bound_vars`` quantified variables, fewest bound variables first.
    None does not mean that no definition exists.
    """
    k = target.arity
    free = _free_names(k)
    W_k = len(enumerate_weak_orders(k))
    goal = np.zeros(W_k, dtype=bool)
    index = weak_order_index(k)
    goal[[index[o] for o in target.orbits]] = True
    symbols = sorted(structure.relations) + ([] if "=" in structure else ["="])
    nodes = 0
    for b in range(max_bound_vars + 1):
        n = k + b
        bound = _bound_names(free, b)
        names = free + bound
        proj = _projection(k, n)

        def cover(mask):
            return np.bincount(proj[mask], minlength=W_k) > 0

        if b == 0 and np.array_equal(goal, np.ones(W_k, dtype=bool)):
            return PPFormula(free, (), ())
        atoms: list[tuple[Atom, np.ndarray, frozenset[int]]] = []
        seen: set[bytes] = set()
        for symbol in symbols:
            rel = lookup(structure, symbol)
            for args in product(range(n), repeat=rel.arity):
                truth = _atom_truth(rel, args, n)
                if truth.all() or not np.all(cover(truth) >= goal):
                    continue
                key = truth.tobytes()
                if key in seen:
                    continue
                seen.add(key)
                used = frozenset(i - k for i in args if i >= k)
                atoms.append((Atom(symbol, tuple(names[i] for i in args)), truth, used))
        everything = frozenset(range(b))

        def dfs(start, mask, depth, chosen, used):
            nonlocal nodes
            nodes += 1
            if nodes > budget:
                raise _Exhausted
            if chosen and used == everything and np.array_equal(cover(mask), goal):
                return chosen
            if depth == max_atoms:
                return None
            # the bound variables still unused must fit in the remaining atoms
            if len(everything - used) > 3 * (max_atoms - depth):
                return None
            for i in range(start, len(atoms)):
                atom, truth, u = atoms[i]
                new = mask & truth
                if np.array_equal(new, mask) or not np.all(cover(new) >= goal):
                    continue
                found = dfs(i + 1, new, depth + 1, chosen + [atom], used | u)
                if found is not None:
                    return found
            return None

        start_mask = np.ones(len(proj), dtype=bool)
        try:
            found = dfs(0, start_mask, 0, [], frozenset())
        except _Exhausted:
            return None
        if found is not None:
            return PPFormula(free, bound, tuple(found))
    return None


class _Exhausted(Exception):
    pass


# ------------------------------------------------------------ simplification

def _reflexive_true(atom: Atom, structure: TemporalStructure) -> bool:
    if len(set(atom.args)) != 1:
        return False
    return (0,) * len(atom.args) in lookup(structure, atom.symbol).orbits


def simplify(formula: PPFormula, structure: TemporalStructure, cap: int = EVAL_CAP) -> PPFormula:
    """Merge bound variables into others and drop atoms while the defined relation is unchanged."""
    goal = eval_pp(formula, structure, cap)

    def same(f: PPFormula) -> bool:
        return eval_pp(f, structure, cap).orbits == goal.orbits

    def tidy(f: PPFormula) -> PPFormula:
        atoms = tuple(dict.fromkeys(a for a in f.atoms if not _reflexive_true(a, structure)))
        used = {v for a in atoms for v in a.args}
        return PPFormula(f.free, tuple(b for b in f.bound if b in used), atoms)

    current = tidy(formula)
    changed = True
    while changed:
        changed = False
        for b in current.bound:
            for v in current.free + current.bound:
                if v == b:
                    continue
                atoms = tuple(a.rename({b: v}) for a in current.atoms)
                bound = tuple(x for x in current.bound if x != b)
                cand = tidy(PPFormula(current.free, bound, atoms))
                if same(cand):
                    current, changed = cand, True
                    break
            if changed:
                break
        if changed:
            continue
        for i in range(len(current.atoms)):
            cand = tidy(PPFormula(current.free, current.bound, current.atoms[:i] + current.atoms[i + 1:]))
            if same(cand):
                current, changed = cand, True
                break
    return current


# ---------------------------------------------------------------- T3 route

# pp-formulas over T3 (and relations defined before them) for the pp-closed relations
T3_FORMULAS: dict[str, str] = {
    "<=": "exists z. T3(x,y,z)",
    "!=": "exists z. T3(z,x,y)",
    "<": "T3(x,x,y)",
    "Rmin_le": "exists x',y',z' (T3(x',y',z') & x' <= x & y <= y' & z <= z')",
    "Smi": "exists u,v (T3(x,u,v) & u != y & z <= v)",
    "Rmi": "exists h (Rmin_le(x,h,y) & T3(z,z,h))",
    "Rmix": "Rmi(x,y,z) & Rmi(y,x,z)",
}


def t3_formula(name: str) -> PPFormula:
    return parse_pp(T3_FORMULAS[name].replace("'", "p"), ("x", "y", "z") if name not in ("<=", "!=", "<") else ("x", "y"))


# ------------------------------------------------------------- extraction

RMIX = builtin("Rmix")
ROUTES = ("mix", "mi", "min", "mx", "T3")


@dataclass
class Extraction:
    """Outcome of extracting a pp-definition of R^mix.

    ``formula`` is over ``structure``, which is the input structure extended
    by the relations in ``definitions``.  Each definition is a pp-formula over
    the structure built so far, or None when no definition was found, in which
    case the result is ``conditional``.
    """

    applicable: bool
    reason: str = ""
    route: str | None = None
    formula: PPFormula | None = None
    structure: TemporalStructure | None = None
    definitions: list[tuple[str, PPFormula | None]] = field(default_factory=list)
    witnesses: dict[str, WeakOrder] = field(default_factory=dict)
    conditional: bool = False
    validated: bool = False

    def flattened(self) -> PPFormula | None:
        """The formula with every found definition substituted, or None if conditional."""
        if self.formula is None or self.conditional:
            return None
        result = self.formula
        for symbol, phi in reversed(self.definitions):
            result = substitute(result, {symbol: phi})
        return result


class _Builder:
    """Tracks auxiliary relations added to the input structure."""

    def __init__(self, structure: TemporalStructure):
        self.base = structure
        self.structure = structure
        self.definitions: list[tuple[str, PPFormula | None]] = []
        self.conditional = False

    def symbol_for(self, name: str, rel: TemporalRelation, search: bool = True,
                   formula: PPFormula | None = None) -> str:
        existing = self.structure.find(rel)
        if existing is not None:
            return existing
        if formula is None and search:
            formula = bounded_ppdef_search(self.structure, rel)
        if formula is None:
            self.conditional = True
        symbol = name
        while symbol in self.structure:
            symbol += "'"
        self.definitions.append((symbol, formula))
        self.structure = self.structure.with_relation(symbol, rel.named(symbol))
        return symbol

    def validate_definitions(self) -> bool:
        partial = self.base
        for symbol, phi in self.definitions:
            rel = self.structure[symbol]
            if phi is not None and eval_pp(phi, partial).orbits != rel.orbits:
                return False
            partial = partial.with_relation(symbol, rel)
        return True


def _coordinate_formula(rel_symbol: str, arity: int, roles: dict[int, str], free: tuple[str, ...],
                        extra: list[Atom], prefix: str) -> PPFormula:
    """``∃... (R(...) ∧ extra)`` where unnamed coordinates become fresh bound variables."""
    names = [roles.get(i, f"{prefix}{i + 1}") for i in range(arity)]
    used = list(dict.fromkeys(names + [v for a in extra for v in a.args]))
    bound = tuple(v for v in used if v not in free)
    return PPFormula(free, bound, (Atom(rel_symbol, tuple(names)),) + tuple(extra))


def _mix_conjunction(psi: PPFormula, tag: str = "b") -> PPFormula:
    """``psi(x,y,z) ∧ psi(y,x,z)`` with the bound variables of each copy kept apart."""
    x, y, z = psi.free
    one = psi.rename({b: f"{b}_1" for b in psi.bound})
    two = psi.rename({**{b: f"{b}_2" for b in psi.bound}, x: y, y: x})
    return PPFormula((x, y, z), one.bound + two.bound, one.atoms + two.atoms)


def _pick(rel: TemporalRelation, pred) -> WeakOrder | None:
    for o in sorted(rel.orbits):
        if pred(o):
            return o
    return None


def _candidates_mix(structure, builder):
    lt = None
    for symbol in sorted(structure.relations):
        rel = structure[symbol]
        if preserves(op("ll"), rel):
            continue
        cnf = synthesize_form(rel, "mix")
        if cnf is None:
            continue
        pos = {v: i for i, v in enumerate(cnf.variables)}
        for clause in cnf.clauses:
            head = clause[0] if clause else None
            if head is None or head.op != ">=":
                continue
            x, y = pos[head.left], pos[head.right]
            zs = [pos[l.right] for l in clause[1:] if l.op == ">"]
            if len(zs) != len(clause) - 1 or not zs:
                continue
            for z1 in zs:
                if lt is None:
                    lt = builder.symbol_for("<", builtin("<"))
                roles = {x: "x", y: "y", z1: "z1"}
                extra = [Atom(lt, ("z", "z1"))]
                for zi in zs:
                    if zi != z1:
                        roles[zi] = f"z{zi + 1}_"
                        extra += [Atom(lt, ("x", roles[zi])), Atom(lt, ("y", roles[zi]))]
                phi = _coordinate_formula(symbol, rel.arity, roles, ("x", "y", "z"), extra, "u")
                others = [zi for zi in zs if zi != z1]

                def base(o, x=x, y=y, z1=z1, others=others):
                    return all(o[x] < o[zi] and o[y] < o[zi] for zi in others)

                witnesses = {
                    "t_c": _pick(rel, lambda o: base(o) and o[x] == o[y] < o[z1]),
                    "t_x": _pick(rel, lambda o: base(o) and o[z1] < o[x] < o[y]),
                    "t_y": _pick(rel, lambda o: base(o) and o[z1] < o[y] < o[x]),
                }
                yield phi, {"relation": symbol, "clause": " | ".join(map(str, clause))}, witnesses


def _candidates_mi(structure, builder):
    le = None
    for symbol in sorted(structure.relations):
        rel = structure[symbol]
        if preserves(op("ll"), rel):
            continue
        cnf = synthesize_form(rel, "mi")
        if cnf is None:
            continue
        pos = {v: i for i, v in enumerate(cnf.variables)}
        for clause in cnf.clauses:
            heads = {l.left for l in clause}
            if len(heads) != 1:
                continue
            weak = [l for l in clause if l.op == ">="]
            strict = [pos[l.right] for l in clause if l.op == ">"]
            neqs = [pos[l.right] for l in clause if l.op == "!="]
            if len(weak) != 1 or not strict:
                continue
            x, y = pos[weak[0].left], pos[weak[0].right]
            for j in strict:
                if le is None:
                    le = builder.symbol_for("<=", builtin("<="))
                roles = {x: "x", y: "yb", j: "yj"}
                extra = [Atom(le, ("y", "yb")), Atom(le, ("z", "yj"))]
                for i in strict:
                    if i != j:
                        roles[i] = f"y{i + 1}_"
                        extra.append(Atom(le, ("x", roles[i])))
                for i in neqs:
                    roles[i] = "x" if i not in roles else roles[i]
                phi = _coordinate_formula(symbol, rel.arity, roles, ("x", "y", "z"), extra, "u")
                others = [i for i in strict if i != j]

                def base(o, x=x, others=others, neqs=neqs):
                    return all(o[x] <= o[i] for i in others) and all(o[x] == o[i] for i in neqs)

                witnesses = {
                    "t1": _pick(rel, lambda o: base(o) and o[x] == o[y] and o[x] < o[j]),
                    "t2": _pick(rel, lambda o: base(o) and o[y] > o[x] > o[j]),
                }
                yield _mix_conjunction(phi), {"relation": symbol, "clause": " | ".join(map(str, clause))}, witnesses


def _candidates_min(structure, builder):
    le = lt = None
    for symbol in sorted(structure.relations):
        rel = structure[symbol]
        if preserves(op("mi"), rel):
            continue
        cnf = synthesize_form(rel, "min")
        if cnf is None:
            continue
        pos = {v: i for i, v in enumerate(cnf.variables)}
        for clause in cnf.clauses:
            if len({l.left for l in clause}) != 1:
                continue
            weak = [pos[l.right] for l in clause if l.op == ">="]
            strict = [pos[l.right] for l in clause if l.op == ">"]
            if len(weak) < 2:
                continue
            x = pos[clause[0].left]
            for y1, y2 in ((a, b) for a in weak for b in weak if a < b):
                if le is None:
                    le = builder.symbol_for("<=", builtin("<="))
                    lt = builder.symbol_for("<", builtin("<"))
                roles = {x: "x", y1: "y1", y2: "y2"}
                extra = [Atom(le, ("u", "y1")), Atom(le, ("v", "y2"))]
                for i in strict:
                    roles[i] = f"x{i + 1}_"
                    extra.append(Atom(le, ("x", roles[i])))
                for i in weak:
                    if i not in (y1, y2):
                        roles[i] = f"y{i + 1}_"
                        extra.append(Atom(lt, ("x", roles[i])))
                phi = _coordinate_formula(symbol, rel.arity, roles, ("x", "u", "v"), extra, "z")
                # R^mi(x,y,z) = ∃h (phi(x,h,y) ∧ z < h)
                inner = phi.rename({"u": "h", "v": "y"})
                rmi = PPFormula(("x", "y", "z"), inner.bound + ("h",),
                                inner.atoms + (Atom(lt, ("z", "h")),))
                others_s = strict
                others_w = [i for i in weak if i not in (y1, y2)]

                def base(o, x=x, s=others_s, w=others_w):
                    return all(o[x] <= o[i] for i in s) and all(o[x] < o[i] for i in w)

                witnesses = {
                    "t1": _pick(rel, lambda o: base(o) and o[x] == o[y1] and o[x] < o[y2]),
                    "t2": _pick(rel, lambda o: base(o) and o[x] < o[y1] and o[x] == o[y2]),
                }
                yield _mix_conjunction(rmi), {"relation": symbol, "clause": " | ".join(map(str, clause))}, witnesses


def _candidates_mx(structure, builder):
    x_symbol = builder.symbol_for("X", builtin("X"))
    yield parse_pp(f"exists h ({x_symbol}(z,z,h) & {x_symbol}(x,y,h))", ("x", "y", "z")), {}, {}


def _candidates_t3(structure, builder):
    t3 = builder.symbol_for("T3", builtin("T3"))
    names = {"T3": t3}
    for name in ("<=", "Rmin_le", "Rmi"):
        text = T3_FORMULAS[name]
        for old, new in names.items():
            text = text.replace(f"{old}(", f"{new}(")
        free = ("x", "y") if name == "<=" else ("x", "y", "z")
        phi = parse_pp(text.replace("'", "p"), free)
        if name == "<=":
            # infix comparisons in later formulas refer to this relation
            names["<="] = builder.symbol_for("<=", builtin("<="), formula=phi)
            continue
        names[name] = builder.symbol_for(name, builtin(name), formula=_retarget(phi, names))
    rmi = names["Rmi"]
    yield parse_pp(f"{rmi}(x,y,z) & {rmi}(y,x,z)", ("x", "y", "z")), {}, {}


def _retarget(phi: PPFormula, names: dict[str, str]) -> PPFormula:
    return PPFormula(phi.free, phi.bound, tuple(Atom(names.get(a.symbol, a.symbol), a.args) for a in phi.atoms))


_ROUTE_CANDIDATES = {
    "mix": _candidates_mix,
    "mi": _candidates_mi,
    "min": _candidates_min,
    "mx": _candidates_mx,
    "T3": _candidates_t3,
}


def applicable_route(structure: TemporalStructure) -> tuple[str | None, str]:
    """The construction used for ``structure``, or None with the reason it does not apply."""
    relations = list(structure.relations.values())
    for symbol, rel in sorted(structure.relations.items()):
        if synthesize_form(rel, "pp") is None:
            return None, f"{symbol} is not preserved by pp"
    if all(preserves(op("ll"), r) for r in relations):
        return None, "every relation is preserved by ll, so R^mix is not pp-definable"
    for route in ("mix", "mi", "min", "mx"):
        if all(preserves(op(route), r) for r in relations):
            return route, f"preserved by {route}"
    return "T3", "preserved by none of mix, mi, min, mx"


def extract_rmix_definition(structure: TemporalStructure, simplify_result: bool = True) -> Extraction:
    """A pp-definition of R^mix in a pp-closed structure that ll does not preserve."""
    route, reason = applicable_route(structure)
    if route is None:
        return Extraction(False, reason)
    builder = _Builder(structure)
    for phi, info, witnesses in _ROUTE_CANDIDATES[route](structure, builder):
        ext = builder.structure
        if len(phi.variables) > EVAL_CAP:
            continue
        if eval_pp(phi, ext).orbits != RMIX.orbits:
            continue
        if simplify_result:
            phi = simplify(phi, ext)
        ok = eval_pp(phi, ext).orbits == RMIX.orbits and builder.validate_definitions()
        if not ok:
            raise InternalError("extracted formula does not define R^mix")
        used = {a.symbol for a in phi.atoms}
        definitions = _needed(builder.definitions, used, builder.structure)
        if any(f is None for _, f in definitions):
            conditional = True
        else:
            conditional = False
        detail = ", ".join(f"{k} {v}" for k, v in info.items())
        return Extraction(
            True, reason + (f"; {detail}" if detail else ""), route, phi, builder.structure,
            definitions, {k: v for k, v in witnesses.items() if v is not None}, conditional, ok,
        )
    raise InternalError(f"no candidate of the {route} construction defines R^mix")


def _needed(definitions, used: set[str], structure: TemporalStructure):
    """The definitions the formula depends on, transitively, in their original order."""
    need = set(used)
    for symbol, phi in reversed(definitions):
        if symbol in need and phi is not None:
            need |= phi.symbols()
    return [(s, f) for s, f in definitions if s in need]
