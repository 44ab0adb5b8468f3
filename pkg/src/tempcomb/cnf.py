"""Quantifier-free order formulas in conjunctive normal form."""

from __future__ import annotations

import re
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import ArityError
from .order import DEFAULT_CAP, TemporalRelation, check_arity, enumerate_weak_orders
from .syntax import TokenStream

OPERATORS = ("<", "<=", "=", "!=", ">", ">=")
_FLIP = {"<": ">", "<=": ">=", "=": "=", "!=": "!=", ">": "<", ">=": "<="}
_PRETTY = {"<": "<", "<=": "≤", "=": "=", "!=": "≠", ">": ">", ">=": "≥"}


@dataclass(frozen=True)
class Literal:
    left: str
    op: str
    right: str

    def __post_init__(self):
        if self.op not in OPERATORS:
            raise ValueError(f"unknown comparison {self.op!r}")

    def flipped(self) -> "Literal":
        return Literal(self.right, _FLIP[self.op], self.left)

    def oriented(self, head: str) -> "Literal | None":
        """The literal rewritten with ``head`` on the left, if it mentions it."""
        if self.left == head:
            return self
        if self.right == head:
            return self.flipped()
        return None

    def holds(self, a, b) -> bool:
        return _compare(self.op, a, b)

    def __str__(self) -> str:
        return f"{self.left} {self.op} {self.right}"

    def pretty(self) -> str:
        return f"{self.left} {_PRETTY[self.op]} {self.right}"


def _compare(op: str, a, b):
    if op == "<":
        return a < b
    if op == "<=":
        return a <= b
    if op == "=":
        return a == b
    if op == "!=":
        return a != b
    if op == ">":
        return a > b
    return a >= b


Clause = tuple[Literal, ...]


def _natural_key(name: str):
    m = re.fullmatch(r"(.*?)(\d+)", name)
    return (m.group(1), int(m.group(2))) if m else (name, -1)


@dataclass(frozen=True)
class OrderCNF:
    """Conjunction of disjunctions of order literals.

    An empty clause stands for falsum.
    """

    variables: tuple[str, ...]
    clauses: tuple[Clause, ...]

    def __post_init__(self):
        object.__setattr__(self, "variables", tuple(self.variables))
        object.__setattr__(self, "clauses", tuple(tuple(c) for c in self.clauses))
        known = set(self.variables)
        if len(known) != len(self.variables):
            raise ValueError("duplicate variable names")
        for clause in self.clauses:
            for lit in clause:
                if lit.left not in known or lit.right not in known:
                    raise ValueError(f"literal {lit} uses an undeclared variable")

    def evaluate(self, values) -> bool:
        pos = {v: i for i, v in enumerate(self.variables)}
        return all(
            any(lit.holds(values[pos[lit.left]], values[pos[lit.right]]) for lit in clause)
            for clause in self.clauses
        )

    def __str__(self) -> str:
        return self.format()

    def format(self, pretty: bool = False) -> str:
        if not self.clauses:
            return "true"
        conj, disj = (" ∧ ", " ∨ ") if pretty else (" & ", " | ")
        parts = []
        for clause in self.clauses:
            if not clause:
                parts.append("⊥" if pretty else "false")
                continue
            lits = [lit.pretty() if pretty else str(lit) for lit in clause]
            body = disj.join(lits)
            parts.append(f"({body})" if len(clause) > 1 and len(self.clauses) > 1 else body)
        return conj.join(parts)


def parse_cnf(text: str, variables=None) -> OrderCNF:
    """Parse ``(x1 >= x2 | x1 > x3) & (x2 >= x1 | x2 > x3)``.

    ``|``/``∨``, ``&``/``∧``, and the comparisons ``< <= = != > >=`` (or their
    unicode forms) are accepted; ``false``/``⊥`` denotes the empty clause and
    ``true`` an empty conjunction.  Without an explicit ``variables`` list the
    variables are taken in natural order (``x2`` before ``x10``).
    """
    stream = TokenStream(text)
    cnf = parse_cnf_tokens(stream, variables)
    stream.expect("eof")
    return cnf


def parse_cnf_tokens(stream: TokenStream, variables=None, stop=("eof", ";", "}")) -> OrderCNF:
    clauses: list[Clause] = []
    seen: dict[str, object] = {}

    def literal() -> Literal | None:
        if stream.accept("false"):
            return None
        left = stream.expect("ident")
        op = stream.expect("op")
        right = stream.expect("ident")
        for tok in (left, right):
            seen.setdefault(tok.text, tok)
        return Literal(left.text, op.text, right.text)

    def disjunction() -> Clause:
        lits = []
        while True:
            lit = literal()
            if lit is not None:
                lits.append(lit)
            if not stream.accept("pipe"):
                return tuple(lits)

    if stream.at("ident", "true") and stream.peek(1).kind in stop:
        stream.next()
    else:
        while True:
            if stream.accept("("):
                clause = disjunction()
                stream.expect(")")
            else:
                clause = disjunction()
            clauses.append(clause)
            if not stream.accept("amp"):
                break
    if variables is None:
        variables = sorted(seen, key=_natural_key)
    else:
        variables = tuple(variables)
        for name, tok in seen.items():
            if name not in variables:
                raise stream.error(f"unknown variable {name!r}", tok)
    return OrderCNF(tuple(variables), tuple(clauses))


@lru_cache(maxsize=None)
def _order_array(n: int) -> np.ndarray:
    return np.array(enumerate_weak_orders(n), dtype=np.int8).reshape(-1, n)


def clause_truth(clause: Clause, variables, n: int | None = None) -> np.ndarray:
    """Boolean vector over all weak orders: does the clause hold there."""
    n = len(variables) if n is None else n
    W = _order_array(n)
    pos = {v: i for i, v in enumerate(variables)}
    out = np.zeros(len(W), dtype=bool)
    for lit in clause:
        out |= _compare(lit.op, W[:, pos[lit.left]], W[:, pos[lit.right]])
    return out


def truth_to_mask(truth: np.ndarray) -> int:
    return int.from_bytes(np.packbits(truth, bitorder="little").tobytes(), "little")


def relation_from_cnf(formula: OrderCNF, cap: int = DEFAULT_CAP, name: str | None = None) -> TemporalRelation:
    """Relation of all weak orders on ``formula.variables`` satisfying every clause."""
    n = len(formula.variables)
    if n == 0:
        raise ArityError("formula has no variables")
    check_arity(n, cap)
    truth = np.ones(len(enumerate_weak_orders(n)), dtype=bool)
    for clause in formula.clauses:
        truth &= clause_truth(clause, formula.variables)
    return TemporalRelation.from_mask(n, truth_to_mask(truth), name)


def relation_to_dnf(rel: TemporalRelation, variables=None) -> list[list[Literal]]:
    """Complete order description of every orbit, one conjunction per orbit."""
    variables = variables or tuple(f"x{i + 1}" for i in range(rel.arity))
    terms = []
    for o in sorted(rel.orbits):
        term = []
        for i in range(rel.arity):
            for j in range(i + 1, rel.arity):
                op = "<" if o[i] < o[j] else "=" if o[i] == o[j] else ">"
                term.append(Literal(variables[i], op, variables[j]))
        terms.append(term)
    return terms


def format_dnf(rel: TemporalRelation, variables=None) -> str:
    terms = relation_to_dnf(rel, variables)
    if not terms:
        return "false"
    return " | ".join("(" + " & ".join(str(l) for l in t) + ")" for t in terms)


def relation_from_dnf_text(text: str, arity: int) -> TemporalRelation:
    """Evaluate the output of :func:`format_dnf` back into a relation."""
    variables = tuple(f"x{i + 1}" for i in range(arity))
    if text.strip() == "false":
        return TemporalRelation.empty(arity)
    orbits = set()
    for term in text.split("|"):
        cnf = parse_cnf(term.strip().strip("()"), variables) if arity > 1 else OrderCNF(variables, ())
        orbits |= relation_from_cnf(cnf, cap=arity).orbits
    return TemporalRelation(arity, frozenset(orbits))
