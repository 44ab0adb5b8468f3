"""P versus NP-complete verdicts for temporal structures and their combinations.

Every verdict assumes P != NP.  Tractable verdicts name a preserving
operation (or the constant one); hard verdicts list, for each candidate
operation, a relation and a pair of tuples that the operation maps outside it.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .ops import apply_binary, find_violation, op
from .order import (
    TemporalStructure,
    has_constant_polymorphism,
    structure_preserved_by_all_permutations,
)

CAVEAT = "conditional on P != NP"
TRACTABLE_OPS = ("min", "mi", "mx", "ll", "dual-min", "dual-mi", "dual-mx", "dll")

P = "P"
NPC = "NP-complete"
MANUAL = "needs-manual-analysis"


@dataclass
class Verdict:
    label: str
    route: str
    witnesses: list[dict] = field(default_factory=list)
    caveat: str = CAVEAT
    parts: list["Verdict"] = field(default_factory=list)

    def to_dict(self) -> dict:
        out = {"label": self.label, "route": self.route, "caveat": self.caveat, "witnesses": self.witnesses}
        if self.parts:
            out["parts"] = [p.to_dict() for p in self.parts]
        return out


def _constant_failure(structure: TemporalStructure) -> dict | None:
    for symbol, rel in sorted(structure.relations.items()):
        if rel.orbits and (0,) * rel.arity not in rel.orbits:
            return {"op": "constant", "relation": symbol}
    return None


def _violation(label: str, structure: TemporalStructure) -> dict | None:
    spec = op(label)
    for symbol, rel in sorted(structure.relations.items()):
        found = find_violation(spec, rel)
        if found is not None:
            s, t, interleaving, image = found
            return {"op": label, "relation": symbol, "s": list(s), "t": list(t),
                    "interleaving": list(interleaving), "image": list(image)}
    return None


def failure_matrix(structure: TemporalStructure) -> list[dict]:
    """One entry per candidate operation: a violation, or None where the operation preserves everything."""
    rows = [_constant_failure(structure) or {"op": "constant", "relation": None}]
    for label in TRACTABLE_OPS:
        rows.append(_violation(label, structure) or {"op": label, "relation": None})
    return rows


def classify_temporal(structure: TemporalStructure) -> Verdict:
    if has_constant_polymorphism(structure):
        return Verdict(P, "constant", [{"op": "constant"}])
    matrix = failure_matrix(structure)
    for row in matrix[1:]:
        if row["relation"] is None:
            return Verdict(P, "polymorphism", [{"op": row["op"]}])
    return Verdict(NPC, "no-route", matrix)


def revalidate(verdict: Verdict, structure: TemporalStructure) -> bool:
    """Recheck the witnesses of a single-structure verdict against ``structure``."""
    if verdict.label == P:
        (w,) = verdict.witnesses
        if w["op"] == "constant":
            return has_constant_polymorphism(structure)
        return _violation(w["op"], structure) is None
    if verdict.label != NPC:
        return False
    for row in verdict.witnesses:
        symbol = row["relation"]
        if symbol is None:
            return False
        rel = structure[symbol]
        if row["op"] == "constant":
            if (0,) * rel.arity in rel.orbits:
                return False
            continue
        image = apply_binary(op(row["op"]), tuple(row["s"]), tuple(row["t"]), tuple(row["interleaving"]))
        if tuple(row["s"]) not in rel or tuple(row["t"]) not in rel or image in rel:
            return False
    return True


def has_binary_injective(structure: TemporalStructure) -> bool | None:
    """True, False, or None when the available criteria do not decide it."""
    for label in ("ll", "dll"):
        if _violation(label, structure) is None:
            return True
    if structure_preserved_by_all_permutations(structure):
        # on relations definable from equality every injective binary
        # operation behaves like ll, which fails here
        return False
    if any(_violation(label, structure) is None for label in TRACTABLE_OPS):
        return False
    return None


def _union(a1: TemporalStructure, a2: TemporalStructure) -> TemporalStructure:
    rel = dict(a1.renamed("1.").relations)
    rel.update(a2.renamed("2.").relations)
    return TemporalStructure(f"{a1.name}+{a2.name}", rel)


def classify_combination(a1: TemporalStructure, a2: TemporalStructure) -> Verdict:
    """Verdict for the union of two theories with disjoint signatures."""
    if structure_preserved_by_all_permutations(a1) or structure_preserved_by_all_permutations(a2):
        inner = classify_temporal(_union(a1, a2))
        return Verdict(inner.label, "all-perms-union", inner.witnesses, parts=[inner])
    if has_constant_polymorphism(a1) and has_constant_polymorphism(a2):
        return Verdict(P, "both-constant", [{"side": 1, "op": "constant"}, {"side": 2, "op": "constant"}])
    sides = [classify_temporal(a1), classify_temporal(a2)]
    if any(v.label == NPC for v in sides):
        witnesses = [dict(row, side=i + 1) for i, v in enumerate(sides) if v.label == NPC for row in v.witnesses]
        return Verdict(NPC, "single-side-hard", witnesses, parts=sides)
    injective = [has_binary_injective(a1), has_binary_injective(a2)]
    if all(injective):
        witnesses = [dict(w, side=i + 1) for i, v in enumerate(sides) for w in v.witnesses]
        return Verdict(P, "both-bin-inj", witnesses, parts=sides)
    if False in injective:
        witnesses = []
        for i, (a, inj) in enumerate(zip((a1, a2), injective)):
            if inj is False:
                const = _constant_failure(a)
                if const is not None:
                    witnesses.append(dict(const, side=i + 1))
                for label in ("ll", "dll"):
                    witnesses.append(dict(_violation(label, a), side=i + 1))
        return Verdict(NPC, "no-route", witnesses, parts=sides)
    return Verdict(MANUAL, "no-route", [{"side": i + 1, "binary-injective": "unknown"}
                                        for i, inj in enumerate(injective) if inj is None], parts=sides)
