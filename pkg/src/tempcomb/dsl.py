"""Manifest language for structures and instances.

::

    # comments run to the end of the line
    structure A {
      rel Lt/2 := x1 < x2;
      rel Mix := @Rmix;
    }
    instance I over A { Lt(x, y); Mix(x, y, z); x = z; }
    instance J over A, B { A.Lt(x, y); B.Lt(y, x); B.x = y; }

Relation bodies are CNFs over the positional variables ``x1..xk``.  In an
instance over two structures every constraint names its side.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .cnf import OrderCNF, parse_cnf_tokens, relation_from_cnf
from .errors import LookupFailure, ParseError
from .library import builtin
from .order import DEFAULT_CAP, TemporalRelation, TemporalStructure
from .solvers import CombinedInstance, Instance
from .syntax import TokenStream


@dataclass(frozen=True)
class RelationDecl:
    name: str
    arity: int
    cnf: OrderCNF | None = None
    builtin: str | None = None

    def relation(self, cap: int = DEFAULT_CAP) -> TemporalRelation:
        if self.builtin is not None:
            return builtin(self.builtin).named(self.name)
        return relation_from_cnf(self.cnf, cap, self.name)

    def serialize(self) -> str:
        body = f"@{self.builtin}" if self.builtin is not None else self.cnf.format()
        return f"rel {self.name}/{self.arity} := {body};"


@dataclass(frozen=True)
class StructureDecl:
    name: str
    relations: tuple[RelationDecl, ...]

    def build(self, cap: int = DEFAULT_CAP) -> TemporalStructure:
        return TemporalStructure(self.name, {r.name: r.relation(cap) for r in self.relations})

    def serialize(self) -> str:
        body = "".join(f"\n  {r.serialize()}" for r in self.relations)
        return f"structure {self.name} {{{body}\n}}"


@dataclass(frozen=True)
class Constraint:
    side: str
    symbol: str
    args: tuple[str, ...]

    def serialize(self, qualified: bool) -> str:
        prefix = f"{self.side}." if qualified else ""
        if self.symbol == "=":
            return f"{prefix}{self.args[0]} = {self.args[1]};"
        return f"{prefix}{self.symbol}({', '.join(self.args)});"


@dataclass(frozen=True)
class InstanceDecl:
    name: str
    over: tuple[str, ...]
    constraints: tuple[Constraint, ...]

    @property
    def combined(self) -> bool:
        return len(self.over) == 2

    def variables(self) -> tuple[str, ...]:
        return tuple(dict.fromkeys(a for c in self.constraints for a in c.args))

    def serialize(self) -> str:
        body = "".join(f"\n  {c.serialize(self.combined)}" for c in self.constraints)
        return f"instance {self.name} over {', '.join(self.over)} {{{body}\n}}"


@dataclass
class Manifest:
    structures: dict[str, StructureDecl] = field(default_factory=dict)
    instances: dict[str, InstanceDecl] = field(default_factory=dict)

    def structure(self, name: str, cap: int = DEFAULT_CAP) -> TemporalStructure:
        if name not in self.structures:
            raise LookupFailure(f"unknown structure {name!r}")
        return self.structures[name].build(cap)

    def instance(self, name: str, cap: int = DEFAULT_CAP) -> Instance | CombinedInstance:
        if name not in self.instances:
            raise LookupFailure(f"unknown instance {name!r}")
        decl = self.instances[name]
        built = {s: self.structure(s, cap) for s in decl.over}
        variables = decl.variables()
        if not decl.combined:
            (s,) = decl.over
            return Instance(variables, tuple((c.symbol, c.args) for c in decl.constraints), built[s])
        a, b = decl.over
        sides = {a: [], b: []}
        for c in decl.constraints:
            sides[c.side].append((c.symbol, c.args))
        return CombinedInstance(variables, tuple(sides[a]), tuple(sides[b]), built[a], built[b])

    def serialize(self) -> str:
        parts = [s.serialize() for s in self.structures.values()]
        parts += [i.serialize() for i in self.instances.values()]
        return "\n".join(parts) + "\n"


def _relation(stream: TokenStream, known: set[str]) -> RelationDecl:
    name = stream.expect("ident")
    if name.text in known:
        raise stream.error(f"relation {name.text!r} declared twice", name)
    arity = None
    if stream.accept("/"):
        arity = int(stream.expect("number").text)
    stream.expect("coloneq")
    if stream.accept("@"):
        start = stream.peek()
        ref = ""
        if stream.accept("op"):
            ref = stream.tokens[stream.pos - 1].text
        else:
            if stream.accept("-"):
                ref = "-"
            ref += stream.expect("ident").text
        try:
            rel = builtin(ref)
        except LookupFailure as exc:
            raise stream.error(str(exc), start) from None
        if arity is not None and arity != rel.arity:
            raise stream.error(f"@{ref} has arity {rel.arity}, declared {arity}", start)
        return RelationDecl(name.text, rel.arity, builtin=ref)
    if arity is None:
        raise stream.error(f"relation {name.text!r} needs an arity, as in {name.text}/2", name)
    if arity < 1:
        raise stream.error("arity must be positive", name)
    start = stream.peek()
    variables = tuple(f"x{i + 1}" for i in range(arity))
    cnf = parse_cnf_tokens(stream, variables, stop=(";", "}"))
    if arity > DEFAULT_CAP:
        raise stream.error(f"arity {arity} exceeds the cap {DEFAULT_CAP}", start)
    return RelationDecl(name.text, arity, cnf=cnf)


def _structure(stream: TokenStream, manifest: Manifest) -> StructureDecl:
    name = stream.expect("ident")
    if name.text in manifest.structures:
        raise stream.error(f"structure {name.text!r} declared twice", name)
    stream.expect("{")
    relations: list[RelationDecl] = []
    while not stream.accept("}"):
        kw = stream.expect("ident")
        if kw.text != "rel":
            raise stream.error(f"expected 'rel', found {kw.text!r}", kw)
        relations.append(_relation(stream, {r.name for r in relations}))
        if not stream.accept(";"):
            if not stream.at("}"):
                raise stream.error(f"expected ';', found {stream.peek().text!r}")
    return StructureDecl(name.text, tuple(relations))


def _constraint(stream: TokenStream, over: tuple[str, ...], manifest: Manifest) -> Constraint:
    first = stream.expect("ident")
    side = over[0] if len(over) == 1 else None
    head = first
    if stream.at(".") and first.text in over:
        stream.next()
        side = first.text
        head = stream.expect("ident")
    if side is None:
        raise stream.error("constraints of a combined instance must name their structure, as in A.R(x, y)", first)
    decl = manifest.structures[side]
    if stream.accept("op", "="):
        right = stream.expect("ident")
        return Constraint(side, "=", (head.text, right.text))
    stream.expect("(")
    args = []
    if not stream.at(")"):
        while True:
            args.append(stream.expect("ident").text)
            if not stream.accept(","):
                break
    stream.expect(")")
    rels = {r.name: r for r in decl.relations}
    if head.text not in rels:
        raise stream.error(f"unknown relation {head.text!r} in structure {side!r}", head)
    if rels[head.text].arity != len(args):
        raise stream.error(f"{head.text} has arity {rels[head.text].arity}, got {len(args)} arguments", head)
    return Constraint(side, head.text, tuple(args))


def _instance(stream: TokenStream, manifest: Manifest) -> InstanceDecl:
    name = stream.expect("ident")
    if name.text in manifest.instances:
        raise stream.error(f"instance {name.text!r} declared twice", name)
    kw = stream.expect("ident")
    if kw.text != "over":
        raise stream.error(f"expected 'over', found {kw.text!r}", kw)
    over = []
    while True:
        tok = stream.expect("ident")
        if tok.text not in manifest.structures:
            raise stream.error(f"unknown structure {tok.text!r}", tok)
        over.append(tok.text)
        if not stream.accept(","):
            break
    if len(over) > 2 or len(set(over)) != len(over):
        raise stream.error("an instance is over one structure or two distinct ones", name)
    stream.expect("{")
    constraints = []
    while not stream.accept("}"):
        constraints.append(_constraint(stream, tuple(over), manifest))
        if not stream.accept(";") and not stream.at("}"):
            raise stream.error(f"expected ';', found {stream.peek().text!r}")
    return InstanceDecl(name.text, tuple(over), tuple(constraints))


def parse_manifest(text: str) -> Manifest:
    stream = TokenStream(text)
    manifest = Manifest()
    while not stream.at("eof"):
        kw = stream.expect("ident")
        if kw.text == "structure":
            decl = _structure(stream, manifest)
            manifest.structures[decl.name] = decl
        elif kw.text == "instance":
            decl = _instance(stream, manifest)
            manifest.instances[decl.name] = decl
        else:
            raise stream.error(f"expected 'structure' or 'instance', found {kw.text!r}", kw)
    return manifest


def parse_relation_ref(text: str, manifest: Manifest | None = None, cap: int = DEFAULT_CAP) -> TemporalRelation:
    """``@Builtin``, ``Structure.Symbol`` from the manifest, or an inline ``k:CNF``."""
    text = text.strip()
    if text.startswith("@"):
        return builtin(text[1:])
    if manifest is not None and "." in text:
        s, _, r = text.partition(".")
        structure = manifest.structure(s, cap)
        if r not in structure:
            raise LookupFailure(f"unknown relation {r!r} in structure {s!r}")
        return structure[r]
    head, sep, body = text.partition(":")
    if sep and head.strip().isdigit():
        k = int(head)
        stream = TokenStream(body)
        cnf = parse_cnf_tokens(stream, tuple(f"x{i + 1}" for i in range(k)))
        stream.expect("eof")
        return relation_from_cnf(cnf, cap)
    raise ParseError(f"cannot read relation reference {text!r}", 1, 1)
