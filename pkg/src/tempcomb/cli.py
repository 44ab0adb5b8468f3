"""Command line front end.

Every command prints one JSON report.  Exit status: 0 on success, 1 for an
unsatisfiable or negative answer, 2 on error.
"""

from __future__ import annotations

import argparse
import json
import signal
import sys
from contextlib import contextmanager

from . import __version__
from .classify import MANUAL, classify_combination, classify_temporal
from .cnf import format_dnf
from .definability import (
    bounded_ppdef_search,
    check_cross_prevention,
    cross_prevention_conditions,
    extract_rmix_definition,
)
from .dsl import Manifest, parse_manifest, parse_relation_ref
from .errors import LookupFailure, ResourceError, TempcombError
from .forms import SYNTH_FORMS, synthesize_form
from .library import builtin
from .ops import find_violation, op
from .order import DEFAULT_CAP, TemporalStructure
from .pp import EVAL_CAP, Atom, PPFormula, parse_pp
from .solvers import (
    ORACLE_CAP,
    CombinedInstance,
    Instance,
    combine_nelson_oppen,
    find_ep_definition,
    independence_falsifier,
    oracle_solver,
    solve_combined_oracle,
    solve_min_closed,
    solve_oracle,
)

COMMANDS = (
    "classify", "classify-comb", "solve", "solve-comb", "combine", "poly-check",
    "normal-form", "ppdef-search", "extract-rmix", "cross-prevention",
)


class _Negative(Exception):
    """The command ran and the answer is negative."""


# ------------------------------------------------------------------ inputs

def _load_manifest(path: str | None) -> Manifest | None:
    if path is None:
        return None
    text = sys.stdin.read() if path == "-" else open(path, encoding="utf-8").read()
    return parse_manifest(text)


def _structure(ref: str, manifest: Manifest | None, cap: int) -> TemporalStructure:
    """A manifest structure name, or builtins joined by commas such as ``@<,@Rmix``."""
    if ref.startswith("@"):
        names = [p.strip()[1:] for p in ref.split(",")]
        return TemporalStructure(ref, {n: builtin(n) for n in names})
    if manifest is None:
        raise LookupFailure(f"structure {ref!r} needs a manifest")
    return manifest.structure(ref, cap)


def _bind_comparisons(formula: PPFormula, structure: TemporalStructure) -> PPFormula:
    """Point infix comparison atoms at the structure's relation of the same meaning."""
    atoms = []
    for a in formula.atoms:
        symbol = a.symbol
        if symbol in ("<", "<=", "!=") and symbol not in structure:
            found = structure.find(builtin(symbol))
            if found is not None:
                symbol = found
        atoms.append(Atom(symbol, a.args))
    return PPFormula(formula.free, formula.bound, tuple(atoms))


def _order(o) -> list[int] | None:
    return None if o is None else list(o)


# ---------------------------------------------------------------- commands

def cmd_classify(args, manifest):
    structure = _structure(args.structure, manifest, args.cap)
    verdict = classify_temporal(structure)
    return {"structure": structure.name, "verdict": verdict.to_dict()}


def cmd_classify_comb(args, manifest):
    a1 = _structure(args.structures[0], manifest, args.cap)
    a2 = _structure(args.structures[1], manifest, args.cap)
    verdict = classify_combination(a1, a2)
    if verdict.label == MANUAL:
        raise _Negative({"structures": [a1.name, a2.name], "verdict": verdict.to_dict()})
    return {"structures": [a1.name, a2.name], "verdict": verdict.to_dict()}


def _instance(args, manifest, combined: bool):
    if manifest is None:
        raise LookupFailure("instances need a manifest")
    inst = manifest.instance(args.instance, args.cap)
    if isinstance(inst, CombinedInstance) != combined:
        kind = "a combined" if combined else "a single-structure"
        raise LookupFailure(f"instance {args.instance!r} is not {kind} instance")
    return inst


def cmd_solve(args, manifest):
    inst: Instance = _instance(args, manifest, False)
    if args.solver == "min":
        witness = solve_min_closed(inst)
    else:
        witness = solve_oracle(inst, args.oracle_cap)
    report = {"instance": args.instance, "solver": args.solver, "variables": list(inst.variables),
              "sat": witness is not None, "witness": _order(witness)}
    if witness is None:
        raise _Negative(report)
    return report


def cmd_solve_comb(args, manifest):
    inst: CombinedInstance = _instance(args, manifest, True)
    found = solve_combined_oracle(inst, args.oracle_cap)
    report = {"instance": args.instance, "variables": list(inst.variables), "sat": found is not None,
              "witness": None if found is None else [list(found[0]), list(found[1])]}
    if found is None:
        raise _Negative(report)
    return report


def cmd_combine(args, manifest):
    inst: CombinedInstance = _instance(args, manifest, True)
    eps = [find_ep_definition(inst.structure1), find_ep_definition(inst.structure2)]
    for i, ep in enumerate(eps):
        if ep is None:
            raise LookupFailure(f"side {i + 1} has no existential positive definition of !=")
    independence = []
    for i, s in enumerate((inst.structure1, inst.structure2)):
        r = independence_falsifier(s, eps[i], trials=args.trials, seed=args.seed)
        independence.append({"side": i + 1, "certified": r.certified, "counterexample": r.counterexample,
                             "note": r.reason})
    report = combine_nelson_oppen(inst.part(1), inst.part(2), oracle_solver, oracle_solver, *eps)
    out = {
        "instance": args.instance,
        "variables": list(inst.variables),
        "ep_definitions": [str(e) for e in eps],
        "independence": independence,
        "preconditions_hold": not any(i["counterexample"] for i in independence),
        "sat": report.sat,
        "merges": [list(m) for m in report.merges],
        "solver_calls": report.calls,
        "trace": report.trace,
    }
    if not report.sat:
        raise _Negative(out)
    return out


def cmd_poly_check(args, manifest):
    rel = parse_relation_ref(args.rel, manifest, args.cap)
    spec = op(args.op)
    found = find_violation(spec, rel, full=args.full)
    report = {"op": spec.label, "relation": args.rel, "preserved": found is None}
    if found is not None:
        s, t, inter, image = found
        report["violation"] = {"s": list(s), "t": list(t), "interleaving": list(inter), "image": list(image)}
        raise _Negative(report)
    return report


def cmd_normal_form(args, manifest):
    rel = parse_relation_ref(args.rel, manifest, args.cap)
    cnf = synthesize_form(rel, args.form, args.cap)
    report = {"form": args.form, "relation": args.rel, "orbits": format_dnf(rel),
              "cnf": None if cnf is None else cnf.format()}
    if cnf is None:
        raise _Negative(report)
    return report


def cmd_ppdef_search(args, manifest):
    structure = _structure(args.structure, manifest, args.cap)
    target = parse_relation_ref(args.target, manifest, args.cap)
    phi = bounded_ppdef_search(structure, target, args.max_bound, args.max_atoms)
    report = {"structure": structure.name, "target": args.target, "found": phi is not None,
              "formula": None if phi is None else str(phi)}
    if phi is None:
        report["note"] = "not found within the bounds; this does not show non-definability"
        raise _Negative(report)
    return report


def cmd_extract_rmix(args, manifest):
    structure = _structure(args.structure, manifest, args.cap)
    ext = extract_rmix_definition(structure)
    report = {
        "structure": structure.name,
        "applicable": ext.applicable,
        "reason": ext.reason,
        "route": ext.route,
        "formula": None if ext.formula is None else str(ext.formula),
        "definitions": [{"symbol": s, "formula": None if f is None else str(f)} for s, f in ext.definitions],
        "witnesses": {k: list(v) for k, v in ext.witnesses.items()},
        "conditional": ext.conditional,
        "validated": ext.validated,
    }
    if not ext.applicable:
        raise _Negative(report)
    return report


def cmd_cross_prevention(args, manifest):
    structure = _structure(args.structure, manifest, args.cap)
    free = tuple(v.strip() for v in args.free.split(","))
    phi = _bind_comparisons(parse_pp(args.formula, free), structure)
    conditions = cross_prevention_conditions(structure, phi)
    ok = check_cross_prevention(structure, phi)
    report = {"structure": structure.name, "formula": str(phi), "prevents_crosses": ok,
              "conditions": {"equal-x-y-sat": conditions[0], "equal-u-v-sat": conditions[1],
                             "both-equal-sat": conditions[2]}}
    if not ok:
        raise _Negative(report)
    return report


HANDLERS = {
    "classify": cmd_classify,
    "classify-comb": cmd_classify_comb,
    "solve": cmd_solve,
    "solve-comb": cmd_solve_comb,
    "combine": cmd_combine,
    "poly-check": cmd_poly_check,
    "normal-form": cmd_normal_form,
    "ppdef-search": cmd_ppdef_search,
    "extract-rmix": cmd_extract_rmix,
    "cross-prevention": cmd_cross_prevention,
}


# ------------------------------------------------------------------ parser

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("manifest", nargs="?", help="manifest file, or - for stdin")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--cap", type=int, default=DEFAULT_CAP, help="largest relation arity")
    common.add_argument("--oracle-cap", type=int, default=ORACLE_CAP, help="largest instance for the oracles")
    common.add_argument("--time-budget", type=float, default=None, help="seconds before giving up")
    common.add_argument("--out", help="write the report here instead of stdout")

    parser = argparse.ArgumentParser(prog="tempcomb", description="Temporal constraint languages and their combinations.")
    parser.add_argument("--version", action="version", version=f"tempcomb {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("classify", parents=[common], help="P or NP-complete for one structure")
    p.add_argument("--structure", required=True)
    p = sub.add_parser("classify-comb", parents=[common], help="P or NP-complete for a combination")
    p.add_argument("--structures", nargs=2, required=True, metavar=("A", "B"))
    p = sub.add_parser("solve", parents=[common], help="decide a single-structure instance")
    p.add_argument("--instance", required=True)
    p.add_argument("--solver", choices=("oracle", "min"), default="oracle")
    p = sub.add_parser("solve-comb", parents=[common], help="decide a combined instance exactly")
    p.add_argument("--instance", required=True)
    p = sub.add_parser("combine", parents=[common], help="decide a combined instance by equality propagation")
    p.add_argument("--instance", required=True)
    p.add_argument("--trials", type=int, default=200, help="random trials for the independence check")
    p = sub.add_parser("poly-check", parents=[common], help="does an operation preserve a relation")
    p.add_argument("--op", required=True)
    p.add_argument("--rel", required=True, help="@Builtin, Structure.Symbol, or k:CNF")
    p.add_argument("--full", action="store_true", help="check every interleaving")
    p = sub.add_parser("normal-form", parents=[common], help="reduced CNF of a syntactic form")
    p.add_argument("--form", required=True, choices=SYNTH_FORMS)
    p.add_argument("--rel", required=True)
    p = sub.add_parser("ppdef-search", parents=[common], help="bounded search for a pp-definition")
    p.add_argument("--structure", required=True)
    p.add_argument("--target", required=True)
    p.add_argument("--max-bound", type=int, default=2)
    p.add_argument("--max-atoms", type=int, default=4)
    p = sub.add_parser("extract-rmix", parents=[common], help="pp-define R^mix in a structure")
    p.add_argument("--structure", required=True)
    p = sub.add_parser("cross-prevention", parents=[common], help="check a cross prevention formula")
    p.add_argument("--structure", required=True)
    p.add_argument("--formula", required=True)
    p.add_argument("--free", default="x,y,u,v", help="the four free variables in order")
    return parser


@contextmanager
def _deadline(seconds: float | None):
    if not seconds:
        yield
        return

    def expire(signum, frame):
        raise ResourceError(f"time budget of {seconds} s exceeded")

    old = signal.signal(signal.SIGALRM, expire)
    signal.setitimer(signal.ITIMER_REAL, seconds)
    try:
        yield
    finally:
        signal.setitimer(signal.ITIMER_REAL, 0)
        signal.signal(signal.SIGALRM, old)


def run(argv: list[str] | None = None) -> tuple[int, dict]:
    """Run a command and return ``(exit status, report)``."""
    return execute(build_parser().parse_args(argv))


def execute(args: argparse.Namespace) -> tuple[int, dict]:
    report = {
        "tool": "tempcomb",
        "version": __version__,
        "command": args.command,
        "seed": args.seed,
        "caps": {"arity": args.cap, "oracle": args.oracle_cap, "eval": EVAL_CAP},
        "time_budget": args.time_budget,
    }
    try:
        with _deadline(args.time_budget):
            manifest = _load_manifest(args.manifest)
            report["result"] = HANDLERS[args.command](args, manifest)
            status = 0
    except _Negative as neg:
        report["result"] = neg.args[0]
        status = 1
    except TempcombError as exc:
        report["error"] = {"module": exc.module, "type": type(exc).__name__, "message": str(exc)}
        status = 2
    except OSError as exc:
        report["error"] = {"module": "cli", "type": type(exc).__name__, "message": str(exc)}
        status = 2
    return status, report


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    status, report = execute(args)
    text = json.dumps(report, indent=2, ensure_ascii=False) + "\n"
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return status


if __name__ == "__main__":
    sys.exit(main())
