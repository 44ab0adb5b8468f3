"""Temporal constraint languages: polymorphisms, pp-definitions, solvers and combination verdicts."""

from __future__ import annotations

__version__ = "0.1.0"

from .classify import Verdict, classify_combination, classify_temporal, has_binary_injective
from .cnf import OrderCNF, parse_cnf, relation_from_cnf
from .definability import (
    bounded_ppdef_search,
    check_cross_prevention,
    extract_rmix_definition,
)
from .dsl import Manifest, parse_manifest
from .forms import recognize_form, synthesize_form
from .gf2 import GF2System, chi0_system
from .library import builtin, rmix_n
from .ops import ConcreteMixTable, op, preserves
from .order import TemporalRelation, TemporalStructure, enumerate_weak_orders
from .pp import PPFormula, eval_pp, parse_pp, rmix_n_inductive
from .solvers import (
    CombinedInstance,
    EpDefinition,
    Instance,
    combine_nelson_oppen,
    solve_combined_oracle,
    solve_min_closed,
    solve_oracle,
)

__all__ = [
    "CombinedInstance", "ConcreteMixTable", "EpDefinition", "GF2System", "Instance", "Manifest",
    "OrderCNF", "PPFormula", "TemporalRelation", "TemporalStructure", "Verdict",
    "bounded_ppdef_search", "builtin", "check_cross_prevention", "chi0_system", "classify_combination",
    "classify_temporal", "combine_nelson_oppen", "enumerate_weak_orders", "eval_pp",
    "extract_rmix_definition", "has_binary_injective", "op", "parse_cnf", "parse_manifest", "parse_pp",
    "preserves", "recognize_form", "relation_from_cnf", "rmix_n", "rmix_n_inductive", "solve_combined_oracle",
    "solve_min_closed", "solve_oracle", "synthesize_form",
]
