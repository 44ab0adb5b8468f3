from __future__ import annotations

import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import brute_combined_sat, brute_sat
from tempcomb.cnf import parse_cnf, relation_from_cnf
from tempcomb.errors import FragmentError, ResourceError
from tempcomb.library import builtin
from tempcomb.order import TemporalStructure, orbit_of
from tempcomb.solvers import (
    NEQ_SYMBOL,
    CombinedInstance,
    Instance,
    combine_nelson_oppen,
    find_ep_definition,
    independence_falsifier,
    oracle_solver,
    satisfies,
    set_partitions,
    solve_combined_oracle,
    solve_min_closed,
    solve_oracle,
    with_disequality,
)

from oracles import bell


def structure(*names):
    return TemporalStructure(",".join(names), {n: builtin(n) for n in names})


LIB = structure("<", "<=", "!=", "Rmix", "Betw", "T3", "Rmin_le")


def test_oracle_examples():
    assert solve_oracle(Instance.build(LIB, [("<", "xy"), ("<", "yx")])) is None
    assert solve_oracle(Instance.build(LIB, [("Betw", "xyz"), ("Betw", "yxz")])) is None
    assert solve_oracle(Instance.build(LIB, [("Rmix", "xyz"), ("<", "xy")])) == (1, 2, 0)


def test_oracle_cap():
    inst = Instance(tuple(f"v{i}" for i in range(9)), (), LIB)
    with pytest.raises(ResourceError):
        solve_oracle(inst)


atoms3 = st.lists(
    st.one_of(
        st.tuples(st.sampled_from(["<", "<=", "!="]), st.tuples(*[st.sampled_from("abcd")] * 2)),
        st.tuples(st.sampled_from(["Rmix", "Betw", "T3", "Rmin_le"]), st.tuples(*[st.sampled_from("abcd")] * 3)),
    ),
    min_size=1, max_size=5,
)


@given(atoms3)
@settings(max_examples=150, deadline=None)
def test_oracle_matches_brute_force(atoms):
    inst = Instance.build(LIB, atoms)
    witness = solve_oracle(inst)
    assert (witness is not None) == brute_sat(inst.variables, atoms, LIB.relations)
    if witness is not None:
        assert satisfies(inst, witness)


@pytest.mark.parametrize("n", range(1, 7))
def test_set_partitions_counted_by_bell(n):
    parts = list(set_partitions(n))
    assert len(parts) == len(set(map(tuple, parts))) == bell(n)


def test_combined_oracle_examples():
    lt = structure("<")
    eq = TemporalStructure("eq", {"<": builtin("<"), "E": builtin("=")})
    sat = CombinedInstance(("x", "y"), (("<", ("x", "y")),), (("<", ("y", "x")),), lt, lt)
    assert solve_combined_oracle(sat) is not None
    clash = CombinedInstance(("x", "y"), (("<", ("x", "y")),), (("E", ("x", "y")),), lt, eq)
    assert solve_combined_oracle(clash) is None
    mixed = CombinedInstance(("x", "y", "z", "u"), (("Rmix", ("x", "y", "z")),),
                             (("<", ("x", "u")), ("<", ("u", "y"))), structure("Rmix"), lt)
    assert solve_combined_oracle(mixed) is not None


SIDES = [structure("<", "<="), structure("<", "!="), structure("Betw"), structure("<", "Rmix")]


@given(st.integers(0, 10_000))
@settings(max_examples=60, deadline=None)
def test_combined_oracle_matches_brute_force(seed):
    rng = random.Random(seed)
    a1, a2 = rng.choice(SIDES), rng.choice(SIDES)
    names = [f"v{i}" for i in range(rng.randint(2, 4))]

    def side(s):
        syms = sorted(s.relations)
        return tuple((sym, tuple(rng.choice(names) for _ in range(s[sym].arity)))
                     for sym in (rng.choice(syms) for _ in range(rng.randint(0, 3))))

    s1, s2 = side(a1), side(a2)
    inst = CombinedInstance(tuple(names), s1, s2, a1, a2)
    got = solve_combined_oracle(inst) is not None
    assert got == brute_combined_sat(tuple(names), s1, a1.relations, s2, a2.relations)


def _cnf_structure(**defs):
    return TemporalStructure("cnf", {k: relation_from_cnf(parse_cnf(v)) for k, v in defs.items()})


def test_min_solver_examples():
    s = _cnf_structure(G="x1 > x2 | x1 > x3", W="x1 >= x2 | x1 > x3", L="x1 > x2")
    cyc = Instance.build(s, [("G", "xyz"), ("G", "yxz"), ("G", "zxy")])
    assert solve_min_closed(cyc) is None and solve_oracle(cyc) is None
    assert solve_min_closed(Instance.build(s, [("W", "xyz")])) is not None
    assert solve_min_closed(Instance.build(s, [("L", "xy")])) is not None


def test_min_solver_rejects_other_fragments():
    with pytest.raises(FragmentError):
        solve_min_closed(Instance.build(LIB, [("Betw", "xyz")]))


def test_ep_definitions():
    for s in (structure("<"), structure("!="), structure("<", "<=")):
        ep = find_ep_definition(s)
        assert ep is not None and ep.validate(s)
    assert find_ep_definition(structure("<="), search=False) is None


def test_combiner_examples():
    le = structure("<", "<=")
    ep = find_ep_definition(le)
    s1 = Instance.build(le, [("<=", "xy"), ("<=", "yx")])
    s2 = Instance.build(le, [("<", "xz"), ("<", "zy")])
    report = combine_nelson_oppen(s1, s2, oracle_solver, oracle_solver, ep, ep)
    assert not report.sat and report.merges[0] == ("x", "y")
    easy = combine_nelson_oppen(Instance.build(le, [("<=", "xy")]), Instance.build(le, [("<", "yx")]),
                                oracle_solver, oracle_solver, ep, ep)
    assert easy.sat and easy.merges == []
    alone = combine_nelson_oppen(s1, Instance(("x", "y"), (), le), oracle_solver, oracle_solver, ep, ep)
    assert alone.sat == (solve_oracle(s1) is not None)


def test_combiner_requires_ep_definitions():
    s = Instance.build(structure("<"), [("<", "xy")])
    with pytest.raises(ValueError):
        combine_nelson_oppen(s, s, oracle_solver, oracle_solver, None, None)


LL_SIDES = [structure("<", "<="), structure("<", "!="), structure("<")]


@pytest.mark.parametrize("seed", range(40))
def test_merges_are_entailed(seed):
    rng = random.Random(seed)
    a1, a2 = rng.choice(LL_SIDES), rng.choice(LL_SIDES)
    names = [f"v{i}" for i in range(rng.randint(2, 5))]

    def side(s):
        syms = sorted(s.relations)
        return tuple((rng.choice(syms), (rng.choice(names), rng.choice(names))) for _ in range(rng.randint(1, 4)))

    inst = CombinedInstance(tuple(names), side(a1), side(a2), a1, a2)
    ep1, ep2 = find_ep_definition(a1), find_ep_definition(a2)
    report = combine_nelson_oppen(inst.part(1), inst.part(2), oracle_solver, oracle_solver, ep1, ep2)
    assert report.sat == (solve_combined_oracle(inst) is not None)
    for a, b in report.merges:
        apart = CombinedInstance(inst.variables, inst.side1 + ((NEQ_SYMBOL, (a, b)),), inst.side2,
                                 with_disequality(a1), a2)
        assert solve_combined_oracle(apart) is None


def test_independence_falsifier():
    assert independence_falsifier(structure("<")).certified
    eq = TemporalStructure("eq", {"E": builtin("=")})
    assert not independence_falsifier(eq, trials=200).found
    hard = independence_falsifier(structure("<", "Rmin_le"), trials=3000, max_vars=5, seed=0)
    assert hard.found and not hard.certified
    ce = hard.counterexample
    base = Instance(tuple(ce["variables"]), tuple((s, tuple(a)) for s, a in ce["constraints"]),
                    with_disequality(structure("<", "Rmin_le")))
    for p in ce["disequalities"]:
        assert solve_oracle(base.with_constraints([(NEQ_SYMBOL, tuple(p))])) is not None
    joint = base.with_constraints([(NEQ_SYMBOL, tuple(p)) for p in ce["disequalities"]])
    assert solve_oracle(joint) is None


def test_orbit_witness_is_rank_vector():
    w = solve_oracle(Instance.build(LIB, [("<", "xy"), ("<", "yz")]))
    assert w == orbit_of(w) == (0, 1, 2)
