from __future__ import annotations

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import concrete_relation, ordered_bell, orbit_patterns, DEFINING_PREDICATES
from tempcomb.errors import ArityError
from tempcomb.library import builtin
from tempcomb.order import (
    TemporalRelation,
    TemporalStructure,
    chi,
    chi0,
    enumerate_weak_orders,
    has_constant_polymorphism,
    kernel,
    min_tuple,
    orbit_of,
    preserved_by_all_permutations,
)

values = st.lists(st.integers(-5, 5), min_size=1, max_size=6)


def test_small_enumerations():
    assert enumerate_weak_orders(1) == ((0,),)
    assert set(enumerate_weak_orders(2)) == {(0, 0), (0, 1), (1, 0)}


@pytest.mark.parametrize("n", range(1, 8))
def test_counts_match_ordered_bell(n):
    orders = enumerate_weak_orders(n)
    assert len(orders) == len(set(orders)) == ordered_bell(n)


def test_zero_arity_rejected():
    with pytest.raises(ArityError):
        enumerate_weak_orders(0)


@pytest.mark.parametrize("vals, expected", [
    ((3.5, 3.5, 7), (0, 0, 1)),
    ((2, 3, 0), (1, 2, 0)),
    ((5, 1, 1, 9), (1, 0, 0, 2)),
])
def test_orbit_of(vals, expected):
    assert orbit_of(vals) == expected


@given(values)
def test_orbit_is_canonical(vals):
    o = orbit_of(vals)
    assert set(o) == set(range(max(o) + 1))
    assert orbit_of(o) == o
    for i in range(len(vals)):
        for j in range(len(vals)):
            assert (vals[i] < vals[j]) == (o[i] < o[j])


@given(values)
def test_min_tuple_marks_minimum(vals):
    bits = min_tuple(orbit_of(vals))
    assert bits == tuple(int(v == min(vals)) for v in vals)
    assert any(bits)


def test_min_tuple_examples():
    assert min_tuple(orbit_of((5, 5, 7))) == (1, 1, 0)
    assert min_tuple((0, 0, 0)) == (1, 1, 1)
    assert chi0(builtin("Rmix")) == {(1, 1, 1), (1, 1, 0), (0, 0, 1), (0, 0, 0)}


@pytest.mark.parametrize("name", ["Rmix", "X", "T3", "Betw", "Cycl", "Rmin_le", "Rmi", "Smi"])
def test_chi_zero_vector(name):
    rel = builtin(name)
    assert (0, 0, 0) in chi0(rel)
    assert (0, 0, 0) not in chi(rel)


@given(st.integers(0, (1 << 13) - 1), st.integers(0, (1 << 13) - 1))
@settings(max_examples=60)
def test_mask_roundtrip_and_set_ops(a, b):
    r, s = TemporalRelation.from_mask(3, a), TemporalRelation.from_mask(3, b)
    assert r.mask() == a
    assert (r & s).mask() == a & b
    assert (r | s).mask() == a | b
    assert r.dual().dual() == r


@given(st.integers(0, (1 << 13) - 1))
@settings(max_examples=60)
def test_all_permutations_means_kernel_closed(m):
    rel = TemporalRelation.from_mask(3, m)
    kernels = {kernel(o) for o in rel.orbits}
    closed = all(o in rel for o in enumerate_weak_orders(3) if kernel(o) in kernels)
    assert preserved_by_all_permutations(rel) == closed


def test_permutation_examples():
    assert preserved_by_all_permutations(builtin("!="))
    assert not preserved_by_all_permutations(builtin("<"))
    assert not preserved_by_all_permutations(builtin("Rmix"))


def test_constant_polymorphism():
    le = TemporalStructure("le", {"<=": builtin("<=")})
    lt = TemporalStructure("lt", {"<": builtin("<")})
    rmix = TemporalStructure("rmix", {"R": builtin("Rmix")})
    assert has_constant_polymorphism(le)
    assert not has_constant_polymorphism(lt)
    assert has_constant_polymorphism(rmix)


def test_rmix_is_conjunction_of_rmi():
    rmi = builtin("Rmi")
    assert (rmi & rmi.permute((1, 0, 2))).orbits == builtin("Rmix").orbits


def test_permute_and_dual_agree_with_concrete():
    n, pred = DEFINING_PREDICATES["Rmin_le"]
    rel = builtin("Rmin_le")
    assert orbit_patterns(rel.permute((2, 0, 1))) == concrete_relation(n, lambda u: pred((u[1], u[2], u[0])))
    assert orbit_patterns(rel.dual()) == concrete_relation(n, lambda t: pred(tuple(-v for v in t)))


def test_structure_helpers():
    s = TemporalStructure("A", {"<": builtin("<")})
    t = s.with_relation("R", builtin("Rmix"))
    assert "R" in t and "R" not in s
    assert t.find(builtin("Rmix")) == "R"
    assert set(t.renamed("1.").relations) == {"1.<", "1.R"}
    assert t.dual()["<"].orbits == builtin(">").orbits
