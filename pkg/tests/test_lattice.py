import math
from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from divlab.lattice import (InadmissibleWeight, SearchTooLarge, canonical_a, check_admissible,
                            check_generation, enumerate_slice, find_a, kappa, minimal_generators,
                            mu, naive_slice, nu_count, nu_series, rank_of)
from divlab.model import BoxExponents, ExponentSystem, RestrictionSpec, WeightTuple, theorem_spec

F = Fraction
S = ExponentSystem.from_parts


def W(system, a):
    return WeightTuple(system.shape, tuple(F(x) for x in a))


def box(system, b):
    return BoxExponents(system.shape, tuple(F(x) for x in b))


def test_slice_examples():
    s = S([(1, 1), (1, 1)])
    sl = enumerate_slice(s, W(s, [F(1, 2)] * 4))
    assert sl.vectors == [(1, 0, 1, 0), (1, 0, 0, 1), (0, 1, 1, 0), (0, 1, 0, 1)]
    s = S([(1,), (1,)])
    assert enumerate_slice(s, W(s, [F(1, 2)] * 2)).vectors == [(1, 1)]
    s = S([(1, 1), (2,)])
    assert enumerate_slice(s, W(s, [F(1, 4), F(1, 4), F(1, 2)])).vectors == [(2, 0, 1), (1, 1, 1), (0, 2, 1)]


def test_rank_examples():
    assert rank_of([]) == 0
    assert rank_of([(1, 0, 1, 0), (1, 0, 0, 1), (0, 1, 1, 0), (0, 1, 0, 1)]) == 3
    assert rank_of([(2, 0, 1), (1, 1, 1), (0, 2, 1)]) == 2


@pytest.mark.parametrize("mkl,expected", [((2, 2, 1), 1), ((3, 2, 1), 4), ((2, 1, 2), 1),
                                          ((2, 3, 1), 4), ((3, 1, 3), 7)])
def test_kappa_theorem_systems(mkl, expected):
    m, k, ell = mkl
    spec = theorem_spec(m, k, ell)
    a = canonical_a(m, k, ell)
    assert kappa(spec.system, a) == expected
    sl = enumerate_slice(spec.system, a)
    assert len(sl) == math.comb(ell + m - 1, m - 1) ** k
    assert rank_of(sl.vectors) == (m - 1) * k + 1


def test_canonical_a():
    assert canonical_a(2, 2, 1).a == (F(1, 3),) * 5
    assert canonical_a(2, 1, 2).a == (F(1, 4), F(1, 4), F(1, 2))
    assert canonical_a(1, 1, 1).a == (F(1, 2), F(1, 2))


def test_minimal_generators_examples():
    s = S([(1, 1), (1, 1)])
    assert sorted(minimal_generators(s, 2).vectors) == sorted(
        [(1, 0, 1, 0), (1, 0, 0, 1), (0, 1, 1, 0), (0, 1, 0, 1)])
    assert minimal_generators(S([(1,), (1,)]), 1).vectors == [(1, 1)]
    assert minimal_generators(S([(2,), (3,)]), 6).vectors == [(3, 2)]


def test_find_a_examples():
    s = S([(1, 1), (1, 1)])
    a = find_a(s, box(s, [1] * 4))
    assert a.a == (F(1, 2),) * 4 and a.dot((1,) * 4) == 2
    s = S([(1, 1), (2,)])
    assert find_a(s, box(s, [1, 1, 1])).a == (F(1, 4), F(1, 4), F(1, 2))
    s = S([(1,), (1,)])
    assert find_a(s, box(s, [1, 1])).a == (F(1, 2), F(1, 2))


def test_find_a_satisfies_generators():
    for spec in (theorem_spec(2, 2, 1), theorem_spec(2, 1, 2)):
        a = find_a(spec.system, spec.box)
        for g in minimal_generators(spec.system).vectors:
            assert a.dot(g) >= 1


def test_check_admissible_rejects():
    s = S([(1, 1), (1, 1)])
    with pytest.raises(InadmissibleWeight):
        check_admissible(s, W(s, [F(1, 4)] * 4))


def test_generation_examples():
    s = S([(1, 1), (1, 1)])
    assert check_generation(s, W(s, [F(1, 2)] * 4), 4).passed
    bad = check_generation(s, W(s, [1, F(1, 2), F(1, 2), F(1, 2)]), 2)
    assert not bad.passed and bad.counterexample == (1, 0, 1, 0)
    s = S([(1,), (1,)])
    assert check_generation(s, W(s, [F(1, 2)] * 2), 3).passed


def test_nu_counts():
    spec = theorem_spec(2, 2, 1)
    a = canonical_a(2, 2, 1)
    assert nu_count(spec.system, RestrictionSpec(), a, 2, 5) == 9
    assert nu_count(spec.system, RestrictionSpec(), a, 0, 7) == 1
    assert nu_count(spec.system, RestrictionSpec.coprime_to(2), a, 1, 2) == 0
    assert nu_series(spec.system, a, 5) == [(n + 1) ** 2 for n in range(6)]


def test_mu_examples():
    s = S([(1, 1), (1, 1)])
    c = mu(s, box(s, [1] * 4))
    assert c.mu == 2 and set(c.eta_tuples) == {(1, 0, 1, 0), (0, 1, 0, 1)}
    assert c.verify(s, box(s, [1] * 4))
    s = S([(1,), (1,)])
    assert mu(s, box(s, [1, 1])).mu == 1
    s = S([(1, 2), (1, 2)])
    c = mu(s, box(s, [1] * 4))
    assert c.mu == 2 and sorted(c.part_values) == [1, 2]


def test_mu_cap():
    s = S([(1,) * 9, (1,) * 9])
    with pytest.raises(SearchTooLarge):
        mu(s, box(s, [1] * 18))


small_systems = st.lists(st.lists(st.integers(1, 3), min_size=1, max_size=2), min_size=2, max_size=3)


@st.composite
def system_and_weight(draw):
    parts = draw(small_systems)
    s = S(parts)
    a = [F(1, draw(st.integers(1, 4))) * draw(st.sampled_from([1, F(1, 2), F(2, 3)])) for _ in range(s.shape.size)]
    return s, W(s, a)


@given(system_and_weight(), st.sampled_from([1, 2]))
def test_enumerate_slice_matches_naive(data, level):
    s, a = data
    fast = enumerate_slice(s, a, level).vectors
    assert fast == naive_slice(s, a, level)
    assert kappa(s, a, check=False) >= 0
    assert (kappa(s, a, check=False) == 0) == (rank_of(fast) == len(fast))


@given(small_systems, st.lists(st.sampled_from([F(1), F(1, 2), F(2)]), min_size=6, max_size=6))
def test_mu_bounds(parts, bs):
    s = S(parts)
    # rescale b so that the spec is balanced
    raw = bs[:s.shape.size]
    sums = [sum(g * x for g, x in zip(gp, bp)) for gp, bp in zip(s.parts(), s.shape.split(raw))]
    target = sums[0]
    b = []
    for gp, bp, sm in zip(s.parts(), s.shape.split(raw), sums):
        b.extend(x * target / sm for x in bp)
    bx = box(s, b)
    c = mu(s, bx)
    assert c.verify(s, bx)
    for norm in bx.part_norms():
        assert 1 <= c.mu <= bx.alpha * norm
