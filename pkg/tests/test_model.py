import json
from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from divlab.model import (AllowedSet, BoxExponents, ExponentSystem, ExponentVector, ParseError,
                          ProblemSpec, Rejected, RestrictionSpec, Shape, ValidationError,
                          WeightTuple, canonical_order, energy_spec, parse_problem,
                          serialize_problem, theorem_spec, validate_restriction)


def test_shape_indices_row_major():
    s = Shape((2, 1, 3))
    assert s.k == 3 and s.size == 6
    assert s.indices() == [(1, 1), (1, 2), (2, 1), (3, 1), (3, 2), (3, 3)]
    assert [s.flat_index(i, j) for i, j in s.indices()] == list(range(6))
    with pytest.raises(ValidationError):
        s.flat_index(2, 2)


def test_shape_rejects_bad_parts():
    with pytest.raises(ValidationError):
        Shape(())
    with pytest.raises(ValidationError):
        Shape((2, 0))


def test_exponent_system_membership():
    sys_ = ExponentSystem.from_parts([(1, 1), (2,)])
    assert sys_.contains((1, 1, 1))
    assert not sys_.contains((1, 0, 1))
    assert ExponentVector.of(sys_, (2, 0, 1)).value == 2
    with pytest.raises(ValidationError):
        ExponentVector.of(sys_, (1, 0, 1))
    with pytest.raises(ValidationError):
        ExponentSystem.from_parts([(1, 0)])


def test_box_alpha_and_weights():
    box = BoxExponents(Shape((2,)), (Fraction(1, 2), Fraction(2, 3)))
    assert box.alpha == 6
    with pytest.raises(ValidationError):
        BoxExponents(Shape((1,)), (0,))
    with pytest.raises(ValidationError):
        WeightTuple(Shape((2,)), (1, 0))
    assert str(WeightTuple(Shape((2, 2)), (Fraction(1, 2),) * 4)) == "(1/2,1/2) + (1/2,1/2)"


def test_canonical_order_is_descending_lex():
    assert canonical_order([(0, 1), (1, 0), (1, 1)]) == [(1, 1), (1, 0), (0, 1)]


def test_theorem_spec_shape():
    spec = theorem_spec(2, 2, 1)
    assert spec.system.parts() == [(1, 1), (1, 1), (1,)]
    assert spec.box.b == (1, 1, 1, 1, 2)
    assert spec.balanced and spec.N == 2
    spec = theorem_spec(3, 1, 3)
    assert spec.box.b[-1] == 1


def test_balanced_flag():
    spec = energy_spec([(1, 1), (1, 1)], [(1, 1), ("1/2", "1/2")])
    assert not spec.balanced and spec.N is None
    assert spec.part_inner_products() == [2, 1]


def test_parse_round_trip():
    doc = {"parts": [{"gamma": [1, 1], "b": ["1", "1"]}, {"gamma": [1, 1], "b": ["1", "1"]}],
           "restriction": [{"p": 2, "rule": "coprime"}], "balanced": True}
    spec = parse_problem(doc)
    again = parse_problem(serialize_problem(spec))
    assert again == spec
    assert again.fingerprint() == spec.fingerprint()


def test_parse_locations():
    with pytest.raises(ParseError) as exc:
        parse_problem({"parts": [{"gamma": [1, "x"]}]})
    assert exc.value.location == "$.parts[0].gamma[1]"
    with pytest.raises(ParseError) as exc:
        parse_problem({"parts": [{"gamma": [1], "b": ["1/0"]}]})
    assert "$.parts[0].b[0]" in str(exc.value)
    with pytest.raises(ParseError):
        parse_problem("{not json")
    with pytest.raises(ValidationError):
        parse_problem({"parts": [{"gamma": [1], "b": ["1"]}, {"gamma": [2], "b": ["1"]}], "balanced": True})


def test_parse_rejects_infinite_prime_rules():
    with pytest.raises(Rejected):
        parse_problem({"parts": [{"gamma": [1]}, {"gamma": [1]}], "restriction": [{"p": "*", "rule": "coprime"}]})


def test_coprime_coords_rule():
    spec = parse_problem({"parts": [{"gamma": [1, 1]}, {"gamma": [1, 1]}],
                          "restriction": [{"p": 3, "rule": "coprime", "coords": [[2, 1]]}]})
    rule = spec.restriction.rule(3)
    assert rule.kind == "zero" and rule.coords == (2,)
    assert spec.restriction.psi((3, 3, 1, 9))
    assert not spec.restriction.psi((1, 1, 3, 1))


def test_exclude_rule_closure():
    ok = RestrictionSpec(((2, AllowedSet("exclude", vectors=frozenset({(1, 0), (0, 1)}))),))
    assert validate_restriction(ok, 2)
    bad = RestrictionSpec(((2, AllowedSet("exclude", vectors=frozenset({(1, 1)}))),))
    report = validate_restriction(bad, 2)
    assert not report and "closure" in report.reasons[0]
    with pytest.raises(Rejected):
        ProblemSpec(ExponentSystem.from_parts([(1,), (1,)]), BoxExponents(Shape((1, 1)), (1, 1)), bad)
    no_zero = RestrictionSpec(((2, AllowedSet("exclude", vectors=frozenset({(0, 0)}))),))
    assert not validate_restriction(no_zero, 2)


def test_restriction_spec_coprime_to():
    r = RestrictionSpec.coprime_to(12)
    assert r.primes == [2, 3]
    assert r.psi((5, 7)) and not r.psi((5, 6))


parts_strategy = st.lists(
    st.tuples(st.lists(st.integers(1, 4), min_size=1, max_size=3),
              st.lists(st.fractions(min_value=Fraction(1, 4), max_value=3, max_denominator=6),
                       min_size=3, max_size=3)),
    min_size=1, max_size=3)


@given(parts_strategy, st.sampled_from([None, 2, 6]))
def test_serialize_parse_property(parts, q):
    gam = [g for g, _ in parts]
    bs = [[x for x in b[:len(g)] if x > 0] for g, b in parts]
    restriction = RestrictionSpec.coprime_to(q) if q else RestrictionSpec()
    spec = energy_spec(gam, bs, restriction)
    text = serialize_problem(spec)
    assert parse_problem(json.loads(text)) == spec
