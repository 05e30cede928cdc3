from fractions import Fraction

import mpmath
from hypothesis import given, strategies as st

from divlab.intervals import NumericInterval

fracs = st.fractions(min_value=-50, max_value=50, max_denominator=1000)


@given(fracs, fracs)
def test_arithmetic_contains_exact(x, y):
    X, Y = NumericInterval.point(x, 60), NumericInterval.point(y, 60)
    assert (X + Y).contains(x + y)
    assert (X - Y).contains(x - y)
    assert (X * Y).contains(x * y)
    assert (-X).contains(-x)
    if y != 0:
        assert (X / Y).contains(x / y)


def test_point_is_tight():
    I = NumericInterval.point(Fraction(1, 3), 80)
    assert I.contains(Fraction(1, 3))
    assert I.width < mpmath.mpf(2) ** -79


def test_exp_and_hull(high_precision):
    I = NumericInterval.point(1, 80).exp()
    assert I.contains(mpmath.e)
    H = NumericInterval.hull(1, 2, Fraction(3, 2))
    assert H.contains(Fraction(3, 2)) and H.lo == 1 and H.hi == 2


def test_document_round_trip():
    I = NumericInterval.around(Fraction(2, 7), Fraction(1, 10 ** 9), 80)
    J = NumericInterval.from_document(I.to_document())
    assert J.contains(Fraction(2, 7))
    assert J.lo <= I.lo and J.hi >= I.hi or (J.lo == I.lo and J.hi == I.hi)


def test_overlap_and_intersect():
    a = NumericInterval.hull(0, 2)
    b = NumericInterval.hull(1, 3)
    assert a.overlaps(b)
    assert a.intersect(b).lo == 1
    assert a.intersect(NumericInterval.hull(5, 6)) is None
