from fractions import Fraction

import mpmath
import pytest

from divlab.constants import (DivergentTail, constant_A, euler_gamma, euler_product,
                              euler_product_report, inverse_zeta2, restriction_ratio, zeta2,
                              zeta_prime2)
from divlab.lattice import canonical_a, find_a
from divlab.model import ExponentSystem, RestrictionSpec, WeightTuple, theorem_spec


def test_classical_constants_contain_oracles(high_precision):
    assert zeta2(80).contains(mpmath.pi ** 2 / 6)
    assert zeta_prime2(80).contains(mpmath.zeta(2, derivative=1))
    assert euler_gamma(80).contains(mpmath.euler)
    for iv in (zeta2(80), zeta_prime2(80), euler_gamma(80)):
        assert iv.width < mpmath.mpf(10) ** -20


def test_constant_A(high_precision):
    A = constant_A(80)
    z = mpmath.zeta(2)
    oracle = (4 * mpmath.euler - 2 * mpmath.zeta(2, derivative=1) / z - 1 - 2 * z) / z
    assert A.contains(oracle)
    assert A.width <= mpmath.mpf(10) ** -15
    assert abs(A.mid + mpmath.mpf("0.5113174472")) < 1e-9
    assert (8 * A + 16).contains(8 * oracle + 16)
    assert (2 * inverse_zeta2(80)).contains(12 / mpmath.pi ** 2)
    with pytest.raises(ValueError):
        constant_A(40)


def test_higher_precision_is_narrower(high_precision):
    assert zeta_prime2(200).width < zeta_prime2(80).width
    assert zeta_prime2(80).contains(zeta_prime2(200).mid)


@pytest.mark.parametrize("mkl", [(2, 2, 1), (2, 1, 2)])
def test_euler_product_small_cutoff_contains_inverse_zeta2(mkl, high_precision):
    spec = theorem_spec(*mkl)
    iv = euler_product(spec.system, RestrictionSpec(), canonical_a(*mkl), prime_cutoff=10 ** 4)
    assert iv.contains(6 / mpmath.pi ** 2)
    assert iv.width < 1e-4


def test_euler_product_nests_as_cutoff_grows(high_precision):
    spec = theorem_spec(2, 2, 1)
    a = canonical_a(2, 2, 1)
    coarse = euler_product(spec.system, RestrictionSpec(), a, prime_cutoff=10 ** 3)
    fine = euler_product(spec.system, RestrictionSpec(), a, prime_cutoff=10 ** 4)
    assert coarse.lo <= fine.lo and fine.hi <= coarse.hi


def test_single_vector_slice_gives_one():
    s = ExponentSystem.from_parts([(1,), (1,)])
    a = WeightTuple(s.shape, (Fraction(1, 2),) * 2)
    assert euler_product(s, RestrictionSpec(), a, prime_cutoff=1000).contains(1)


def test_restriction_ratio_examples():
    spec = theorem_spec(2, 2, 1)
    a = canonical_a(2, 2, 1)
    assert restriction_ratio(spec.system, a, RestrictionSpec.coprime_to(2)).exact == Fraction(1, 12)
    assert restriction_ratio(spec.system, a, RestrictionSpec.coprime_to(3)).exact == Fraction(2, 9)
    assert restriction_ratio(spec.system, a, RestrictionSpec.coprime_to(1)).exact == 1
    for p in (5, 7):
        assert restriction_ratio(spec.system, a, RestrictionSpec.coprime_to(p)).exact == \
            Fraction((p - 1) ** 3, p * p * (p + 1))


def test_restriction_ratio_times_product_overlaps_restricted(high_precision):
    spec = theorem_spec(2, 2, 1)
    a = canonical_a(2, 2, 1)
    r = restriction_ratio(spec.system, a, RestrictionSpec.coprime_to(6))
    full = euler_product(spec.system, RestrictionSpec(), a, prime_cutoff=10 ** 4)
    restricted = euler_product(spec.system, RestrictionSpec.coprime_to(6), a, prime_cutoff=10 ** 4)
    assert (full * r.interval).overlaps(restricted)
    assert r.exact == Fraction(1, 12) * Fraction(2, 9)


def test_restricted_prime_above_cutoff():
    spec = theorem_spec(2, 2, 1)
    with pytest.raises(ValueError):
        euler_product(spec.system, RestrictionSpec.coprime_to(1009), canonical_a(2, 2, 1), prime_cutoff=1000)


def test_divergent_when_first_coefficient_survives():
    # a weight below the admissible one keeps extra first-order terms: the product diverges
    spec = theorem_spec(2, 2, 1)
    a = WeightTuple(spec.shape, (Fraction(1, 2),) * 4 + (Fraction(1, 4),))
    with pytest.raises(DivergentTail):
        euler_product_report(spec.system, RestrictionSpec(), a, prime_cutoff=1000)
