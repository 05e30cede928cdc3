"""Certified enclosures of the constants that enter main terms.

Classical constants use Euler-Maclaurin summation with the standard
remainder bound 2 zeta(2q) / (2 pi)^(2q) * int |f^(2q)|.  Euler products over
primes are evaluated exactly up to a cutoff with rigorous tails in n and p.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import mpmath

from .arith import primes_up_to
from .intervals import DEFAULT_PRECISION, NumericInterval
from .lattice import enumerate_slice, nu_series
from .model import DivlabError, ExponentSystem, RestrictionSpec, WeightTuple

DEFAULT_PRIME_CUTOFF = 10 ** 6
DEFAULT_NMAX = 64
# pi(x) < 1.25506 x / log x for x > 1 (Rosser and Schoenfeld, 1962)
_PI_BOUND = 1.25506


class DivergentTail(DivlabError):
    pass


# ------------------------------------------------------------------ classical

def _em_terms(prec: int):
    """Working precision and an (N, q) pair that beats 2^-prec comfortably."""
    wp = prec + 40
    N = max(16, prec // 2)
    return wp, N


def _two_zeta_over(q: int, N_pow) -> mpmath.mpf:
    # 2 zeta(2q) / (2 pi)^(2q) with zeta(2q) <= zeta(2) < 1.645 and pi > 3.14159
    return mpmath.mpf(2 * 1.645) / mpmath.mpf(2 * 3.14159) ** (2 * q)


def _bernoulli(n: int) -> Fraction:
    p, q = mpmath.bernfrac(n)
    return Fraction(int(p), int(q))


def _enclose(value, radius, prec) -> NumericInterval:
    return NumericInterval.around(value, radius, prec)


@lru_cache(maxsize=None)
def zeta2(precision_bits: int = DEFAULT_PRECISION) -> NumericInterval:
    """zeta(2) = sum 1/n^2."""
    wp, N = _em_terms(precision_bits)
    with mpmath.workprec(wp):
        s = mpmath.fsum(mpmath.mpf(1) / (n * n) for n in range(1, N))
        s += mpmath.mpf(1) / N + mpmath.mpf(1) / (2 * N * N)
        q = 1
        while True:
            # f^(2q-1)(N) = -(2q)! N^(-2q-1)
            term = _bernoulli(2 * q) / math.factorial(2 * q) * math.factorial(2 * q)
            s += mpmath.mpf(term.numerator) / term.denominator / mpmath.mpf(N) ** (2 * q + 1)
            rem = _two_zeta_over(q, N) * math.factorial(2 * q) / mpmath.mpf(N) ** (2 * q + 1)
            if rem < mpmath.ldexp(1, -precision_bits - 12) or q > 4 * N:
                break
            q += 1
        slack = mpmath.ldexp(1, -wp + 16)
    return _enclose(s, rem + slack, precision_bits)


def _log_over_square_derivs(order: int):
    """(A_n, B_n) with (log x / x^2)^(n) = x^(-2-n) (A_n log x + B_n)."""
    A, B = [1], [0]
    for n in range(order):
        A.append(-(2 + n) * A[-1])
        B.append(-(2 + n) * B[-1] + A[-2])
    return A, B


@lru_cache(maxsize=None)
def zeta_prime2(precision_bits: int = DEFAULT_PRECISION) -> NumericInterval:
    """zeta'(2) = -sum log(n) / n^2."""
    wp, N = _em_terms(precision_bits)
    qmax = 4 * N
    A, B = _log_over_square_derivs(2 * qmax + 1)
    with mpmath.workprec(wp):
        logN = mpmath.log(N)
        s = mpmath.fsum(mpmath.log(n) / (n * n) for n in range(2, N))
        s += (logN + 1) / N + logN / (2 * N * N)
        q = 1
        while True:
            k = 2 * q - 1
            deriv = (A[k] * logN + B[k]) / mpmath.mpf(N) ** (2 + k)
            b = _bernoulli(2 * q)
            s -= mpmath.mpf(b.numerator) / b.denominator / math.factorial(2 * q) * deriv
            c = 2 + 2 * q
            tail_int = (abs(A[2 * q]) * (logN / (c - 1) + mpmath.mpf(1) / (c - 1) ** 2)
                        + abs(B[2 * q]) / (c - 1)) * mpmath.mpf(N) ** (1 - c)
            rem = _two_zeta_over(q, N) * tail_int
            if rem < mpmath.ldexp(1, -precision_bits - 12) or q >= qmax:
                break
            q += 1
        slack = mpmath.ldexp(1, -wp + 20)
    return -_enclose(s, rem + slack, precision_bits)


@lru_cache(maxsize=None)
def euler_gamma(precision_bits: int = DEFAULT_PRECISION) -> NumericInterval:
    """gamma = H_N - log N - 1/(2N) + sum_k B_2k / (2k N^2k) + remainder."""
    wp, N = _em_terms(precision_bits)
    with mpmath.workprec(wp):
        s = mpmath.fsum(mpmath.mpf(1) / n for n in range(1, N + 1)) - mpmath.log(N) - mpmath.mpf(1) / (2 * N)
        q = 1
        while True:
            b = _bernoulli(2 * q)
            s += mpmath.mpf(b.numerator) / b.denominator / (2 * q) / mpmath.mpf(N) ** (2 * q)
            rem = _two_zeta_over(q, N) * math.factorial(2 * q - 1) / mpmath.mpf(N) ** (2 * q)
            if rem < mpmath.ldexp(1, -precision_bits - 12) or q > 4 * N:
                break
            q += 1
        slack = mpmath.ldexp(1, -wp + 16)
    return _enclose(s, rem + slack, precision_bits)


def constant_A(precision_bits: int = DEFAULT_PRECISION) -> NumericInterval:
    """A = (4 gamma - 2 zeta'(2)/zeta(2) - 1 - 2 zeta(2)) / zeta(2)."""
    if precision_bits < 53:
        raise ValueError("precision_bits must be at least 53")
    z, zp, g = zeta2(precision_bits), zeta_prime2(precision_bits), euler_gamma(precision_bits)
    return (4 * g - 2 * zp / z - 1 - 2 * z) / z


def inverse_zeta2(precision_bits: int = DEFAULT_PRECISION) -> NumericInterval:
    return 1 / zeta2(precision_bits)


# ------------------------------------------------------------------ Euler products

def _h_coefficients(nu: list[int], d: int) -> list[int]:
    """Coefficients of (1 - x)^d * sum nu(n) x^n, exact through len(nu) - 1."""
    n = len(nu)
    out = [0] * n
    binoms = [(-1) ** j * math.comb(d, j) for j in range(d + 1)]
    for i in range(n):
        out[i] = sum(binoms[j] * nu[i - j] for j in range(min(d, i) + 1))
    return out


@dataclass(frozen=True)
class _NuBound:
    """nu(n) <= binom(floor(n / amin) + M, M), valid for every restriction."""
    amin: Fraction
    M: int
    d: int

    def B(self, n: int) -> int:
        return math.comb(int(n / self.amin) + self.M, self.M)

    def e_bound(self, n: int) -> int:
        # |e_n| <= sum_j binom(d, j) nu(n - j) <= 2^d B(n)
        return (1 << self.d) * self.B(n)

    def tail(self, N: int, x: Fraction) -> Fraction | None:
        """Upper bound for sum_{n > N} |e_n| x^n, or None when it fails to converge."""
        c = math.ceil(1 / self.amin)
        u = int((N + 1) / self.amin)
        rho = x * Fraction(u + 1 + c, u + 1) ** self.M
        if rho >= 1:
            return None
        return self.e_bound(N + 1) * x ** (N + 1) / (1 - rho)


def _series_precision_target(prec: int) -> Fraction:
    return Fraction(1, 1 << (prec + 8))


def _choose_truncation(bound: _NuBound, p: int, nmax: int, target: Fraction, limit: int = 4096) -> int:
    N = nmax
    x = Fraction(1, p)
    while True:
        t = bound.tail(N, x)
        if t is not None and t <= target:
            return N
        if N >= limit:
            raise DivergentTail(f"n-tail at p={p} not certified below {float(target):.3g} by n={N}")
        N = N * 2 if t is None else N + max(8, N // 4)


class _LocalSeries:
    """Coefficient cache of h(x) = (1-x)^d F(x) for one allowed-set rule."""

    def __init__(self, system, a, rule, d):
        self.system, self.a, self.rule, self.d = system, a, rule, d
        self.coeffs: list[int] = []

    def get(self, N: int) -> list[int]:
        if len(self.coeffs) <= N:
            nu = nu_series(self.system, self.a, max(N, 2 * len(self.coeffs)), self.rule)
            self.coeffs = _h_coefficients(nu, self.d)
        return self.coeffs[:N + 1]


def _local_factor(coeffs: list[int], tail: Fraction, p: int, prec: int) -> NumericInterval:
    """Interval for sum_n e_n p^-n, given an upper bound on the truncated tail."""
    N = len(coeffs) - 1
    num = 0
    for e in coeffs:
        num = num * p + e
    den = p ** N
    tail_num = math.ceil(tail * den)
    lo = mpmath.fdiv(num - tail_num, den, prec=prec, rounding="f")
    hi = mpmath.fdiv(num + tail_num, den, prec=prec, rounding="c")
    return NumericInterval(lo, hi, prec)


@dataclass(frozen=True)
class EulerProductReport:
    interval: NumericInterval
    prime_cutoff: int
    nmax: int
    slice_size: int
    explicit_primes: int
    prime_tail: float
    h_degree_hint: int | None


def euler_product_report(system: ExponentSystem, restriction: RestrictionSpec, a: WeightTuple,
                         prime_cutoff: int = DEFAULT_PRIME_CUTOFF, nmax: int = DEFAULT_NMAX,
                         precision_bits: int = DEFAULT_PRECISION) -> EulerProductReport:
    d = len(enumerate_slice(system, a, 1))
    if d == 0:
        raise DivergentTail("empty slice: the Euler product is not defined")
    restricted = restriction.primes
    if restricted and max(restricted) > prime_cutoff:
        raise ValueError(f"prime cutoff {prime_cutoff} is below restricted prime {max(restricted)}")
    prec = precision_bits + 24
    bound = _NuBound(min(a.a), system.shape.size, d)
    target = _series_precision_target(prec)
    generic = _LocalSeries(system, a, None, d)
    special = {p: _LocalSeries(system, a, restriction.rule(p), d) for p in restricted}

    primes = primes_up_to(prime_cutoff)
    product = NumericInterval.point(1, prec)
    small_limit = 100
    for p in primes[primes <= small_limit].tolist():
        N = _choose_truncation(bound, p, nmax, target)
        series = special.get(p, generic)
        coeffs = series.get(N)
        product = product * _local_factor(coeffs, bound.tail(N, Fraction(1, p)), p, prec)
    large = primes[primes > small_limit].tolist()
    if large:
        p0 = large[0]
        N = _choose_truncation(bound, p0, 2, target)
        # for p >= p0: sum_{n>N} |e_n| p^-n <= p^-(N+1) * K with K from p0
        K = bound.tail(N, Fraction(1, p0)) * p0 ** (N + 1)
        coeffs_cache = generic.get(max(N, nmax))[:N + 1]
        lo_acc, hi_acc = product.lo, product.hi
        for p in large:
            coeffs = special[p].get(N) if p in special else coeffs_cache
            num = 0
            for e in coeffs:
                num = num * p + e
            # bounds (num * p -+ K) / p^(N+1)
            den = p ** (N + 1)
            kk = math.ceil(K)
            lo_acc = mpmath.fmul(lo_acc, mpmath.fdiv(num * p - kk, den, prec=prec, rounding="f"),
                                 prec=prec, rounding="f")
            hi_acc = mpmath.fmul(hi_acc, mpmath.fdiv(num * p + kk, den, prec=prec, rounding="c"),
                                 prec=prec, rounding="c")
        product = NumericInterval(lo_acc, hi_acc, prec)

    # primes beyond the cutoff: |log L_p| <= E / p^2 with E from coefficients at x = 1/P
    P = int(prime_cutoff)
    N = max(nmax, 8)
    coeffs = generic.get(N)
    if coeffs[1] != 0:
        raise DivergentTail("first-order coefficient does not vanish; product diverges")
    E = sum(abs(e) * Fraction(1, P) ** (n - 2) for n, e in enumerate(coeffs) if n >= 2)
    t = bound.tail(N, Fraction(1, P))
    if t is None:
        raise DivergentTail("tail over n does not converge at the prime cutoff")
    E += t * P * P
    u = E / (P * P)
    if u >= Fraction(1, 2):
        raise DivergentTail("prime cutoff too small to bound the tail over primes")
    sum_inv_sq = Fraction(2 * _PI_BOUND).limit_denominator(10 ** 9) + Fraction(1, 10 ** 8)
    log_p = (Fraction(math.log(P)).limit_denominator(10 ** 9) - Fraction(1, 10 ** 8))
    prime_tail = E * sum_inv_sq / (P * log_p) / (1 - u)
    tail_iv = NumericInterval.around(0, mpmath.mpf(prime_tail.numerator) / prime_tail.denominator
                                     * (1 + mpmath.mpf(2) ** -40), prec).exp()
    product = product * tail_iv
    result = NumericInterval(mpmath.fadd(product.lo, 0, prec=precision_bits, rounding="f"),
                             mpmath.fadd(product.hi, 0, prec=precision_bits, rounding="c"),
                             precision_bits)
    return EulerProductReport(result, P, nmax, d, len(primes), float(prime_tail), _poly_degree(coeffs))


def euler_product(system: ExponentSystem, restriction: RestrictionSpec, a: WeightTuple,
                  prime_cutoff: int = DEFAULT_PRIME_CUTOFF, nmax: int = DEFAULT_NMAX,
                  precision_bits: int = DEFAULT_PRECISION) -> NumericInterval:
    """Interval containing prod_p (1 - 1/p)^#slice * sum_n nu(n, p) p^-n."""
    return euler_product_report(system, restriction, a, prime_cutoff, nmax, precision_bits).interval


def _poly_degree(coeffs: list[int]) -> int | None:
    """Degree of h if its coefficients vanish over the last half of the computed range."""
    nz = [n for n, e in enumerate(coeffs) if e != 0]
    deg = nz[-1] if nz else 0
    return deg if deg <= len(coeffs) // 2 else None


@dataclass(frozen=True)
class RestrictionRatio:
    exact: Fraction | None
    interval: NumericInterval
    factors: tuple[tuple[int, Fraction | None], ...]

    def __str__(self):
        return str(self.exact) if self.exact is not None else repr(self.interval)


def _h_value(coeffs, p) -> Fraction:
    return sum((Fraction(e, p ** n) for n, e in enumerate(coeffs)), Fraction(0))


def restriction_ratio(system: ExponentSystem, a: WeightTuple, restriction: RestrictionSpec,
                      nmax: int = DEFAULT_NMAX, precision_bits: int = DEFAULT_PRECISION) -> RestrictionRatio:
    """prod over restricted p of (restricted local factor) / (unrestricted local factor).

    A factor is reported exactly when both local power series are polynomials
    times (1-x)^-d, detected by h-coefficients vanishing over the upper half of
    the computed range; otherwise only the certified interval is given.
    """
    d = len(enumerate_slice(system, a, 1))
    bound = _NuBound(min(a.a), system.shape.size, d)
    prec = precision_bits + 24
    target = _series_precision_target(prec)
    generic = _LocalSeries(system, a, None, d)
    exact_total: Fraction | None = Fraction(1)
    interval = NumericInterval.point(1, prec)
    factors = []
    for p in restriction.primes:
        N = _choose_truncation(bound, p, nmax, target)
        restricted = _LocalSeries(system, a, restriction.rule(p), d).get(N)
        base = generic.get(N)
        tail = bound.tail(N, Fraction(1, p))
        ratio_iv = _local_factor(restricted, tail, p, prec) / _local_factor(base, tail, p, prec)
        interval = interval * ratio_iv
        if _poly_degree(restricted) is not None and _poly_degree(base) is not None:
            f = _h_value(restricted, p) / _h_value(base, p)
            factors.append((p, f))
            if exact_total is not None:
                exact_total *= f
        else:
            factors.append((p, None))
            exact_total = None
    out = NumericInterval(mpmath.fadd(interval.lo, 0, prec=precision_bits, rounding="f"),
                          mpmath.fadd(interval.hi, 0, prec=precision_bits, rounding="c"), precision_bits)
    return RestrictionRatio(exact_total, out, tuple(factors))
