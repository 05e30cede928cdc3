"""Integer helpers: prime sieves, exact roots, exact box edges."""

from __future__ import annotations

from fractions import Fraction

import numpy as np


def primes_up_to(n: int) -> np.ndarray:
    if n < 2:
        return np.zeros(0, dtype=np.int64)
    sieve = np.ones(n + 1, dtype=bool)
    sieve[:2] = False
    for p in range(2, int(n ** 0.5) + 1):
        if sieve[p]:
            sieve[p * p::p] = False
    return np.flatnonzero(sieve).astype(np.int64)


def smallest_prime_factors(n: int) -> np.ndarray:
    spf = np.zeros(n + 1, dtype=np.int64)
    if n >= 1:
        spf[1] = 1
    for p in range(2, int(n ** 0.5) + 1):
        if spf[p] == 0:
            view = spf[p * p::p]
            view[view == 0] = p
    rest = np.flatnonzero(spf == 0)
    spf[rest] = rest
    spf[0] = 0
    return spf


def factor_with(spf: np.ndarray, y: int) -> list[tuple[int, int]]:
    out = []
    while y > 1:
        p = int(spf[y])
        e = 0
        while y % p == 0:
            y //= p
            e += 1
        out.append((p, e))
    return out


def iroot(n: int, q: int) -> int:
    """floor(n ** (1/q)) for integers n >= 0, q >= 1, exactly."""
    if n < 0 or q < 1:
        raise ValueError("iroot needs n >= 0 and q >= 1")
    if n < 2 or q == 1:
        return n
    x = 1 << ((n.bit_length() + q - 1) // q)
    while True:
        y = ((q - 1) * x + n // x ** (q - 1)) // q
        if y >= x:
            break
        x = y
    while x ** q > n:
        x -= 1
    while (x + 1) ** q <= n:
        x += 1
    return x


def box_edge(H: int, b) -> int:
    """floor(H ** b) for integer H >= 1 and rational b > 0, without floats."""
    b = Fraction(b)
    if H < 1:
        raise ValueError("height must be >= 1")
    return iroot(H ** b.numerator, b.denominator)


def mobius_squarefree(n: int) -> np.ndarray:
    """Boolean array sq[s] = s is squarefree, for 0 <= s <= n."""
    sq = np.ones(n + 1, dtype=bool)
    sq[0] = False
    d = 2
    while d * d <= n:
        sq[d * d::d * d] = False
        d += 1
    return sq
