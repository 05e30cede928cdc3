"""Pure numpy/Python versions of the hot counting loops."""

from __future__ import annotations

import numpy as np


def dense_extend(prev, g, lo, hi, d_lo, d_hi, mask=None):
    """out[v - lo] = sum over e * d^g = v (lo <= v < hi, d_lo <= d < d_hi) of prev[e].

    ``prev`` is indexed by value (entry 0 ignored); ``mask`` (indexed by d)
    drops excluded multipliers.
    """
    prev = np.asarray(prev, dtype=np.int64)
    out = np.zeros(hi - lo, dtype=np.int64)
    top = len(prev) - 1
    for d in range(max(d_lo, 1), d_hi):
        if mask is not None and not mask[d]:
            continue
        w = d ** g
        if w > hi - 1:
            break
        e_lo = max(1, -(-lo // w))
        e_hi = min(top, (hi - 1) // w)
        if e_lo > e_hi:
            continue
        start = e_lo * w - lo
        stop = e_hi * w - lo + 1
        out[start:stop:w] += prev[e_lo:e_hi + 1]
    return out


def _divisors_from(factors):
    divs = [1]
    for p, e in factors:
        divs = [d * p ** t for d in divs for t in range(e + 1)]
    return divs


def tau_power_pairs(y_lo, y_hi, ell, X1, X2, spf):
    """tau(y^ell; X1, X2) = #{d | y^ell : d <= X1, y^ell / d <= X2} for y_lo <= y < y_hi."""
    if y_lo < 1:
        raise ValueError("y_lo must be >= 1")
    out = np.zeros(max(0, y_hi - y_lo), dtype=np.int64)
    for y in range(y_lo, y_hi):
        n = y ** ell
        lo = -(-n // X2)
        if lo > X1:
            continue
        factors = []
        t = y
        while t > 1:
            p = int(spf[t])
            e = 0
            while t % p == 0:
                t //= p
                e += 1
            factors.append((p, e * ell))
        c = 0
        for d in _divisors_from(factors):
            if lo <= d <= X1:
                c += 1
        out[y - y_lo] = c
    return out
