# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled versions of the hot counting loops; same signatures as _pykernels."""

import numpy as np
cimport numpy as cnp
from libc.stdint cimport int64_t, uint8_t

cnp.import_array()


def dense_extend(prev, long g, long long lo, long long hi, long long d_lo, long long d_hi, mask=None):
    cdef cnp.int64_t[::1] src = np.ascontiguousarray(prev, dtype=np.int64)
    out_arr = np.zeros(hi - lo, dtype=np.int64)
    cdef cnp.int64_t[::1] out = out_arr
    cdef cnp.uint8_t[::1] msk
    cdef bint use_mask = mask is not None
    if use_mask:
        msk = np.ascontiguousarray(mask, dtype=np.uint8)
    cdef long long top = src.shape[0] - 1
    cdef long long d, w, e, e_lo, e_hi, v, t
    if d_lo < 1:
        d_lo = 1
    with nogil:
        d = d_lo
        while d < d_hi:
            if use_mask and msk[d] == 0:
                d += 1
                continue
            w = 1
            for t in range(g):
                w = w * d
                if w > hi:
                    break
            if w > hi - 1:
                break
            e_lo = (lo + w - 1) // w
            if e_lo < 1:
                e_lo = 1
            e_hi = (hi - 1) // w
            if e_hi > top:
                e_hi = top
            v = e_lo * w - lo
            e = e_lo
            while e <= e_hi:
                out[v] += src[e]
                v += w
                e += 1
            d += 1
    return out_arr


def tau_power_pairs(long long y_lo, long long y_hi, long ell, long long X1, long long X2, spf):
    cdef cnp.int64_t[::1] sp = np.ascontiguousarray(spf, dtype=np.int64)
    n_out = y_hi - y_lo if y_hi > y_lo else 0
    out_arr = np.zeros(n_out, dtype=np.int64)
    cdef cnp.int64_t[::1] out = out_arr
    cdef long long primes[64]
    cdef long long exps[64]
    cdef long long divs[65536]
    cdef long long y, t, p, n, lo, c, nd, i, j, k, cur, pk, nf, base
    cdef long long e
    cdef bint overflow
    if y_lo < 1:
        raise ValueError("y_lo must be >= 1")
    with nogil:
        for y in range(y_lo, y_hi):
            n = 1
            for i in range(ell):
                n = n * y
            lo = (n + X2 - 1) // X2
            if lo > X1:
                continue
            t = y
            nf = 0
            while t > 1:
                p = sp[t]
                e = 0
                while t % p == 0:
                    t = t // p
                    e += 1
                primes[nf] = p
                exps[nf] = e * ell
                nf += 1
            # enumerate divisors <= X1
            nd = 1
            divs[0] = 1
            overflow = False
            for i in range(nf):
                base = nd
                for j in range(base):
                    cur = divs[j]
                    for k in range(exps[i]):
                        cur = cur * primes[i]
                        if cur > X1:
                            break
                        if nd >= 65536:
                            overflow = True
                            break
                        divs[nd] = cur
                        nd += 1
            if overflow:
                # caller recomputes flagged entries
                out[y - y_lo] = -1
                continue
            c = 0
            for i in range(nd):
                if divs[i] >= lo:
                    c += 1
            out[y - y_lo] = c
    return out_arr
