"""Kernel dispatch: the compiled extension when available, numpy otherwise.

Set DIVLAB_PURE_PYTHON=1 to force the fallback.  Both backends produce
identical integers; threads only partition work and the partial results are
summed in a fixed order.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from . import _pykernels
from .arith import iroot

if os.environ.get("DIVLAB_PURE_PYTHON") == "1":
    _impl = _pykernels
    BACKEND = "python"
else:
    try:
        from . import _ckernels as _impl
        BACKEND = "cython"
    except ImportError:  # extension not built
        _impl = _pykernels
        BACKEND = "python"


def backend_module(name: str | None = None):
    if name is None:
        return _impl
    if name == "python":
        return _pykernels
    if name == "cython":
        from . import _ckernels
        return _ckernels
    raise ValueError(f"unknown backend {name!r}")


def _split_by_work(d_lo: int, d_hi: int, g: int, parts: int) -> list[tuple[int, int]]:
    """Split [d_lo, d_hi) into chunks of roughly equal sum of d^-g."""
    d_hi = max(d_hi, d_lo)
    if parts <= 1 or d_hi - d_lo < 2 * parts:
        return [(d_lo, d_hi)]
    d = np.arange(d_lo, d_hi, dtype=np.float64)
    w = np.cumsum(d ** (-float(g)))
    edges = [d_lo]
    for i in range(1, parts):
        idx = int(np.searchsorted(w, w[-1] * i / parts))
        edges.append(max(edges[-1], d_lo + idx))
    edges.append(d_hi)
    return [(a, b) for a, b in zip(edges, edges[1:]) if b > a]


def dense_extend(prev, g, lo, hi, d_lo, d_hi, mask=None, threads: int = 1, backend: str | None = None):
    impl = backend_module(backend)
    d_lo = max(1, d_lo)
    if hi >= 2:
        d_hi = min(d_hi, iroot(hi - 1, g) + 1)
    chunks = _split_by_work(d_lo, d_hi, g, threads)
    if len(chunks) == 1:
        return impl.dense_extend(prev, g, lo, hi, d_lo, d_hi, mask)
    prev = np.ascontiguousarray(prev, dtype=np.int64)
    if mask is not None:
        mask = np.ascontiguousarray(mask, dtype=np.uint8)
    with ThreadPoolExecutor(max_workers=threads) as pool:
        partials = list(pool.map(lambda c: impl.dense_extend(prev, g, lo, hi, c[0], c[1], mask), chunks))
    out = partials[0]
    for part in partials[1:]:
        out += part
    return out


def tau_power_pairs(y_lo, y_hi, ell, X1, X2, spf, threads: int = 1, backend: str | None = None):
    impl = backend_module(backend)
    if y_hi <= y_lo:
        return np.zeros(0, dtype=np.int64)
    if (y_hi - 1) ** ell >= 2 ** 62 or max(X1, X2) >= 2 ** 62:
        impl = _pykernels
    n = y_hi - y_lo
    if threads <= 1 or n < 2 * threads:
        out = impl.tau_power_pairs(y_lo, y_hi, ell, X1, X2, spf)
    else:
        step = -(-n // threads)
        bounds = [(y_lo + i * step, min(y_hi, y_lo + (i + 1) * step)) for i in range(threads)]
        with ThreadPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(lambda b: impl.tau_power_pairs(b[0], b[1], ell, X1, X2, spf), bounds))
        out = np.concatenate(parts)
    bad = np.flatnonzero(out < 0)
    for i in bad.tolist():
        y = y_lo + i
        out[i] = _pykernels.tau_power_pairs(y, y + 1, ell, X1, X2, spf)[0]
    return out
