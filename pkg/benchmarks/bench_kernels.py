"""Time the compiled kernels against the numpy fallback.

    python3 benchmarks/bench_kernels.py [--repeat N]

Also checks that both backends return identical arrays.
"""

import argparse
import time

import numpy as np

from divlab import kernels
from divlab.arith import smallest_prime_factors


def best_of(fn, repeat):
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t0)
    return best, out


def cases():
    N = 1 << 20
    prev = np.ones(N + 1, dtype=np.int64)
    prev[0] = 0
    yield "dense_extend g=1 (divisor sums to 2^20)", \
        lambda b: kernels.dense_extend(prev, 1, 1, N + 1, 1, N + 1, backend=b)
    yield "dense_extend g=2 (square multipliers)", \
        lambda b: kernels.dense_extend(prev, 2, 1, N + 1, 1, N + 1, backend=b)
    Y = 20000
    spf = smallest_prime_factors(Y)
    yield "tau_power_pairs ell=2, y < 2*10^4", \
        lambda b: kernels.tau_power_pairs(1, Y, 2, Y, Y, spf, backend=b)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()
    try:
        kernels.backend_module("cython")
    except ImportError:
        print("compiled extension not built; only the python backend is available")
        return
    print(f"{'kernel':45s} {'python s':>10s} {'cython s':>10s} {'speedup':>8s}")
    for name, run in cases():
        tp, outp = best_of(lambda: run("python"), args.repeat)
        tc, outc = best_of(lambda: run("cython"), args.repeat)
        if not np.array_equal(outp, outc):
            raise SystemExit(f"backends disagree on {name}")
        print(f"{name:45s} {tp:10.4f} {tc:10.4f} {tp / tc:8.1f}x")


if __name__ == "__main__":
    main()
