"""Exact counts of solutions in boxes.

Per part, the box is mapped to the histogram v -> #{x_i in box_i : x_i^gamma_i = v};
the energy is sum_v prod_i count_i(v).  Histograms are built densely by
multiplicative extension (one coordinate at a time) when the value range
fits in memory, in segments of the value range when only the last extension
is too large, and by explicit enumeration into a ValueCounter otherwise.
"""

from __future__ import annotations

import itertools
import time
from collections import Counter, defaultdict
from dataclasses import dataclass, field
from math import prod
from typing import Iterable, Iterator, Sequence

import numpy as np

from . import config, kernels
from .arith import box_edge, iroot, mobius_squarefree, smallest_prime_factors
from .model import DivlabError, ProblemSpec, RestrictionSpec, energy_spec

INT64_SAFE = 2 ** 62


class BudgetExceeded(DivlabError):
    def __init__(self, message: str, part: int | None = None):
        super().__init__(message if part is None else f"part {part + 1}: {message}")
        self.part = part


@dataclass(frozen=True)
class CensusResult:
    grid: tuple[tuple[int, int], ...]
    method: str
    fingerprint: str
    seconds: tuple[float, ...] = ()
    methods: tuple[str, ...] = ()

    @property
    def heights(self) -> list[int]:
        return [h for h, _ in self.grid]

    @property
    def counts(self) -> list[int]:
        return [c for _, c in self.grid]

    def __len__(self):
        return len(self.grid)


class ValueCounter:
    """Map from common value to per-part counts."""

    def __init__(self, k: int):
        self.k = k
        self.table: dict[int, list[int]] = {}

    def add(self, part: int, value: int, count: int = 1):
        row = self.table.get(value)
        if row is None:
            row = self.table[value] = [0] * self.k
        row[part] += count

    def add_many(self, part: int, values: Iterable[int], counts: Iterable[int]):
        for v, c in zip(values, counts):
            self.add(part, int(v), int(c))

    def keys(self) -> list[int]:
        return sorted(self.table)

    def count(self, part: int, value: int) -> int:
        row = self.table.get(value)
        return row[part] if row else 0

    def energy(self) -> int:
        return sum(prod(self.table[v]) for v in self.keys())


# ------------------------------------------------------------------ helpers

def box_edges(spec: ProblemSpec, H: int) -> list[int]:
    return [box_edge(H, b) for b in spec.box.b]


def _coordinate_masks(restriction: RestrictionSpec, size: int, edges: Sequence[int]):
    """Per flat coordinate: uint8 mask over d (allowed values), or None if unrestricted."""
    masks: list[np.ndarray | None] = [None] * size
    for p in restriction.primes:
        rule = restriction.rule(p)
        for c in rule.zero_coords(size):
            if masks[c] is None:
                masks[c] = np.ones(edges[c] + 1, dtype=np.uint8)
                masks[c][0] = 0
            masks[c][::p] = 0
    return masks


def _axis_values(edge: int, mask) -> np.ndarray:
    vals = np.arange(1, edge + 1, dtype=np.int64)
    return vals if mask is None else vals[mask[1:].astype(bool)]


def _power_sum_from_hist(hist: np.ndarray, k: int, acc: Counter | None = None) -> Counter:
    acc = acc if acc is not None else Counter()
    if hist.size:
        bc = np.bincount(hist.astype(np.int64))
        for t in np.flatnonzero(bc).tolist():
            if t:
                acc[t] += int(bc[t])
    return acc


def _sum_from_counter(acc: Counter, k: int) -> int:
    return sum(c * t ** k for t, c in acc.items())


def _sum_of_products(hists: Sequence[np.ndarray]) -> int:
    if not hists:
        return 0
    maxes = [int(h.max()) if h.size else 0 for h in hists]
    bound = prod(maxes)
    if bound == 0:
        return 0
    if bound < INT64_SAFE:
        p = hists[0].astype(np.int64).copy()
        for h in hists[1:]:
            p *= h
        chunk = max(1, INT64_SAFE // bound)
        return sum(int(p[i:i + chunk].sum()) for i in range(0, p.size, chunk))
    nz = np.flatnonzero(np.all(np.stack(hists) > 0, axis=0))
    return sum(prod(int(h[i]) for h in hists) for i in nz.tolist())


def _extension_work(length: int, edge: int) -> int:
    # sum_{d <= edge} length / d ~ length * (log edge + 1)
    return int(length * (np.log(max(edge, 1)) + 1)) + edge


class _PartPlan:
    """Dense extension plan for one part: prefix histogram plus last coordinate."""

    def __init__(self, gammas, edges, masks, vmax, threads):
        self.gammas, self.edges, self.masks = list(gammas), list(edges), list(masks)
        self.vmax = vmax
        self.threads = threads
        reach = 1
        for g, e in zip(self.gammas[:-1], self.edges[:-1]):
            reach = min(vmax, reach * e ** g)
        self.prefix_len = reach + 1
        self.prefix = None

    def work(self) -> int:
        total, reach = 0, 1
        for g, e in zip(self.gammas, self.edges):
            reach = min(self.vmax, reach * e ** g)
            total += _extension_work(reach + 1, e)
        return total

    def build_prefix(self):
        prev = np.zeros(2, dtype=np.int64)
        prev[1] = 1
        reach = 1
        for g, e, m in zip(self.gammas[:-1], self.edges[:-1], self.masks[:-1]):
            reach = min(self.vmax, reach * e ** g)
            prev = kernels.dense_extend(prev, g, 0, reach + 1, 1, e + 1, m, self.threads)
        self.prefix = prev

    def segment(self, lo: int, hi: int) -> np.ndarray:
        if self.prefix is None:
            self.build_prefix()
        return kernels.dense_extend(self.prefix, self.gammas[-1], lo, hi, 1, self.edges[-1] + 1,
                                    self.masks[-1], self.threads)


def _segments(vmax: int, dense: int) -> list[tuple[int, int]]:
    if vmax + 1 <= dense:
        return [(0, vmax + 1)]
    seg = max(1024, dense // 4)
    return [(lo, min(vmax + 1, lo + seg)) for lo in range(0, vmax + 1, seg)]


def _dense_histograms(parts, vmax, threads, dense, budget) -> Iterator[tuple[int, list[np.ndarray]]]:
    """Yield (lo, [hist_i over [lo, hi)]) segments for every part."""
    plans = [_PartPlan(g, e, m, vmax, threads) for g, e, m in parts]
    for i, pl in enumerate(plans):
        if pl.prefix_len > dense:
            raise BudgetExceeded(f"prefix histogram of {pl.prefix_len} cells exceeds dense limit", i)
    work = sum(pl.work() for pl in plans)
    if work > budget:
        raise BudgetExceeded(f"estimated {work:.3g} operations exceed budget {budget:.3g}")
    for lo, hi in _segments(vmax, dense):
        yield lo, [pl.segment(lo, hi) for pl in plans]


# ------------------------------------------------------------------ energy

def _spec_parts(spec: ProblemSpec, edges):
    masks = _coordinate_masks(spec.restriction, spec.shape.size, edges)
    out = []
    for rng, gp in zip(spec.shape.part_ranges(), spec.system.parts()):
        out.append((gp, edges[rng.start:rng.stop], masks[rng.start:rng.stop]))
    return out


def _part_max_value(gammas, edges) -> int:
    return prod(e ** g for g, e in zip(gammas, edges))


def _choose_method(spec: ProblemSpec, parts, dense: int) -> str:
    if not spec.restriction.separable:
        return "tuple"
    vmax = min(_part_max_value(g, e) for g, e, _ in parts)
    if vmax + 1 <= dense:
        return "dense"
    plans_ok = all(_PartPlan(g, e, m, vmax, 1).prefix_len <= dense for g, e, m in parts)
    return "segmented" if plans_ok else "counter"


def _part_values(gammas, edges, masks, budget, part):
    """All values x^gamma over one part's box (with coordinate masks), vectorized when safe."""
    axes = [_axis_values(e, m) for e, m in zip(edges, masks)]
    size = prod(len(a) for a in axes)
    if size > budget:
        raise BudgetExceeded(f"box of {size} tuples exceeds budget {budget}", part)
    if size == 0:
        return np.zeros(0, dtype=np.int64), np.zeros(0, dtype=np.int64)
    if _part_max_value(gammas, edges) < INT64_SAFE:
        vals = np.ones(1, dtype=np.int64)
        for g, ax in zip(gammas, axes):
            vals = (vals[:, None] * (ax ** g)[None, :]).ravel()
        return np.unique(vals, return_counts=True)
    cnt = Counter()
    for x in itertools.product(*(ax.tolist() for ax in axes)):
        cnt[prod(v ** g for v, g in zip(x, gammas))] += 1
    keys = sorted(cnt)
    return keys, [cnt[v] for v in keys]


def _energy_counter(spec, parts, budget) -> int:
    vc = ValueCounter(len(parts))
    for i, (g, e, m) in enumerate(parts):
        vals, counts = _part_values(g, e, m, budget, i)
        vc.add_many(i, vals, counts)
    return vc.energy()


def _energy_tuple(spec, parts, budget) -> int:
    """Joint enumeration for restrictions that do not factor over coordinates."""
    groups = []
    for i, (g, e, _) in enumerate(parts):
        size = prod(e)
        if size > budget:
            raise BudgetExceeded(f"box of {size} tuples exceeds budget {budget}", i)
        by_value = defaultdict(list)
        for x in itertools.product(*(range(1, t + 1) for t in e)):
            by_value[prod(v ** gg for v, gg in zip(x, g))].append(x)
        groups.append(by_value)
    common = set(groups[0])
    for gr in groups[1:]:
        common &= set(gr)
    work = sum(prod(len(gr[v]) for gr in groups) for v in common)
    if work > budget:
        raise BudgetExceeded(f"{work} candidate solutions exceed budget {budget}")
    total = 0
    psi = spec.restriction.psi
    for v in sorted(common):
        for combo in itertools.product(*(gr[v] for gr in groups)):
            if psi(tuple(x for part in combo for x in part)):
                total += 1
    return total


def energy_count(spec: ProblemSpec, H: int, budget: int | None = None, threads: int | None = None,
                 method: str = "auto", dense_cells: int | None = None) -> tuple[int, str]:
    """Exact E(H^b) together with the method used."""
    if H < 1:
        raise ValueError("height must be >= 1")
    budget = config.budget(budget)
    threads = config.threads(threads)
    dense = config.dense_cells(dense_cells)
    edges = box_edges(spec, H)
    parts = _spec_parts(spec, edges)
    if method == "auto":
        method = _choose_method(spec, parts, dense)
    if method in ("dense", "segmented"):
        if not spec.restriction.separable:
            raise ValueError("dense methods need a coordinate-separable restriction")
        vmax = min(_part_max_value(g, e) for g, e, _ in parts)
        seg_dense = dense if method == "segmented" else max(dense, vmax + 1)
        total = 0
        for lo, hists in _dense_histograms(parts, vmax, threads, seg_dense, budget):
            if lo == 0:
                hists = [h[1:] for h in hists]
            total += _sum_of_products(hists)
        return total, method
    if method == "counter":
        if not spec.restriction.separable:
            raise ValueError("counter method needs a coordinate-separable restriction")
        return _energy_counter(spec, parts, budget), method
    if method == "tuple":
        return _energy_tuple(spec, parts, budget), method
    raise ValueError(f"unknown method {method!r}")


def energy_bruteforce(spec: ProblemSpec, H: int, budget: int | None = None,
                      threads: int | None = None, method: str = "auto") -> int:
    """E(H^b) = #{x in box(H^b) and in the restricted set : x_1^g1 = ... = x_k^gk}."""
    return energy_count(spec, H, budget, threads, method)[0]


# ------------------------------------------------------------------ moments

def _as_box(X, m: int) -> list[int]:
    if isinstance(X, (int, np.integer)):
        return [int(X)] * m
    X = [int(x) for x in X]
    if len(X) != m:
        raise ValueError(f"box has {len(X)} sides, expected {m}")
    return X


def tau_histogram(X: Sequence[int], masks=None, threads: int | None = None) -> np.ndarray:
    """tau_m(n; X) for 0 <= n <= prod X as a dense array (index = n)."""
    m = len(X)
    vmax = prod(X)
    masks = masks if masks is not None else [None] * m
    plan = _PartPlan([1] * m, X, masks, vmax, config.threads(threads))
    return plan.segment(0, vmax + 1)


def _moment(m: int, k: int, X, masks, threads, budget, dense) -> int:
    X = _as_box(X, m)
    if min(X) < 1:
        return 0
    vmax = prod(X)
    acc = Counter()
    parts = [([1] * m, X, masks)]
    for lo, (hist,) in _dense_histograms(parts, vmax, threads, dense, budget):
        _power_sum_from_hist(hist, k, acc)
    return _sum_from_counter(acc, k)


def moment_divisor_sieve(m: int, k: int, X, threads: int | None = None, budget: int | None = None,
                         dense_cells: int | None = None) -> int:
    """M_{m,k}(X) = sum_n tau_m(n; X)^k, tau_m(n; X) = #{d_1...d_m = n, d_j <= X_j}."""
    return _moment(m, k, X, [None] * m, config.threads(threads), config.budget(budget),
                   config.dense_cells(dense_cells))


def restricted_moment(q: int, X, threads: int | None = None, budget: int | None = None,
                      dense_cells: int | None = None) -> int:
    """sum over n coprime to q of tau(n; X, X)^2, skipping divisors sharing a prime with q."""
    X = _as_box(X, 2)
    spec = RestrictionSpec.coprime_to(q)
    masks = _coordinate_masks(spec, 2, X)
    return _moment(2, 2, X, masks, config.threads(threads), config.budget(budget),
                   config.dense_cells(dense_cells))


def _factorizations_in_box(exps: list[tuple[int, int]], X: Sequence[int]) -> int:
    """#{(d_1..d_m) : prod d_j = n, d_j <= X_j} for n = prod p^e."""
    m = len(X)
    n = prod(p ** e for p, e in exps)

    def divisors(ex, cap):
        out = [(1, tuple(0 for _ in ex))]
        for idx, (p, e) in enumerate(ex):
            nxt = []
            for d, vec in out:
                pw = 1
                for t in range(e + 1):
                    if d * pw > cap:
                        break
                    v = list(vec)
                    v[idx] = t
                    nxt.append((d * pw, tuple(v)))
                    pw *= p
            out = nxt
        return out

    def rec(j, ex, rest):
        if j == m - 1:
            return 1 if rest <= X[j] else 0
        total = 0
        for d, vec in divisors(ex, X[j]):
            if rest // d <= prod(X[j + 1:]):
                total += rec(j + 1, [(p, e - t) for (p, e), t in zip(ex, vec)], rest // d)
        return total

    return rec(0, list(exps), n)


def moment_power_sieve(m: int, k: int, ell: int, X, threads: int | None = None,
                       budget: int | None = None) -> int:
    """M_{m,k,ell}(X) = sum_y tau_m(y^ell; X)^k over y <= (prod X)^(1/ell)."""
    X = _as_box(X, m)
    threads = config.threads(threads)
    budget = config.budget(budget)
    Y = iroot(prod(X), ell)
    if Y < 1:
        return 0
    if 40 * Y > budget:
        raise BudgetExceeded(f"{Y} values of y exceed budget {budget}")
    spf = smallest_prime_factors(Y)
    if m == 2:
        taus = kernels.tau_power_pairs(1, Y + 1, ell, X[0], X[1], spf, threads)
        return _sum_from_counter(_power_sum_from_hist(taus, k), k)
    acc = Counter()
    for y in range(1, Y + 1):
        exps = []
        t = y
        while t > 1:
            p = int(spf[t])
            e = 0
            while t % p == 0:
                t //= p
                e += 1
            exps.append((p, e * ell))
        tau = _factorizations_in_box(exps, X)
        if tau:
            acc[tau] += 1
    return _sum_from_counter(acc, k)


def tau_xi_moment(xi: Sequence[int], k: int, c, H: int, threads: int | None = None,
                  budget: int | None = None, dense_cells: int | None = None) -> int:
    """sum_n tau_xi(n; H^c)^k with tau_xi(n; X) = #{d in box : d_1^xi_1 ... d_m^xi_m = n}."""
    xi = [int(x) for x in xi]
    m = len(xi)
    c = list(c) if isinstance(c, (list, tuple)) else [c] * m
    edges = [box_edge(H, cj) for cj in c]
    threads = config.threads(threads)
    budget = config.budget(budget)
    dense = config.dense_cells(dense_cells)
    vmax = _part_max_value(xi, edges)
    masks = [None] * m
    acc = Counter()
    plan = _PartPlan(xi, edges, masks, vmax, threads)
    if plan.prefix_len <= dense:
        for lo, (hist,) in _dense_histograms([(xi, edges, masks)], vmax, threads, dense, budget):
            _power_sum_from_hist(hist, k, acc)
        return _sum_from_counter(acc, k)
    vals, counts = _part_values(xi, edges, masks, budget, 0)
    for cnt in counts:
        acc[int(cnt)] += 1
    return _sum_from_counter(acc, k)


# ------------------------------------------------------------------ matrices

def _signed_pair_counts(H: int, threads=None) -> tuple[int, np.ndarray]:
    """N(0) and N(v) for v = 1..H^2, N(v) = #{(a, d) in [-H, H]^2 : a d = v}."""
    tau = tau_histogram([H, H], threads=threads)
    return 4 * H + 1, 2 * tau[1:]


def singular_matrix_count(H: int, threads: int | None = None) -> int:
    """#{(a, b, c, d) in [-H, H]^4 : ad = bc} = sum over signed v of N(v)^2."""
    n0, nv = _signed_pair_counts(H, threads)
    return n0 * n0 + 2 * _sum_from_counter(_power_sum_from_hist(nv, 2), 2)


def egyptian_singular_count(H: int, threads: int | None = None) -> int:
    """Quadruples with no zero entry and 1/(ad) = 1/(bc), i.e. ad = bc."""
    _, nv = _signed_pair_counts(H, threads)
    return 2 * _sum_from_counter(_power_sum_from_hist(nv, 2), 2)


def singular_direct(H: int, nonzero: bool = False) -> int:
    """Reference count by looping over all quadruples."""
    rng = [v for v in range(-H, H + 1) if not (nonzero and v == 0)]
    n = Counter(a * d for a in rng for d in rng)
    return sum(c * c for c in n.values())


def zero_pattern_count(H: int) -> int:
    """#{ad = 0 = bc} over [-H, H]^4."""
    zeros = 4 * H + 1
    return zeros * zeros


# ------------------------------------------------------------------ oracles

def squarefree_kernel_count(X: int) -> int:
    """sum over squarefree s <= X of floor(sqrt(X / s))^2.

    Counts pairs d_1 d_2 = y^2 with d_1, d_2 <= X: write d_1 = s u^2,
    d_2 = s v^2 with s squarefree.
    """
    sq = mobius_squarefree(X)
    s = np.flatnonzero(sq).astype(np.int64)
    q = X // s
    r = np.floor(np.sqrt(q.astype(np.float64))).astype(np.int64)
    r -= (r * r > q)
    r += ((r + 1) * (r + 1) <= q)
    return int((r * r).sum())


def squarefree_kernel_table(X: int) -> np.ndarray:
    """M_{2,1,2}(x, x) for every x <= X at once (index = x).

    Every solution d_1 = s u^2, d_2 = s v^2 enters at x = s max(u, v)^2; those
    with s t^2 = x number 2t - 1.
    """
    sq = mobius_squarefree(X)
    inc = np.zeros(X + 1, dtype=np.int64)
    for t in range(1, iroot(X, 2) + 1):
        s = np.flatnonzero(sq[: X // (t * t) + 1])
        inc[s * t * t] += 2 * t - 1
    return np.cumsum(inc)


# ------------------------------------------------------------------ grids

def _family_shortcut(spec: ProblemSpec):
    """Recognize the (m, k, ell) reduction gamma = 1_m + ... + 1_m + (ell), b = c + ... + c + (|c|/ell)."""
    parts = spec.system.parts()
    if len(parts) < 2 or not spec.restriction.is_trivial:
        return None
    last = parts[-1]
    if len(last) != 1:
        return None
    head = parts[:-1]
    m = len(head[0])
    if any(list(p) != [1] * m for p in head):
        return None
    bparts = spec.shape.split(spec.box.b)
    c = bparts[0]
    if any(bp != c for bp in bparts[:-1]) or bparts[-1][0] != sum(c) / last[0]:
        return None
    return m, len(head), last[0], c


def census_grid(spec: ProblemSpec, H_values: Sequence[int], budget: int | None = None,
                threads: int | None = None, method: str = "auto") -> CensusResult:
    """Exact counts at each height; counts must be nondecreasing in H."""
    rows, secs, methods = [], [], []
    for H in sorted(set(int(h) for h in H_values)):
        t0 = time.perf_counter()
        count, used = energy_count(spec, H, budget, threads, method)
        secs.append(time.perf_counter() - t0)
        rows.append((H, count))
        methods.append(used)
    for (h1, c1), (h2, c2) in zip(rows, rows[1:]):
        if c2 < c1:
            raise AssertionError(f"census decreased between H={h1} and H={h2}")
    tag = "+".join(sorted(set(methods))) if methods else "none"
    return CensusResult(tuple(rows), tag, spec.fingerprint(), tuple(secs), tuple(methods))
