"""The additive monoid R_gamma of exponent patterns and its degree slices.

R_gamma is the set of r in Z_+^I with <gamma_i, r_i> equal across parts.  A
weight tuple a grades it by <a, r>; the slice at level 1 controls the
log-power of the main term.
"""

from __future__ import annotations

import itertools
from collections import defaultdict
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from math import lcm
from typing import Iterable, Sequence

import numpy as np

from . import exact
from .model import (AllowedSet, BoxExponents, DivlabError, ExponentSystem, ExponentVector,
                    RestrictionSpec, Shape, WeightTuple, canonical_order)


class InadmissibleWeight(DivlabError):
    pass


class UnboundedOrDegenerate(DivlabError):
    pass


class SearchTooLarge(DivlabError):
    pass


@dataclass(frozen=True)
class LatticeSlice:
    weight: WeightTuple
    level: Fraction
    elements: tuple[ExponentVector, ...]

    def __len__(self):
        return len(self.elements)

    def __iter__(self):
        return iter(self.elements)

    @property
    def vectors(self) -> list[tuple[int, ...]]:
        return [e.r for e in self.elements]


@dataclass(frozen=True)
class PartitionCertificate:
    mu: int
    eta_tuples: tuple[tuple[int, ...], ...]
    part_values: tuple[Fraction, ...]

    def verify(self, system: ExponentSystem, box: BoxExponents) -> bool:
        size = system.shape.size
        if self.mu != len(self.eta_tuples) or self.mu != len(self.part_values):
            return False
        if [sum(col) for col in zip(*self.eta_tuples)] != [1] * size:
            return False
        for eta, value in zip(self.eta_tuples, self.part_values):
            sums = [sum((g * e * b for g, e, b in zip(gp, ep, bp)), Fraction(0))
                    for gp, ep, bp in zip(system.parts(), system.shape.split(eta),
                                          system.shape.split(box.b))]
            if any(s != value for s in sums):
                return False
        return True


@dataclass(frozen=True)
class GeneratorSet:
    generators: tuple[ExponentVector, ...]
    value_bound: int
    certified: bool
    certify_bound: int

    def __iter__(self):
        return iter(self.generators)

    def __len__(self):
        return len(self.generators)

    @property
    def vectors(self) -> list[tuple[int, ...]]:
        return [g.r for g in self.generators]


@dataclass(frozen=True)
class GenerationCheck:
    passed: bool
    depth: Fraction
    checked: int
    counterexample: tuple[int, ...] | None = None
    counterexample_level: Fraction | None = None

    @property
    def label(self) -> str:
        if self.passed:
            return f"pass (certified up to depth {self.depth})"
        return f"counterexample {self.counterexample} at level {self.counterexample_level}"

    def __bool__(self):
        return self.passed


# ------------------------------------------------------------------ enumeration

def _part_vectors(gamma: Sequence[int], a: Sequence[Fraction], cap: Fraction):
    """All r >= 0 for one part with <a, r> <= cap, as (r, N, w)."""
    m = len(gamma)
    out = []

    def rec(j, prefix, n, w):
        if j == m:
            out.append((tuple(prefix), n, w))
            return
        t = 0
        while w + t * a[j] <= cap:
            prefix.append(t)
            rec(j + 1, prefix, n + t * gamma[j], w + t * a[j])
            prefix.pop()
            t += 1

    rec(0, [], 0, Fraction(0))
    return out


def _combine_parts(system: ExponentSystem, a: WeightTuple, cap: Fraction, exact_level: bool):
    """All r in R_gamma with <a, r> <= cap (or == cap when exact_level)."""
    shape = system.shape
    a_parts = shape.split(a.a)
    per_part = []
    for gp, ap in zip(system.parts(), a_parts):
        by_n = defaultdict(list)
        for r, n, w in _part_vectors(gp, ap, cap):
            by_n[n].append((r, w))
        per_part.append(by_n)
    common = set(per_part[0])
    for by_n in per_part[1:]:
        common &= set(by_n)
    results = []
    for n in sorted(common):
        lists = [by_n[n] for by_n in per_part]
        mins = [min(w for _, w in lst) for lst in lists]
        suffix = [Fraction(0)] * (len(lists) + 1)
        for i in range(len(lists) - 1, -1, -1):
            suffix[i] = suffix[i + 1] + mins[i]

        def rec(i, prefix, w):
            if w + suffix[i] > cap:
                return
            if i == len(lists):
                if not exact_level or w == cap:
                    results.append((prefix, w, n))
                return
            for r, wr in lists[i]:
                rec(i + 1, prefix + r, w + wr)

        rec(0, (), Fraction(0))
    return results


def enumerate_slice(system: ExponentSystem, a: WeightTuple, level=1) -> LatticeSlice:
    """Exactly the set {r in R_gamma : <a, r> = level}, in canonical order."""
    level = Fraction(level)
    if level <= 0:
        raise ValueError("slice level must be positive")
    found = {r: n for r, _, n in _combine_parts(system, a, level, True)}
    elems = tuple(ExponentVector(r, found[r]) for r in canonical_order(found))
    return LatticeSlice(a, level, elems)


def naive_slice(system: ExponentSystem, a: WeightTuple, level=1) -> list[tuple[int, ...]]:
    """Reference filtration of the full box r_c <= level / a_c."""
    level = Fraction(level)
    ranges = [range(int(level / x) + 1) for x in a.a]
    return canonical_order(r for r in itertools.product(*ranges)
                           if a.dot(r) == level and system.contains(r))


def rank_of(vectors: Iterable) -> int:
    rows = [list(v.r if isinstance(v, ExponentVector) else v) for v in vectors]
    return exact.rank(rows)


def check_admissible(system: ExponentSystem, a: WeightTuple, generators: GeneratorSet | None = None):
    gens = generators if generators is not None else minimal_generators(system)
    bad = [g.r for g in gens if a.dot(g.r) < 1]
    if bad:
        raise InadmissibleWeight(f"<a, r> < 1 for minimal generator(s) {bad[:3]}")
    return gens


def kappa(system: ExponentSystem, a: WeightTuple, check: bool = True) -> int:
    """#slice - rank(slice)."""
    if check:
        check_admissible(system, a)
    sl = enumerate_slice(system, a, 1)
    return len(sl) - rank_of(sl)


# ------------------------------------------------------------------ generators

def _vectors_with_value(gamma: Sequence[int], n: int) -> list[tuple[int, ...]]:
    out = []
    m = len(gamma)

    def rec(j, prefix, rem):
        if j == m - 1:
            if rem % gamma[j] == 0:
                out.append(tuple(prefix) + (rem // gamma[j],))
            return
        for t in range(rem // gamma[j] + 1):
            prefix.append(t)
            rec(j + 1, prefix, rem - t * gamma[j])
            prefix.pop()

    rec(0, [], n)
    return out


def generator_certify_bound(system: ExponentSystem) -> int:
    """Every minimal generator has common value at most this.

    If all parts have N > m_i L - |gamma_i| (L the lcm of gamma), each part
    contains a sub-pattern of value exactly L, so r dominates an element of
    value L; hence minimal r satisfy N <= max(L, max_i(m_i L - |gamma_i|)).
    """
    L = system.lcm
    return max([L] + [len(gp) * L - sum(gp) for gp in system.parts()])


def minimal_generators(system: ExponentSystem, value_bound: int | None = None) -> GeneratorSet:
    """Minimal nonzero elements of R_gamma with common value <= value_bound."""
    if value_bound is None:
        value_bound = system.shape.k * system.lcm
    if value_bound < max(system.gamma):
        raise ValueError(f"value_bound must be at least max gamma = {max(system.gamma)}")
    parts = system.parts()
    gens: list[tuple[int, ...]] = []
    values: list[int] = []
    for n in range(1, value_bound + 1):
        per = [_vectors_with_value(gp, n) for gp in parts]
        if any(not p for p in per):
            continue
        g_arr = np.array(gens, dtype=np.int64) if gens else None
        for combo in itertools.product(*per):
            r = tuple(x for part in combo for x in part)
            if g_arr is not None and np.any(np.all(g_arr <= np.array(r), axis=1)):
                continue
            gens.append(r)
            values.append(n)
    order = sorted(range(len(gens)), key=lambda i: (values[i], tuple(-x for x in gens[i])))
    cert = generator_certify_bound(system)
    return GeneratorSet(tuple(ExponentVector(gens[i], values[i]) for i in order),
                        value_bound, value_bound >= cert, cert)


# ------------------------------------------------------------------ weights

def canonical_a(m: int, k: int, ell: int) -> WeightTuple:
    """1/((k+1) ell) on each of the k unit parts and 1/(k+1) on the last."""
    if min(m, k, ell) < 1:
        raise ValueError("m, k, ell must be >= 1")
    shape = Shape((m,) * k + (1,))
    return WeightTuple(shape, (Fraction(1, (k + 1) * ell),) * (m * k) + (Fraction(1, k + 1),))


VERTEX_ENUMERATION_CAP = 200_000


def _optimal_face_vertices(G, b, z):
    """Vertices of {a >= 0, G a >= 1, <b, a> = z}, or None above the cap."""
    M = len(b)
    rows = [list(g) for g in G] + [[int(i == j) for j in range(M)] for i in range(M)]
    rhs = [1] * len(G) + [0] * M
    from math import comb
    if comb(len(rows), M) > VERTEX_ENUMERATION_CAP:
        return None
    A = np.array(rows, dtype=float)
    Gf = np.array(G, dtype=float)
    bf = np.array([float(x) for x in b])
    verts = set()
    for subset in itertools.combinations(range(len(rows)), M):
        sub = A[list(subset)]
        if abs(np.linalg.det(sub)) < 1e-9:
            continue
        xf = np.linalg.solve(sub, np.array([rhs[i] for i in subset], dtype=float))
        if xf.min() < -1e-7 or (Gf @ xf).min() < 1 - 1e-7 or abs(bf @ xf - float(z)) > 1e-7:
            continue
        x = exact.solve([rows[i] for i in subset], [rhs[i] for i in subset])
        if x is None or min(x) < 0:
            continue
        if any(sum(gi * xi for gi, xi in zip(g, x)) < 1 for g in G):
            continue
        if sum(bi * xi for bi, xi in zip(b, x)) != z:
            continue
        verts.add(tuple(x))
    return sorted(verts)


def _maxmin_on_face(G, b, z):
    """Deterministic interior-leaning optimum: maximize min_c a_c on the optimal face."""
    M = len(b)
    # variables (a_1..a_M, t); maximize t
    c = [0] * M + [1]
    A_ub = [[-x for x in g] + [0] for g in G]
    b_ub = [-1] * len(G)
    for i in range(M):
        A_ub.append([int(i == j) * -1 for j in range(M)] + [1])
        b_ub.append(0)
    res = exact.simplex_max(c, A_ub, b_ub, [list(b) + [0]], [z])
    if res.status != "optimal":
        return None
    return tuple(res.x[:M])


def find_a(system: ExponentSystem, box: BoxExponents, value_bound: int | None = None) -> WeightTuple:
    """An admissible a > 0 minimizing <a, b>, by exact linear programming.

    When the optimum is not unique the barycenter of the optimal vertices is
    returned; it is canonical and strictly positive in the symmetric cases
    where individual optimal vertices touch the boundary a_c = 0.
    """
    gens = minimal_generators(system, value_bound)
    G = [list(g.r) for g in gens]
    b = list(box.b)
    M = len(b)
    res = exact.simplex_max([-x for x in b], [[-x for x in g] for g in G], [-1] * len(G))
    if res.status != "optimal":
        raise UnboundedOrDegenerate(f"weight LP status: {res.status}")
    z = -res.value
    verts = _optimal_face_vertices(G, b, z)
    if verts:
        a = tuple(sum(v[i] for v in verts) / len(verts) for i in range(M))
    else:
        a = _maxmin_on_face(G, b, z)
    if a is None or min(a) <= 0:
        raise UnboundedOrDegenerate("the weight LP has no optimum with every a_c > 0; supply a manually")
    weight = WeightTuple(system.shape, a)
    check_admissible(system, weight, minimal_generators(system, 2 * gens.value_bound))
    return weight


# ------------------------------------------------------------------ generation

def elements_up_to(system: ExponentSystem, a: WeightTuple, depth) -> list[tuple[tuple[int, ...], Fraction]]:
    """All nonzero r in R_gamma with <a, r> <= depth, with their levels."""
    depth = Fraction(depth)
    out = [(r, w) for r, w, _ in _combine_parts(system, a, depth, False) if any(r)]
    out.sort(key=lambda item: (item[1], tuple(-x for x in item[0])))
    return out


def check_generation(system: ExponentSystem, a: WeightTuple, depth=4) -> GenerationCheck:
    """Check that every r with <a, r> <= depth is a Z_+-sum of slice elements."""
    depth = Fraction(depth)
    slice_vecs = enumerate_slice(system, a, 1).vectors
    memo: dict[tuple[int, ...], bool] = {}

    def representable(r):
        if not any(r):
            return True
        if r in memo:
            return memo[r]
        ok = False
        for s in slice_vecs:
            if all(x >= y for x, y in zip(r, s)):
                if representable(tuple(x - y for x, y in zip(r, s))):
                    ok = True
                    break
        memo[r] = ok
        return ok

    elems = elements_up_to(system, a, depth)
    for r, level in elems:
        if not representable(r):
            return GenerationCheck(False, depth, len(elems), r, level)
    return GenerationCheck(True, depth, len(elems))


# ------------------------------------------------------------------ nu counts

def _weight_scale(a: WeightTuple) -> int:
    return lcm(*(x.denominator for x in a.a))


def _part_table(gamma, weights, size_cap, forced_zero=()):
    """{N: {W: count}} for one part, W = scaled <a_i, r_i> <= size_cap."""
    table = {(0, 0): 1}
    for j, (g, w) in enumerate(zip(gamma, weights)):
        if j in forced_zero:
            continue
        new = defaultdict(int)
        for (n, s), cnt in table.items():
            t = 0
            while s + t * w <= size_cap:
                new[(n + t * g, s + t * w)] += cnt
                t += 1
        table = new
    out = defaultdict(dict)
    for (n, s), cnt in table.items():
        out[n][s] = cnt
    return out


def nu_series(system: ExponentSystem, a: WeightTuple, nmax: int,
              rule: AllowedSet | None = None) -> list[int]:
    """[nu(0), ..., nu(nmax)]: elements of R_gamma allowed by ``rule`` at each level."""
    L = _weight_scale(a)
    scaled = [int(x * L) for x in a.a]
    cap = nmax * L
    size = system.shape.size
    if rule is not None and rule.kind == "zero":
        zero = set(rule.zero_coords(size))
    else:
        zero = set()
    tables = []
    for rng, gp in zip(system.shape.part_ranges(), system.parts()):
        forced = {c - rng.start for c in zero if c in rng}
        tables.append(_part_table(gp, scaled[rng.start:rng.stop], cap, forced))
    common = set(tables[0])
    for t in tables[1:]:
        common &= set(t)
    totals = [0] * (cap + 1)
    for n in common:
        poly = dict(tables[0][n])
        for t in tables[1:]:
            nxt = defaultdict(int)
            for s1, c1 in poly.items():
                for s2, c2 in t[n].items():
                    if s1 + s2 <= cap:
                        nxt[s1 + s2] += c1 * c2
            poly = nxt
        for s, c in poly.items():
            totals[s] += c
    series = [totals[n * L] for n in range(nmax + 1)]
    if rule is not None and rule.kind == "exclude":
        for v in rule.vectors:
            if system.contains(v):
                lv = a.dot(v)
                if lv.denominator == 1 and lv <= nmax:
                    series[int(lv)] -= 1
    return series


def nu_count(system: ExponentSystem, restriction: RestrictionSpec, a: WeightTuple, n: int, p: int) -> int:
    """#{r in R_gamma allowed at p : <a, r> = n}."""
    if n < 0:
        return 0
    return nu_series(system, a, n, restriction.rule(p))[n]


# ------------------------------------------------------------------ mu

MU_COORDINATE_CAP = 16


def mu(system: ExponentSystem, box: BoxExponents, cap: int = MU_COORDINATE_CAP) -> PartitionCertificate:
    """Maximal partition of the coordinates into blocks with equal weighted part sums."""
    shape = system.shape
    size = shape.size
    if size > cap:
        raise SearchTooLarge(f"{size} coordinates exceed the search cap of {cap}")
    weights = [g * b for g, b in zip(system.gamma, box.b)]
    sums = [sum(weights[c] for c in rng) for rng in shape.part_ranges()]
    if any(s != sums[0] for s in sums):
        raise ValueError("mu needs a balanced spec")
    part_subsets = []
    for rng in shape.part_ranges():
        subs = []
        idx = list(rng)
        for bits in range(1, 1 << len(idx)):
            mask = 0
            total = Fraction(0)
            for t, c in enumerate(idx):
                if bits >> t & 1:
                    mask |= 1 << c
                    total += weights[c]
            subs.append((mask, total))
        part_subsets.append(subs)

    @lru_cache(maxsize=None)
    def best(remaining: int):
        if remaining == 0:
            return 0, ()
        low = (remaining & -remaining).bit_length() - 1
        low_part = next(i for i, rng in enumerate(shape.part_ranges()) if low in rng)
        options = []
        for i, subs in enumerate(part_subsets):
            by_value = defaultdict(list)
            for mask, total in subs:
                if mask & ~remaining:
                    continue
                if i == low_part and not mask >> low & 1:
                    continue
                by_value[total].append(mask)
            options.append(by_value)
        values = set(options[0])
        for o in options[1:]:
            values &= set(o)
        top = (-1, ())
        for v in sorted(values):
            for combo in itertools.product(*(o[v] for o in options)):
                block = 0
                for msk in combo:
                    block |= msk
                count, blocks = best(remaining & ~block)
                if count >= 0 and count + 1 > top[0]:
                    top = (count + 1, ((block, v),) + blocks)
        return top

    count, blocks = best((1 << size) - 1)
    if count < 1:
        raise ValueError("no admissible partition (spec not balanced)")
    etas = [(tuple((mask >> c) & 1 for c in range(size)), v) for mask, v in blocks]
    etas.sort(key=lambda e: (e[1], tuple(-x for x in e[0])))
    return PartitionCertificate(count, tuple(e for e, _ in etas), tuple(v for _, v in etas))
