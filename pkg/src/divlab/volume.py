"""Polytope volumes attached to a weight tuple a and box exponents b.

The operational volume is the limit V of s^(d - kappa) e^(-lambda s) I(s) as
s grows, where I(s) is the integral of exp(s * sum t) over the down-set
polytope T = {t >= 0 : sum_r r_c t_r <= b_c}.  I(s) is computed exactly on a
triangulation: the integral of an exponential over a simplex is the volume
factor times a (confluent) divided difference of exp at the vertex values.
"""

from __future__ import annotations

import itertools
import math
from collections import defaultdict
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Sequence

import mpmath
import numpy as np

from . import exact
from .intervals import NumericInterval
from .lattice import enumerate_slice, rank_of
from .model import BoxExponents, DivlabError, ExponentSystem, WeightTuple

DEFAULT_S_GRID = (40, 80, 160, 320)


class DegenerateSlice(DivlabError):
    pass


class ExtrapolationUnstable(DivlabError):
    pass


# ------------------------------------------------------------------ polytopes

class HPolytope:
    """Bounded full-dimensional polytope {x in R^n : A x <= b} with exact data."""

    def __init__(self, A: Sequence[Sequence], b: Sequence, vertices=None):
        self.A = [tuple(Fraction(x) for x in row) for row in A]
        self.b = tuple(Fraction(x) for x in b)
        self.n = len(self.A[0]) if self.A else 0
        self._vertices = [tuple(v) for v in vertices] if vertices is not None else None
        self._tight = None
        self._simplices = None

    @property
    def dimension(self) -> int:
        return self.n

    def vertices(self) -> list[tuple[Fraction, ...]]:
        if self._vertices is None:
            self._vertices = _enumerate_vertices(self.A, self.b)
        return self._vertices

    def tight_sets(self) -> list[frozenset]:
        if self._tight is None:
            self._tight = [frozenset(i for i, (row, bi) in enumerate(zip(self.A, self.b))
                                     if sum(a * x for a, x in zip(row, v)) == bi)
                           for v in self.vertices()]
        return self._tight

    def contains(self, x) -> bool:
        return all(sum(a * xi for a, xi in zip(row, x)) <= bi for row, bi in zip(self.A, self.b))

    def simplices(self) -> list[tuple[int, ...]]:
        if self._simplices is None:
            self._simplices = pulling_triangulation(self)
        return self._simplices

    def simplex_det(self, simplex: Sequence[int]) -> Fraction:
        verts = self.vertices()
        v0 = verts[simplex[0]]
        mat = [[x - y for x, y in zip(verts[i], v0)] for i in simplex[1:]]
        return abs(exact.determinant(mat))

    def volume(self) -> Fraction:
        """Exact Lebesgue volume from the triangulation."""
        return sum((self.simplex_det(s) for s in self.simplices()), Fraction(0)) / math.factorial(self.n)

    def bounding_box(self):
        verts = np.array([[float(x) for x in v] for v in self.vertices()])
        return verts.min(axis=0), verts.max(axis=0)

    def inside_float(self, pts: np.ndarray) -> np.ndarray:
        A = np.array([[float(x) for x in row] for row in self.A])
        b = np.array([float(x) for x in self.b])
        return np.all(pts @ A.T <= b + 1e-12, axis=1)


def _enumerate_vertices(A, b) -> list[tuple[Fraction, ...]]:
    n = len(A[0])
    Af = np.array([[float(x) for x in row] for row in A])
    bf = np.array([float(x) for x in b])
    scale = max(1.0, float(np.abs(Af).max()))
    seen: dict[tuple, tuple[Fraction, ...]] = {}
    for subset in itertools.combinations(range(len(A)), n):
        sub = Af[list(subset)]
        if abs(np.linalg.det(sub)) < 1e-9 * scale ** n:
            continue
        xf = np.linalg.solve(sub, bf[list(subset)])
        if np.any(Af @ xf > bf + 1e-7):
            continue
        key = tuple(np.round(xf, 7))
        if key in seen:
            continue
        x = exact.solve([A[i] for i in subset], [b[i] for i in subset])
        if x is None:
            continue
        if all(sum(a * xi for a, xi in zip(row, x)) <= bi for row, bi in zip(A, b)):
            seen[key] = tuple(x)
    return sorted(set(seen.values()))


def pulling_triangulation(poly: HPolytope) -> list[tuple[int, ...]]:
    """Triangulate by pulling the smallest vertex of each face, recursively.

    Facets of a face are the maximal vertex sets tight at one more
    inequality; a face of dimension k is the cone from its first vertex over
    the triangulated facets that avoid it.
    """
    verts = poly.vertices()
    tight = poly.tight_sets()
    n_rows = len(poly.A)

    @lru_cache(maxsize=None)
    def dim(face: frozenset) -> int:
        return exact.affine_dimension([verts[i] for i in sorted(face)])

    @lru_cache(maxsize=None)
    def facets(face: frozenset) -> tuple[frozenset, ...]:
        k = dim(face)
        common = frozenset.intersection(*(tight[i] for i in face))
        out = set()
        for row in range(n_rows):
            if row in common:
                continue
            sub = frozenset(i for i in face if row in tight[i])
            if len(sub) >= k and sub not in out and dim(sub) == k - 1:
                out.add(sub)
        return tuple(sorted(out, key=lambda s: sorted(s)))

    @lru_cache(maxsize=None)
    def tri(face: frozenset) -> tuple[tuple[int, ...], ...]:
        k = dim(face)
        if len(face) == k + 1:
            return (tuple(sorted(face)),)
        apex = min(face)
        out = []
        for f in facets(face):
            if apex in f:
                continue
            for s in tri(f):
                out.append(tuple(sorted((apex,) + s)))
        return tuple(out)

    full = frozenset(range(len(verts)))
    if dim(full) != poly.n:
        raise DegenerateSlice("polytope is not full-dimensional")
    return sorted(tri(full))


def unit_simplex(d: int) -> HPolytope:
    A = [[-int(i == j) for j in range(d)] for i in range(d)] + [[1] * d]
    return HPolytope(A, [0] * d + [1])


@dataclass
class DownSetPolytope:
    """T_{a,b} = {t >= 0 : sum_r r_c t_r <= b_c for every coordinate c}."""
    slice_vectors: list[tuple[int, ...]]
    b: tuple[Fraction, ...]

    def __post_init__(self):
        d = len(self.slice_vectors)
        rows = [[-int(i == j) for j in range(d)] for i in range(d)]
        rhs = [Fraction(0)] * d
        for c, bc in enumerate(self.b):
            row = [r[c] for r in self.slice_vectors]
            if any(row):
                rows.append(row)
                rhs.append(bc)
        self.poly = HPolytope(rows, rhs)

    @property
    def dimension(self) -> int:
        return len(self.slice_vectors)

    def vertices(self):
        return self.poly.vertices()

    def volume(self) -> Fraction:
        return self.poly.volume()


@dataclass
class SlicePolytope:
    """{v >= 0 : sum_r r_c v_r = b_c}, stored in affine coordinates v = v0 + B c."""
    slice_vectors: list[tuple[int, ...]]
    b: tuple[Fraction, ...]

    def __post_init__(self):
        d = len(self.slice_vectors)
        M = len(self.b)
        self.E = [[r[c] for r in self.slice_vectors] for c in range(M)]
        self.feasible, self.certificate = _fiber_feasibility(self.E, self.b)
        self.vertices_v = _fiber_vertices(self.E, self.b) if self.feasible else []
        if not self.feasible:
            self.affine_dimension = -1
            return
        v0 = self.vertices_v[0]
        diffs = [[x - y for x, y in zip(v, v0)] for v in self.vertices_v[1:]]
        red, piv = exact.rref(diffs) if diffs else ([], [])
        basis = [exact.primitive(row) for row in red[:len(piv)]]
        self.v0 = v0
        self.basis = basis
        self.affine_dimension = len(basis)
        k = len(basis)
        if k == 0:
            self.coord_poly = None
            return
        # coordinates c with v = v0 + B^T c; B has full row rank so c = (B B^T)^-1 B (v - v0)
        gram = [[sum(x * y for x, y in zip(u, w)) for w in basis] for u in basis]
        self.gram = gram
        coords = []
        for v in self.vertices_v:
            rhs = [sum(x * (y - z) for x, y, z in zip(u, v, v0)) for u in basis]
            coords.append(tuple(exact.solve(gram, rhs)))
        A = [[-basis[j][i] for j in range(k)] for i in range(d) if any(basis[j][i] for j in range(k))]
        bb = [v0[i] for i in range(d) if any(basis[j][i] for j in range(k))]
        self.coord_poly = HPolytope(A, bb, vertices=sorted(set(coords)))

    def gram_determinant(self) -> int:
        if self.affine_dimension <= 0:
            return 1
        return int(exact.determinant(self.gram))


def _fiber_feasibility(E, b):
    d = len(E[0]) if E else 0
    res = exact.simplex_max([0] * d, [], [], E, b)
    if res.status == "optimal":
        return True, None
    # Farkas: find y with E^T y >= 0 and b.y = -1 (y free, split as y+ - y-)
    M = len(E)
    cols = [[E[c][r] for c in range(M)] for r in range(d)]
    A_ub = [[-x for x in col] + list(col) for col in cols]
    res = exact.simplex_max([0] * (2 * M), A_ub, [0] * d,
                            [list(b) + [-x for x in b]], [-1])
    if res.status != "optimal":
        return False, None
    y = [res.x[i] - res.x[M + i] for i in range(M)]
    return False, tuple(y)


def _fiber_vertices(E, b):
    """Basic feasible solutions of E v = b, v >= 0."""
    d = len(E[0])
    rk = exact.rank(E)
    red, piv = exact.rref([list(row) + [bi] for row, bi in zip(E, b)])
    rows = [r[:d] for r in red[:rk]]
    rhs = [r[d] for r in red[:rk]]
    out = set()
    for cols in itertools.combinations(range(d), rk):
        sub = [[row[c] for c in cols] for row in rows]
        sol = exact.solve(sub, rhs)
        if sol is None or min(sol, default=0) < 0:
            continue
        v = [Fraction(0)] * d
        for c, x in zip(cols, sol):
            v[c] = x
        if all(sum(e * x for e, x in zip(row, v)) == bi for row, bi in zip(E, b)):
            out.add(tuple(v))
    return sorted(out)


# ------------------------------------------------------------------ exponential integral

def _series_inverse_power(c: Fraction, m: int, order: int) -> list[Fraction]:
    """Coefficients of (c + h)^-m up to h^order."""
    base = c ** -m
    return [base * _binom_neg(m, n) / c ** n for n in range(order + 1)]


def _binom_neg(m: int, n: int) -> int:
    # binom(-m, n) = (-1)^n binom(m + n - 1, n)
    return (-1) ** n * math.comb(m + n - 1, n)


def _series_mul(a: list[Fraction], b: list[Fraction], order: int) -> list[Fraction]:
    out = [Fraction(0)] * (order + 1)
    for i, x in enumerate(a[:order + 1]):
        if x:
            for j, y in enumerate(b[:order + 1 - i]):
                out[i + j] += x * y
    return out


def simplex_exponential_terms(nodes: Sequence[Fraction]) -> dict[Fraction, list[Fraction]]:
    """Divided difference of z -> e^(s z) at ``nodes`` as {u: poly in s}.

    The result is s^-(len(nodes)-1) * sum_u e^(s u) * sum_j poly[j] s^j.
    Repeated nodes give higher-order residues.
    """
    mult: dict[Fraction, int] = defaultdict(int)
    for u in nodes:
        mult[Fraction(u)] += 1
    out = {}
    keys = sorted(mult)
    for uq in keys:
        mq = mult[uq]
        g = [Fraction(1)] + [Fraction(0)] * (mq - 1)
        for ul in keys:
            if ul == uq:
                continue
            g = _series_mul(g, _series_inverse_power(uq - ul, mult[ul], mq - 1), mq - 1)
        # residue of e^{sz} prod (z - u_l)^{-m_l} at u_q: e^{s u_q} sum_j s^j / j! g_{mq-1-j}
        out[uq] = [g[mq - 1 - j] / math.factorial(j) for j in range(mq)]
    return out


@dataclass(frozen=True)
class ExponentialIntegral:
    """I(s) = s^-d * sum_u e^(s u) * P_u(s) with exact rational polynomials P_u."""
    d: int
    terms: tuple[tuple[Fraction, tuple[Fraction, ...]], ...]

    @property
    def lam(self) -> Fraction:
        return max(u for u, _ in self.terms)

    def leading_polynomial(self) -> tuple[Fraction, ...]:
        return dict(self.terms)[self.lam]

    def evaluate(self, s, prec: int = 200):
        with mpmath.workprec(prec):
            s = mpmath.mpf(s)
            total = mpmath.mpf(0)
            for u, poly in self.terms:
                pv = mpmath.fsum(mpmath.mpf(c.numerator) / c.denominator * s ** j for j, c in enumerate(poly))
                total += mpmath.exp(s * mpmath.mpf(u.numerator) / u.denominator) * pv
            return total / s ** self.d

    def normalized(self, s, kappa: int, prec: int = 200):
        """s^(d - kappa) e^(-lambda s) I(s)."""
        with mpmath.workprec(prec):
            s = mpmath.mpf(s)
            lam = self.lam
            total = mpmath.mpf(0)
            for u, poly in self.terms:
                pv = mpmath.fsum(mpmath.mpf(c.numerator) / c.denominator * s ** j for j, c in enumerate(poly))
                shift = mpmath.mpf((u - lam).numerator) / (u - lam).denominator
                total += mpmath.exp(s * shift) * pv
            return total / s ** kappa


def exponential_integral(poly: HPolytope) -> ExponentialIntegral:
    verts = poly.vertices()
    sums = [sum(v, Fraction(0)) for v in verts]
    acc: dict[Fraction, list[Fraction]] = defaultdict(list)
    for simplex in poly.simplices():
        D = poly.simplex_det(simplex)
        for u, coeffs in simplex_exponential_terms([sums[i] for i in simplex]).items():
            row = acc[u]
            if len(row) < len(coeffs):
                row.extend([Fraction(0)] * (len(coeffs) - len(row)))
            for j, c in enumerate(coeffs):
                row[j] += D * c
    terms = []
    for u in sorted(acc):
        row = list(acc[u])
        while row and row[-1] == 0:
            row.pop()
        if row:
            terms.append((u, tuple(row)))
    return ExponentialIntegral(poly.n, tuple(terms))


# ------------------------------------------------------------------ volumes

def _slice_data(system: ExponentSystem, a: WeightTuple):
    sl = enumerate_slice(system, a, 1)
    if len(sl) == 0:
        raise DegenerateSlice("the degree-1 slice is empty")
    vecs = sl.vectors
    return vecs, len(vecs) - rank_of(vecs)


@lru_cache(maxsize=64)
def _cached_integral(vecs: tuple, b: tuple) -> ExponentialIntegral:
    return exponential_integral(DownSetPolytope(list(vecs), b).poly)


def down_set_integral(system: ExponentSystem, a: WeightTuple, box: BoxExponents) -> tuple[ExponentialIntegral, int]:
    vecs, kappa = _slice_data(system, a)
    return _cached_integral(tuple(vecs), tuple(box.b)), kappa


@dataclass(frozen=True)
class OperationalVolume:
    interval: NumericInterval
    exact: Fraction | None
    lam: Fraction
    kappa: int
    estimates: tuple
    s_grid: tuple


def _neville_at_zero(xs, ys):
    """Successive polynomial extrapolations to x = 0 using the first j points."""
    n = len(xs)
    estimates = [ys[0]]
    P = [list(ys)]
    for level in range(1, n):
        new = []
        for i in range(n - level):
            x0, x1 = xs[i], xs[i + level]
            new.append((x1 * P[-1][i] - x0 * P[-1][i + 1]) / (x1 - x0))
        P.append(new)
        estimates.append(new[0])
    return estimates


def operational_volume_report(system: ExponentSystem, a: WeightTuple, box: BoxExponents,
                              s_grid: Sequence = DEFAULT_S_GRID, prec: int = 192,
                              tolerance: float = 0.01) -> OperationalVolume:
    integral, kappa = down_set_integral(system, a, box)
    prec = max(prec, 150)
    s_grid = tuple(sorted(s_grid))
    with mpmath.workprec(prec):
        xs = [1 / mpmath.mpf(s) for s in s_grid]
        ys = [integral.normalized(s, kappa, prec) for s in s_grid]
        estimates = _neville_at_zero(xs, ys)
        best = estimates[-1]
        spread = abs(estimates[-1] - estimates[-2]) if len(estimates) > 1 else abs(best) * mpmath.mpf(tolerance)
        radius = spread + abs(best) * mpmath.ldexp(1, -prec + 20)
    if best == 0 or spread > tolerance * abs(best):
        raise ExtrapolationUnstable(f"extrapolated values {[mpmath.nstr(e, 8) for e in estimates]} disagree")
    lead = integral.leading_polynomial()
    exact_v = None
    if len(lead) <= kappa + 1:
        exact_v = lead[kappa] if kappa < len(lead) else Fraction(0)
    interval = NumericInterval.around(best, radius, 80)
    return OperationalVolume(interval, exact_v, integral.lam, kappa,
                             tuple(mpmath.nstr(e, 15) for e in estimates), s_grid)


def operational_volume(system: ExponentSystem, a: WeightTuple, box: BoxExponents,
                       s_grid: Sequence = DEFAULT_S_GRID) -> NumericInterval:
    """Interval for lim s^(d - kappa) e^(-lambda s) I(s) by Richardson extrapolation in 1/s."""
    return operational_volume_report(system, a, box, s_grid).interval


@dataclass(frozen=True)
class FiberVolume:
    """Volume R * sqrt(G) with R rational and G a squarefree integer (or 0 if infeasible)."""
    rational: Fraction
    radicand: int
    dimension: int
    certificate: tuple | None = None

    @property
    def value(self):
        return mpmath.mpf(self.rational.numerator) / self.rational.denominator * mpmath.sqrt(self.radicand)

    def interval(self, prec: int = 80) -> NumericInterval:
        with mpmath.workprec(prec + 20):
            v = self.value
        return NumericInterval.around(v, abs(v) * mpmath.ldexp(1, -prec + 4), prec)

    def __str__(self):
        if self.radicand == 1:
            return str(self.rational)
        return f"{self.rational}*sqrt({self.radicand})"


def _split_square(n: int) -> tuple[int, int]:
    """n = s^2 * g with g squarefree; returns (s, g)."""
    s, g, p = 1, 1, 2
    while p * p <= n:
        while n % (p * p) == 0:
            n //= p * p
            s *= p
        if n % p == 0:
            n //= p
            g *= p
        p += 1
    return s, g * n


def fiber_volume(system: ExponentSystem, a: WeightTuple, box: BoxExponents) -> FiberVolume:
    vecs, _ = _slice_data(system, a)
    sp = SlicePolytope(vecs, tuple(box.b))
    if not sp.feasible:
        return FiberVolume(Fraction(0), 1, -1, sp.certificate)
    k = sp.affine_dimension
    if k == 0:
        return FiberVolume(Fraction(1), 1, 0)
    vol_c = sp.coord_poly.volume()
    s, g = _split_square(sp.gram_determinant())
    return FiberVolume(vol_c * s, g, k)


def fiber_volume_euclidean(system: ExponentSystem, a: WeightTuple, box: BoxExponents) -> NumericInterval:
    """Induced Euclidean volume of {v >= 0 : sum_r r v_r = b} (a point counts as 1)."""
    return fiber_volume(system, a, box).interval()


# ------------------------------------------------------------------ Monte Carlo

@dataclass(frozen=True)
class MonteCarloVolume:
    estimate: float
    stderr: float
    samples: int

    def interval(self, z: float = 3.0, prec: int = 53) -> NumericInterval:
        return NumericInterval.around(self.estimate, z * self.stderr + 1e-300, prec)

    def agrees(self, value, z: float = 3.0) -> bool:
        return abs(float(value) - self.estimate) <= z * self.stderr + 1e-12


def volume_monte_carlo(polytope, samples: int = 10 ** 6, seed: int = 0, batch: int = 200_000) -> MonteCarloVolume:
    """Hit-or-miss estimate over the bounding box; slice polytopes include the Gram factor."""
    scale = 1.0
    if isinstance(polytope, SlicePolytope):
        if polytope.affine_dimension <= 0:
            return MonteCarloVolume(1.0 if polytope.feasible else 0.0, 0.0, 0)
        poly = polytope.coord_poly
        scale = math.sqrt(polytope.gram_determinant())
    elif isinstance(polytope, DownSetPolytope):
        poly = polytope.poly
    else:
        poly = polytope
    lo, hi = poly.bounding_box()
    box_vol = float(np.prod(hi - lo))
    rng = np.random.default_rng(seed)
    hits, done = 0, 0
    while done < samples:
        n = min(batch, samples - done)
        pts = lo + (hi - lo) * rng.random((n, poly.n))
        hits += int(poly.inside_float(pts).sum())
        done += n
    frac = hits / samples
    est = frac * box_vol * scale
    err = math.sqrt(frac * (1 - frac) / samples) * box_vol * scale
    return MonteCarloVolume(est, err, samples)


# ------------------------------------------------------------------ Birkhoff

@dataclass(frozen=True)
class BirkhoffReport:
    m: int
    operational: NumericInterval
    implied_B: NumericInterval
    fiber: FiberVolume | None
    passed: bool | None


def birkhoff_consistency(m: int) -> BirkhoffReport:
    """Implied B_m = V * m^(m-1) / binom(2(m-1), m-1) from the (m, 2, 1) system."""
    if m not in (2, 3):
        raise ValueError("m must be 2 or 3")
    from .lattice import canonical_a
    from .model import theorem_spec
    spec = theorem_spec(m, 2, 1)
    a = canonical_a(m, 2, 1)
    V = operational_volume(spec.system, a, spec.box)
    implied = V * Fraction(m ** (m - 1), math.comb(2 * (m - 1), m - 1))
    fib = fiber_volume(spec.system, a, spec.box) if m == 2 else None
    passed = None
    if m == 2:
        passed = implied.contains(Fraction(2)) or abs(implied.mid - 2) < mpmath.mpf(10) ** -9
    return BirkhoffReport(m, V, implied, fib, passed)
