"""Main-term predictions and their comparison with exact census data."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import mpmath

from . import config
from .census import CensusResult
from .constants import DEFAULT_NMAX, euler_product
from .intervals import NumericInterval
from .lattice import (GenerationCheck, check_generation, enumerate_slice, find_a, mu,
                      rank_of)
from .model import DivlabError, ProblemSpec, WeightTuple, format_fraction
from .volume import fiber_volume, operational_volume_report

GROWTH_TOLERANCE = 0.15


class IllConditionedFit(DivlabError):
    pass


@dataclass
class AsymptoticPrediction:
    fingerprint: str
    a: WeightTuple
    lam: Fraction
    kappa: int
    slice_size: int
    slice_rank: int
    balanced: bool
    generation: GenerationCheck | None
    euler: NumericInterval | None = None
    volume: NumericInterval | None = None
    volume_exact: Fraction | None = None
    fiber: object = None
    leading: NumericInterval | None = None
    flags: list[str] = field(default_factory=list)

    @property
    def degree_exact(self) -> bool:
        """True when the log-power is certified to equal kappa, not just bound it."""
        return self.balanced and self.generation is not None and self.generation.passed

    @property
    def degree(self) -> int:
        return self.kappa

    @property
    def downgraded(self) -> bool:
        return not self.degree_exact

    def main_term(self, H, secondary=None, prec: int = 120):
        """q H^lambda (log H)^kappa (+ secondary H^lambda), at the interval midpoint."""
        if self.leading is None:
            raise ValueError("prediction has no leading coefficient")
        with mpmath.workprec(prec):
            H = mpmath.mpf(H)
            power = H ** (mpmath.mpf(self.lam.numerator) / self.lam.denominator)
            value = self.leading.mid * power * mpmath.log(H) ** self.kappa
            if secondary is not None:
                value += mpmath.mpf(secondary) * power
            return value

    def to_document(self) -> dict:
        def iv(x):
            return None if x is None else x.to_document()
        return {
            "fingerprint": self.fingerprint,
            "a": [format_fraction(x) for x in self.a.a],
            "lambda": format_fraction(self.lam),
            "kappa": self.kappa,
            "degree": self.kappa,
            "degree_exact": self.degree_exact,
            "slice_size": self.slice_size,
            "slice_rank": self.slice_rank,
            "balanced": self.balanced,
            "generation": None if self.generation is None else self.generation.label,
            "euler_constant": iv(self.euler),
            "volume": iv(self.volume),
            "volume_exact": None if self.volume_exact is None else format_fraction(self.volume_exact),
            "fiber_volume": None if self.fiber is None else str(self.fiber),
            "leading_coefficient": iv(self.leading),
            "flags": list(self.flags),
        }


def predict(spec: ProblemSpec, a: WeightTuple | None = None, prime_cutoff: int | None = None,
            nmax: int = DEFAULT_NMAX, precision_bits: int | None = None,
            with_constant: bool = True, with_volume: bool = True,
            generation_depth: int = 4) -> AsymptoticPrediction:
    system, box = spec.system, spec.box
    if a is None:
        a = find_a(system, box)
    sl = enumerate_slice(system, a, 1)
    vecs = sl.vectors
    rk = rank_of(vecs)
    gen = check_generation(system, a, generation_depth)
    pred = AsymptoticPrediction(spec.fingerprint(), a, a.dot(box.b), len(vecs) - rk,
                                len(vecs), rk, spec.balanced, gen)
    if not spec.balanced:
        pred.flags.append("unbalanced: degree is only an upper bound")
    if not gen.passed:
        pred.flags.append(f"generation check failed ({gen.label}): degree is only an upper bound")
    if with_constant:
        pred.euler = euler_product(system, spec.restriction, a, config.prime_cutoff(prime_cutoff),
                                   nmax, config.precision_bits(precision_bits))
    if with_volume:
        rep = operational_volume_report(system, a, box)
        pred.volume = rep.interval
        pred.volume_exact = rep.exact
        if rep.lam != pred.lam:
            pred.flags.append(f"max of sum t over the down-set polytope is {rep.lam}, not {pred.lam}")
        try:
            pred.fiber = fiber_volume(system, a, box)
        except DivlabError:
            pred.fiber = None
    if pred.euler is not None and pred.volume is not None:
        vol = NumericInterval.point(pred.volume_exact, pred.euler.prec) if pred.volume_exact is not None \
            else pred.volume
        pred.leading = pred.euler * vol
    return pred


def degree_formula(m: int, k: int, ell: int) -> int:
    """binom(ell + m - 1, m - 1)^k - (m - 1) k - 1; ell = 1 gives m^k - (m - 1) k - 1."""
    if min(m, k, ell) < 1:
        raise ValueError("m, k, ell must be >= 1")
    return math.comb(ell + m - 1, m - 1) ** k - (m - 1) * k - 1


def tau_xi_degree_bound(xi: Sequence[int], k: int) -> int:
    counts: dict[int, int] = {}
    for x in xi:
        if x < 1:
            raise ValueError("xi must be positive integers")
        counts[x] = counts.get(x, 0) + 1
    return (sum(c ** k for c in counts.values()) - len(counts)
            - sum(k * max(0, c - 1) for c in counts.values()))


def trivial_bounds(spec: ProblemSpec):
    """(upper exponent min_t |b_t|, lower exponent mu / alpha, mu certificate)."""
    if not spec.balanced:
        raise ValueError("trivial bounds need a balanced spec")
    cert = mu(spec.system, spec.box)
    upper = min(spec.box.part_norms())
    return upper, Fraction(cert.mu, spec.box.alpha), cert


def sandwich_ok(spec: ProblemSpec, H: int, count: int, slack: float = 0.5) -> bool:
    """Loose check of the trivial bounds: the observed exponent log count / log H
    lies in [lower - slack, upper + slack].  Heavily log-affected at small H."""
    if H < 16:
        return count >= 1
    upper, lower, _ = trivial_bounds(spec)
    e = math.log(count) / math.log(H)
    return float(lower) - slack <= e <= float(upper) + slack


# ------------------------------------------------------------------ comparison

@dataclass
class ComparisonRow:
    H: int
    count: int
    main_term: object
    ratio: object


@dataclass
class ComparisonReport:
    rows: list[ComparisonRow]
    fitted: list            # coefficients c_0..c_kappa of count / H^lambda
    fitted_stderr: list
    residuals: list
    leading_interval: NumericInterval | None
    flags: dict = field(default_factory=dict)

    @property
    def fitted_leading(self):
        return self.fitted[-1]

    @property
    def final_ratio(self):
        return self.rows[-1].ratio

    def to_document(self) -> dict:
        return {
            "rows": [{"H": r.H, "count": str(r.count), "main_term": mpmath.nstr(r.main_term, 15),
                      "ratio": mpmath.nstr(r.ratio, 15)} for r in self.rows],
            "fitted": [mpmath.nstr(c, 15) for c in self.fitted],
            "fitted_stderr": [mpmath.nstr(c, 6) for c in self.fitted_stderr],
            "flags": {k: (v if isinstance(v, (bool, int, str)) or v is None else str(v))
                      for k, v in self.flags.items()},
        }


def _lstsq(rows: list[list], ys: list, prec: int):
    with mpmath.workprec(prec):
        X = mpmath.matrix(rows)
        y = mpmath.matrix(ys)
        n, p = X.rows, X.cols
        XtX = X.T * X
        coef = mpmath.lu_solve(XtX, X.T * y)
        res = y - X * coef
        residuals = [res[i] for i in range(n)]
        if n > p:
            sigma2 = mpmath.fsum(r * r for r in residuals) / (n - p)
            inv = mpmath.inverse(XtX)
            stderr = [mpmath.sqrt(abs(sigma2 * inv[j, j])) for j in range(p)]
        else:
            stderr = [mpmath.mpf(0)] * p
        return [coef[j] for j in range(p)], stderr, residuals


def fit_log_polynomial(heights: Sequence[int], counts: Sequence[int], lam: Fraction, kappa: int,
                       secondary=None, prec: int = 160):
    """Least squares for count / H^lambda on the basis (log H)^j, j <= kappa.

    A known secondary constant fixes the j = 0 coefficient; it is then
    subtracted and the fit runs over j = 1..kappa.
    """
    with mpmath.workprec(prec):
        lam_f = mpmath.mpf(lam.numerator) / lam.denominator
        first = 0 if secondary is None or kappa == 0 else 1
        X, ys = [], []
        for H, c in zip(heights, counts):
            L = mpmath.log(H)
            X.append([L ** j for j in range(first, kappa + 1)])
            y = mpmath.mpf(c) / mpmath.mpf(H) ** lam_f
            ys.append(y - mpmath.mpf(secondary) if first else y)
        coef, err, res = _lstsq(X, ys, prec)
        if first:
            coef, err = [mpmath.mpf(secondary)] + coef, [mpmath.mpf(0)] + err
        return coef, err, res


def compare(census: CensusResult, prediction: AsymptoticPrediction, secondary=None,
            strict: bool = False, prec: int = 160) -> ComparisonReport:
    if len(census) == 0:
        raise ValueError("census grid is empty")
    hs, cs = census.heights, census.counts
    flags = {}
    if max(hs) < 10 * min(hs):
        flags["ill_conditioned"] = True
        if strict:
            raise IllConditionedFit("grid spans less than one decade")
    rows = []
    with mpmath.workprec(prec):
        for H, c in zip(hs, cs):
            main = prediction.main_term(H, secondary, prec)
            rows.append(ComparisonRow(H, c, main, mpmath.mpf(c) / main))
        usable = [(H, c) for H, c in zip(hs, cs) if H >= 2]
        if len(usable) >= prediction.kappa + 1:
            coef, err, res = fit_log_polynomial([u[0] for u in usable], [u[1] for u in usable],
                                                prediction.lam, prediction.kappa, secondary, prec)
        else:
            coef, err, res = [mpmath.mpf("nan")] * (prediction.kappa + 1), [], []
            flags["fit_skipped"] = True
        devs = [abs(r.ratio - 1) for r in rows]
        flags["final_deviation"] = float(devs[-1])
        flags["deviation_shrinking"] = all(b <= a for a, b in zip(devs, devs[1:]))
        if prediction.leading is not None and err:
            lead = prediction.leading
            infl = 3 * err[-1]
            flags["fit_consistent"] = bool(lead.lo - infl <= coef[-1] <= lead.hi + infl)
    return ComparisonReport(rows, coef, err, res, prediction.leading, flags)


@dataclass(frozen=True)
class GrowthVerdict:
    applicable: bool
    exponent: float
    target: float
    kappa: int

    @property
    def label(self) -> str:
        return "applicable" if self.applicable else "not applicable"


def classify_growth(census: CensusResult, prediction, tolerance: float = GROWTH_TOLERANCE) -> GrowthVerdict:
    """Log-log slope of count / (log H)^kappa against log H over the top decade.

    ``prediction`` needs ``lam`` and ``kappa`` attributes.  The tolerance is
    a heuristic.
    """
    hs, cs = census.heights, census.counts
    top = max(hs)
    pts = [(H, c) for H, c in zip(hs, cs) if H >= max(3, top / 10) and c > 0]
    if len(pts) < 2:
        pts = [(H, c) for H, c in zip(hs, cs) if H >= 3 and c > 0]
    if len(pts) < 2:
        raise IllConditionedFit("need at least two heights >= 3")
    kappa = prediction.kappa
    xs = [math.log(H) for H, _ in pts]
    ys = [math.log(c) - kappa * math.log(math.log(H)) for H, c in pts]
    xm = sum(xs) / len(xs)
    ym = sum(ys) / len(ys)
    slope = sum((x - xm) * (y - ym) for x, y in zip(xs, ys)) / sum((x - xm) ** 2 for x in xs)
    target = float(prediction.lam)
    return GrowthVerdict(abs(slope - target) <= tolerance, slope, target, kappa)


@dataclass(frozen=True)
class GrowthTarget:
    lam: Fraction
    kappa: int
