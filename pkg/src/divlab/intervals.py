"""Outward-rounded interval arithmetic on mpmath floats."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import mpmath

DEFAULT_PRECISION = 80


def _mpf_down(x, prec):
    if isinstance(x, Fraction):
        return mpmath.fdiv(x.numerator, x.denominator, prec=prec, rounding="f")
    return mpmath.fadd(x, 0, prec=prec, rounding="f")


def _mpf_up(x, prec):
    if isinstance(x, Fraction):
        return mpmath.fdiv(x.numerator, x.denominator, prec=prec, rounding="c")
    return mpmath.fadd(x, 0, prec=prec, rounding="c")


def _radius(r, prec):
    """An mpf upper bound for |r|."""
    if isinstance(r, Fraction):
        return _mpf_up(abs(r), prec)
    if not isinstance(r, mpmath.mpf):
        r = mpmath.mpf(r)
    return mpmath.fneg(r, exact=True) if r < 0 else r


@dataclass(frozen=True)
class NumericInterval:
    lo: mpmath.mpf
    hi: mpmath.mpf
    prec: int = DEFAULT_PRECISION

    def __post_init__(self):
        if self.lo > self.hi:
            raise ValueError(f"empty interval [{self.lo}, {self.hi}]")

    @classmethod
    def point(cls, x, prec: int = DEFAULT_PRECISION) -> "NumericInterval":
        """Smallest representable interval containing an exact value."""
        if isinstance(x, int):
            x = Fraction(x)
        return cls(_mpf_down(x, prec), _mpf_up(x, prec), prec)

    @classmethod
    def around(cls, center, radius, prec: int = DEFAULT_PRECISION) -> "NumericInterval":
        c = _mpf_down(center, prec + 64) if not isinstance(center, Fraction) else center
        r = _radius(radius, prec)
        if isinstance(c, Fraction):
            lo = mpmath.fsub(_mpf_down(c, prec), r, prec=prec, rounding="f")
            hi = mpmath.fadd(_mpf_up(c, prec), r, prec=prec, rounding="c")
            return cls(lo, hi, prec)
        return cls(mpmath.fsub(c, r, prec=prec, rounding="f"),
                   mpmath.fadd(c, r, prec=prec, rounding="c"), prec)

    @classmethod
    def hull(cls, *values, prec: int = DEFAULT_PRECISION) -> "NumericInterval":
        lo = min(v.lo if isinstance(v, NumericInterval) else v for v in values)
        hi = max(v.hi if isinstance(v, NumericInterval) else v for v in values)
        return cls(_mpf_down(lo, prec), _mpf_up(hi, prec), prec)

    def _coerce(self, other) -> "NumericInterval":
        if isinstance(other, NumericInterval):
            return other
        if isinstance(other, (int, Fraction)):
            return NumericInterval.point(other, self.prec)
        return NumericInterval(other, other, self.prec)

    def _p(self, other):
        return max(self.prec, other.prec)

    def __add__(self, other):
        o = self._coerce(other)
        p = self._p(o)
        return NumericInterval(mpmath.fadd(self.lo, o.lo, prec=p, rounding="f"),
                               mpmath.fadd(self.hi, o.hi, prec=p, rounding="c"), p)

    __radd__ = __add__

    def __neg__(self):
        return NumericInterval(mpmath.fneg(self.hi, exact=True), mpmath.fneg(self.lo, exact=True), self.prec)

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return self._coerce(other) - self

    def __mul__(self, other):
        o = self._coerce(other)
        p = self._p(o)
        pairs = [(x, y) for x in (self.lo, self.hi) for y in (o.lo, o.hi)]
        lo = min(mpmath.fmul(x, y, prec=p, rounding="f") for x, y in pairs)
        hi = max(mpmath.fmul(x, y, prec=p, rounding="c") for x, y in pairs)
        return NumericInterval(lo, hi, p)

    __rmul__ = __mul__

    def __truediv__(self, other):
        o = self._coerce(other)
        if o.lo <= 0 <= o.hi:
            raise ZeroDivisionError("interval divisor contains zero")
        p = self._p(o)
        pairs = [(x, y) for x in (self.lo, self.hi) for y in (o.lo, o.hi)]
        lo = min(mpmath.fdiv(x, y, prec=p, rounding="f") for x, y in pairs)
        hi = max(mpmath.fdiv(x, y, prec=p, rounding="c") for x, y in pairs)
        return NumericInterval(lo, hi, p)

    def __rtruediv__(self, other):
        return self._coerce(other) / self

    def widen(self, radius) -> "NumericInterval":
        r = _radius(radius, self.prec)
        return NumericInterval(mpmath.fsub(self.lo, r, prec=self.prec, rounding="f"),
                               mpmath.fadd(self.hi, r, prec=self.prec, rounding="c"), self.prec)

    def exp(self) -> "NumericInterval":
        # exp is monotone; pad by a few ulps to cover mpmath's (correct) rounding
        with mpmath.workprec(self.prec + 10):
            lo, hi = mpmath.exp(self.lo), mpmath.exp(self.hi)
        pad = mpmath.ldexp(1, -self.prec + 2)
        return NumericInterval(_mpf_down(lo * (1 - pad), self.prec), _mpf_up(hi * (1 + pad), self.prec), self.prec)

    def intersect(self, other: "NumericInterval") -> "NumericInterval | None":
        lo, hi = max(self.lo, other.lo), min(self.hi, other.hi)
        return NumericInterval(lo, hi, self._p(other)) if lo <= hi else None

    @property
    def width(self):
        return self.hi - self.lo

    @property
    def mid(self):
        return (self.lo + self.hi) / 2

    def contains(self, x) -> bool:
        if isinstance(x, NumericInterval):
            return self.lo <= x.lo and x.hi <= self.hi
        if isinstance(x, Fraction):
            return self.lo * x.denominator <= x.numerator <= self.hi * x.denominator
        return self.lo <= x <= self.hi

    __contains__ = contains

    def overlaps(self, other: "NumericInterval") -> bool:
        return self.intersect(other) is not None

    def __float__(self):
        return float(self.mid)

    def to_strings(self, digits: int | None = None) -> tuple[str, str]:
        # enough digits that parsing back at self.prec recovers the same floats
        if digits is None:
            digits = int(self.prec * 0.30103) + 3
        return (mpmath.nstr(self.lo, digits, strip_zeros=False),
                mpmath.nstr(self.hi, digits, strip_zeros=False))

    def to_document(self) -> dict:
        lo, hi = self.to_strings()
        return {"lo": lo, "hi": hi, "width": mpmath.nstr(self.width, 5), "prec": self.prec}

    @classmethod
    def from_document(cls, doc: dict) -> "NumericInterval":
        prec = int(doc.get("prec", DEFAULT_PRECISION))
        with mpmath.workprec(prec):
            return cls(mpmath.mpf(doc["lo"]), mpmath.mpf(doc["hi"]), prec)

    def __repr__(self):
        lo, hi = self.to_strings(17)
        return f"[{lo}, {hi}]"
