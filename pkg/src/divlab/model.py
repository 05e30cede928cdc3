"""Shared domain types for multiplicative Diophantine systems.

Every vector indexed by the coordinate set {(i, j)} is stored flat, in
row-major order: all coordinates of part 1, then part 2, and so on.  Exact
quantities are ``int`` or ``fractions.Fraction``; floats never appear here.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from fractions import Fraction
from math import lcm
from typing import Iterable, Iterator, Mapping, Sequence


class DivlabError(Exception):
    """Base class for all errors raised by the package."""


class ValidationError(DivlabError):
    pass


class ParseError(DivlabError):
    def __init__(self, message: str, location: str = "$"):
        super().__init__(f"{location}: {message}")
        self.location = location


class Rejected(ValidationError):
    """A restriction rule violates zero-membership or additive closure."""


def to_fraction(value, location: str = "$") -> Fraction:
    """Parse an exact rational from an int or a ``"p/q"`` / decimal string."""
    if isinstance(value, bool):
        raise ParseError("expected a rational, got a boolean", location)
    if isinstance(value, (int, Fraction)):
        return Fraction(value)
    if isinstance(value, str):
        try:
            return Fraction(value.strip())
        except (ValueError, ZeroDivisionError) as exc:
            raise ParseError(f"cannot parse rational {value!r}", location) from exc
    if isinstance(value, float):
        raise ParseError("floats are not accepted; write rationals as strings like '1/2'", location)
    raise ParseError(f"expected a rational, got {type(value).__name__}", location)


def format_fraction(x: Fraction) -> str:
    return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"


@dataclass(frozen=True)
class Shape:
    parts: tuple[int, ...]

    def __post_init__(self):
        if len(self.parts) < 1:
            raise ValidationError("a shape needs at least one part")
        if any(int(m) != m or m < 1 for m in self.parts):
            raise ValidationError(f"part sizes must be positive integers, got {self.parts}")

    @property
    def k(self) -> int:
        return len(self.parts)

    @property
    def size(self) -> int:
        return sum(self.parts)

    def offsets(self) -> list[int]:
        out, acc = [], 0
        for m in self.parts:
            out.append(acc)
            acc += m
        return out

    def part_ranges(self) -> list[range]:
        return [range(o, o + m) for o, m in zip(self.offsets(), self.parts)]

    def indices(self) -> list[tuple[int, int]]:
        """The coordinate set as 1-based (i, j) pairs in canonical order."""
        return [(i + 1, j + 1) for i, m in enumerate(self.parts) for j in range(m)]

    def flat_index(self, i: int, j: int) -> int:
        """Flat position of the 1-based coordinate (i, j)."""
        if not (1 <= i <= self.k and 1 <= j <= self.parts[i - 1]):
            raise ValidationError(f"coordinate ({i},{j}) outside shape {self.parts}")
        return self.offsets()[i - 1] + j - 1

    def split(self, vec: Sequence) -> list[tuple]:
        return [tuple(vec[r.start:r.stop]) for r in self.part_ranges()]


def _check_length(shape: Shape, values: Sequence, what: str):
    if len(values) != shape.size:
        raise ValidationError(f"{what} has {len(values)} entries, shape needs {shape.size}")


@dataclass(frozen=True)
class ExponentSystem:
    shape: Shape
    gamma: tuple[int, ...]

    def __post_init__(self):
        _check_length(self.shape, self.gamma, "gamma")
        for g in self.gamma:
            if isinstance(g, bool) or int(g) != g or g < 1:
                raise ValidationError(f"every gamma entry must be an integer >= 1, got {g!r}")

    @classmethod
    def from_parts(cls, parts: Iterable[Sequence[int]]) -> "ExponentSystem":
        parts = [tuple(p) for p in parts]
        return cls(Shape(tuple(len(p) for p in parts)), tuple(g for p in parts for g in p))

    def parts(self) -> list[tuple[int, ...]]:
        return self.shape.split(self.gamma)

    def part_values(self, r: Sequence[int]) -> list[int]:
        """The k inner products <gamma_i, r_i>."""
        return [sum(g * x for g, x in zip(gp, rp))
                for gp, rp in zip(self.parts(), self.shape.split(r))]

    def contains(self, r: Sequence[int]) -> bool:
        if len(r) != self.shape.size or any(x < 0 for x in r):
            return False
        vals = self.part_values(r)
        return all(v == vals[0] for v in vals)

    @property
    def lcm(self) -> int:
        return lcm(*self.gamma)


@dataclass(frozen=True)
class BoxExponents:
    shape: Shape
    b: tuple[Fraction, ...]

    def __post_init__(self):
        _check_length(self.shape, self.b, "b")
        object.__setattr__(self, "b", tuple(Fraction(x) for x in self.b))
        if any(x <= 0 for x in self.b):
            raise ValidationError("every box exponent must be > 0")

    def part_norms(self) -> list[Fraction]:
        return [sum(p, Fraction(0)) for p in self.shape.split(self.b)]

    @property
    def alpha(self) -> int:
        """Least common multiple of the denominators."""
        return lcm(*(x.denominator for x in self.b))


@dataclass(frozen=True)
class WeightTuple:
    shape: Shape
    a: tuple[Fraction, ...]

    def __post_init__(self):
        _check_length(self.shape, self.a, "a")
        object.__setattr__(self, "a", tuple(Fraction(x) for x in self.a))
        if any(x <= 0 for x in self.a):
            raise ValidationError("weights must be strictly positive")

    def dot(self, r: Sequence) -> Fraction:
        return sum((x * y for x, y in zip(self.a, r)), Fraction(0))

    def __str__(self):
        return " + ".join("(" + ",".join(format_fraction(x) for x in p) + ")"
                          for p in self.shape.split(self.a))


@dataclass(frozen=True, order=True)
class ExponentVector:
    r: tuple[int, ...]
    value: int = field(compare=False, default=-1)

    @classmethod
    def of(cls, system: ExponentSystem, r: Sequence[int]) -> "ExponentVector":
        r = tuple(int(x) for x in r)
        if not system.contains(r):
            raise ValidationError(f"{r} is not a solution of the additive system")
        return cls(r, system.part_values(r)[0])

    def __iter__(self) -> Iterator[int]:
        return iter(self.r)

    def __len__(self):
        return len(self.r)

    def __getitem__(self, item):
        return self.r[item]


def canonical_order(vectors: Iterable[Sequence[int]]) -> list[tuple[int, ...]]:
    """Canonical vector order: descending lexicographic."""
    return sorted({tuple(v) for v in vectors}, reverse=True)


# ---------------------------------------------------------------- restrictions

@dataclass(frozen=True)
class AllowedSet:
    """Exponent patterns allowed at one prime.

    ``kind`` is ``"all"``, ``"zero"`` (the listed flat coordinates must have
    exponent 0; all coordinates when ``coords`` is None) or ``"exclude"``
    (everything except the finite set ``vectors``).
    """
    kind: str
    coords: tuple[int, ...] | None = None
    vectors: frozenset = frozenset()

    def allows(self, r: Sequence[int]) -> bool:
        if self.kind == "all":
            return True
        if self.kind == "zero":
            idx = range(len(r)) if self.coords is None else self.coords
            return all(r[c] == 0 for c in idx)
        return tuple(r) not in self.vectors

    def zero_coords(self, size: int) -> tuple[int, ...]:
        if self.kind != "zero":
            return ()
        return tuple(range(size)) if self.coords is None else self.coords


ALL = AllowedSet("all")


@dataclass(frozen=True)
class RestrictionSpec:
    """Per-prime allowed-exponent rules; unlisted primes allow everything."""
    rules: tuple[tuple[int, AllowedSet], ...] = ()

    @classmethod
    def coprime_to(cls, q: int) -> "RestrictionSpec":
        return cls(tuple((p, AllowedSet("zero")) for p in prime_factors(q)))

    def rule(self, p: int) -> AllowedSet:
        for prime, rule in self.rules:
            if prime == p:
                return rule
        return ALL

    @property
    def primes(self) -> list[int]:
        return sorted(p for p, rule in self.rules if rule.kind != "all")

    @property
    def is_trivial(self) -> bool:
        return not self.primes

    @property
    def separable(self) -> bool:
        """True when the indicator factors over coordinates (no exclude rules)."""
        return all(rule.kind != "exclude" for _, rule in self.rules)

    def psi(self, x: Sequence[int]) -> bool:
        """Indicator of the restricted set on a tuple of positive integers."""
        for p, rule in self.rules:
            if rule.kind == "all":
                continue
            if not rule.allows([valuation(v, p) for v in x]):
                return False
        return True


def prime_factors(n: int) -> list[int]:
    out, d = [], 2
    while d * d <= n:
        if n % d == 0:
            out.append(d)
            while n % d == 0:
                n //= d
        d += 1
    if n > 1:
        out.append(n)
    return out


def is_prime(n: int) -> bool:
    return n >= 2 and prime_factors(n) == [n]


def valuation(n: int, p: int) -> int:
    e = 0
    while n % p == 0:
        n //= p
        e += 1
    return e


@dataclass
class ValidationReport:
    accepted: bool
    reasons: list[str] = field(default_factory=list)

    def __bool__(self):
        return self.accepted


def validate_restriction(spec: RestrictionSpec, size: int | None = None) -> ValidationReport:
    """Check that every local rule contains 0 and is closed under addition.

    Zero-coordinate rules are monoids by construction.  For a finite
    complement the check is finite: the complement is closed iff no excluded
    vector splits as u + v with u, v both allowed.
    """
    reasons = []
    seen = set()
    for p, rule in spec.rules:
        if not isinstance(p, int) or not is_prime(p):
            reasons.append(f"rule key {p!r} is not a prime")
            continue
        if p in seen:
            reasons.append(f"prime {p} listed twice")
        seen.add(p)
        if rule.kind == "zero":
            if size is not None and rule.coords is not None:
                bad = [c for c in rule.coords if not 0 <= c < size]
                if bad:
                    reasons.append(f"p={p}: coordinates {bad} outside the shape")
        elif rule.kind == "exclude":
            excluded = rule.vectors
            if size is not None and any(len(v) != size for v in excluded):
                reasons.append(f"p={p}: excluded vector of wrong length")
                continue
            if any(all(x == 0 for x in v) for v in excluded):
                reasons.append(f"p={p}: allowed set lacks the zero vector")
                continue
            if any(x < 0 for v in excluded for x in v):
                reasons.append(f"p={p}: excluded vectors must be nonnegative")
                continue
            for v in excluded:
                broken = _split_outside(v, excluded)
                if broken is not None:
                    reasons.append(f"p={p}: {v} = {broken[0]} + {broken[1]} breaks additive closure")
                    break
        elif rule.kind != "all":
            reasons.append(f"p={p}: unknown rule kind {rule.kind!r}")
    return ValidationReport(not reasons, reasons)


def _split_outside(v, excluded):
    from itertools import product
    for u in product(*(range(x + 1) for x in v)):
        w = tuple(x - y for x, y in zip(v, u))
        if any(u) and any(w) and u not in excluded and w not in excluded:
            return u, w
    return None


# ---------------------------------------------------------------- problem spec

@dataclass(frozen=True)
class ProblemSpec:
    system: ExponentSystem
    box: BoxExponents
    restriction: RestrictionSpec = RestrictionSpec()
    name: str = ""

    def __post_init__(self):
        if self.system.shape != self.box.shape:
            raise ValidationError("gamma and b disagree on the shape")
        report = validate_restriction(self.restriction, self.shape.size)
        if not report:
            raise Rejected("; ".join(report.reasons))

    @property
    def shape(self) -> Shape:
        return self.system.shape

    def part_inner_products(self) -> list[Fraction]:
        """The k exact values <gamma_i, b_i>."""
        return [sum((g * x for g, x in zip(gp, bp)), Fraction(0))
                for gp, bp in zip(self.system.parts(), self.shape.split(self.box.b))]

    @property
    def balanced(self) -> bool:
        vals = self.part_inner_products()
        return all(v == vals[0] for v in vals)

    @property
    def N(self) -> Fraction | None:
        return self.part_inner_products()[0] if self.balanced else None

    def to_document(self) -> dict:
        doc = {
            "parts": [{"gamma": list(g), "b": [format_fraction(x) for x in bp]}
                      for g, bp in zip(self.system.parts(), self.shape.split(self.box.b))],
            "restriction": [_rule_to_doc(p, rule, self.shape) for p, rule in self.restriction.rules],
            "balanced": self.balanced,
        }
        if self.name:
            doc["name"] = self.name
        return doc

    def fingerprint(self) -> str:
        doc = self.to_document()
        doc.pop("name", None)
        blob = json.dumps(doc, sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()[:16]


def _rule_to_doc(p: int, rule: AllowedSet, shape: Shape) -> dict:
    idx = shape.indices()
    if rule.kind == "all":
        return {"p": p, "rule": "all"}
    if rule.kind == "zero":
        doc = {"p": p, "rule": "coprime"}
        if rule.coords is not None:
            doc["coords"] = [list(idx[c]) for c in rule.coords]
        return doc
    return {"p": p, "rule": "exclude", "vectors": [list(v) for v in sorted(rule.vectors)]}


def serialize_problem(spec: ProblemSpec) -> str:
    return json.dumps(spec.to_document(), indent=2)


_UNSUPPORTED_RULES = {"friable", "smooth", "piatetski-shapiro", "beatty"}


def _parse_rule(doc, shape: Shape, loc: str) -> tuple[int, AllowedSet]:
    if not isinstance(doc, Mapping):
        raise ParseError("restriction entry must be an object", loc)
    kind = doc.get("rule")
    if kind in _UNSUPPORTED_RULES or doc.get("p") in ("*", "all"):
        raise Rejected(f"{loc}: rules over infinitely many primes are not supported")
    p = doc.get("p")
    if isinstance(p, bool) or not isinstance(p, int):
        raise ParseError("'p' must be an integer prime", loc + ".p")
    if kind == "all":
        return p, ALL
    if kind == "coprime":
        coords = doc.get("coords")
        if coords is None:
            return p, AllowedSet("zero")
        flat = []
        for n, c in enumerate(coords):
            if not (isinstance(c, list) and len(c) == 2 and all(isinstance(t, int) for t in c)):
                raise ParseError("coordinate must be a pair [i, j]", f"{loc}.coords[{n}]")
            try:
                flat.append(shape.flat_index(*c))
            except ValidationError as exc:
                raise ParseError(str(exc), f"{loc}.coords[{n}]") from exc
        return p, AllowedSet("zero", tuple(sorted(set(flat))))
    if kind == "exclude":
        vecs = doc.get("vectors")
        if not isinstance(vecs, list):
            raise ParseError("'vectors' must be a list", loc + ".vectors")
        out = []
        for n, v in enumerate(vecs):
            if not (isinstance(v, list) and all(isinstance(t, int) and not isinstance(t, bool) for t in v)):
                raise ParseError("excluded vector must be a list of integers", f"{loc}.vectors[{n}]")
            out.append(tuple(v))
        return p, AllowedSet("exclude", vectors=frozenset(out))
    raise ParseError(f"unknown rule {kind!r}", loc + ".rule")


def parse_problem(document) -> ProblemSpec:
    """Build a validated ProblemSpec from a JSON string or decoded document."""
    if isinstance(document, (str, bytes)):
        try:
            document = json.loads(document)
        except json.JSONDecodeError as exc:
            raise ParseError(f"invalid JSON: {exc.msg}", f"line {exc.lineno} col {exc.colno}") from exc
    if not isinstance(document, Mapping):
        raise ParseError("problem document must be a JSON object")
    parts = document.get("parts")
    if not isinstance(parts, list) or not parts:
        raise ParseError("'parts' must be a nonempty list", "$.parts")
    gammas, bs = [], []
    for i, part in enumerate(parts):
        loc = f"$.parts[{i}]"
        if not isinstance(part, Mapping):
            raise ParseError("part must be an object", loc)
        g, b = part.get("gamma"), part.get("b")
        if not isinstance(g, list) or not g:
            raise ParseError("'gamma' must be a nonempty list", loc + ".gamma")
        for j, x in enumerate(g):
            if isinstance(x, bool) or not isinstance(x, int):
                raise ParseError("gamma entries must be integers", f"{loc}.gamma[{j}]")
            if x < 1:
                raise ValidationError(f"{loc}.gamma[{j}]: gamma entries must be >= 1, got {x}")
        if b is None:
            b = ["1"] * len(g)
        if not isinstance(b, list) or len(b) != len(g):
            raise ParseError("'b' must be a list as long as 'gamma'", loc + ".b")
        gammas.append(tuple(g))
        bs.extend(to_fraction(x, f"{loc}.b[{j}]") for j, x in enumerate(b))
    system = ExponentSystem.from_parts(gammas)
    try:
        box = BoxExponents(system.shape, tuple(bs))
    except ValidationError as exc:
        raise ValidationError(f"$.parts: {exc}") from exc
    raw_rules = document.get("restriction", [])
    if not isinstance(raw_rules, list):
        raise ParseError("'restriction' must be a list", "$.restriction")
    rules = tuple(_parse_rule(r, system.shape, f"$.restriction[{n}]") for n, r in enumerate(raw_rules))
    spec = ProblemSpec(system, box, RestrictionSpec(rules), name=str(document.get("name", "")))
    claimed = document.get("balanced")
    if claimed is not None and bool(claimed) != spec.balanced:
        raise ValidationError(f"$.balanced: document claims {claimed} but inner products are "
                              f"{[format_fraction(v) for v in spec.part_inner_products()]}")
    return spec


def theorem_spec(m: int, k: int, ell: int, c: Sequence | None = None) -> ProblemSpec:
    """The (k+1)-part system whose energy equals M_{m,k,ell}(H^c).

    gamma = 1_m + ... + 1_m + (ell), b = c + ... + c + (|c|/ell).
    """
    c = tuple(Fraction(x) for x in (c if c is not None else [1] * m))
    if len(c) != m:
        raise ValidationError("c must have m entries")
    system = ExponentSystem.from_parts([[1] * m] * k + [[ell]])
    box = BoxExponents(system.shape, c * k + (sum(c) / ell,))
    return ProblemSpec(system, box, name=f"M_{m},{k},{ell}")


def energy_spec(gamma_parts: Sequence[Sequence[int]], b_parts: Sequence[Sequence] | None = None,
                restriction: RestrictionSpec = RestrictionSpec(), name: str = "") -> ProblemSpec:
    system = ExponentSystem.from_parts(gamma_parts)
    if b_parts is None:
        b = (Fraction(1),) * system.shape.size
    else:
        b = tuple(Fraction(x) for p in b_parts for x in p)
    return ProblemSpec(system, BoxExponents(system.shape, b), restriction, name)
