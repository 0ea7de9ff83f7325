"""Exact rational vocabulary: interval sets, boxes and linear programs.

Every scalar is a :class:`fractions.Fraction`.  Interval indices are 0-based
throughout the library; the text formats below use 1-based variable names.
"""

from __future__ import annotations

import random
import re
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

__all__ = [
    "DomainError",
    "MalformedRational",
    "OrderViolation",
    "MissingEndpoint",
    "OutOfUnitRange",
    "DeltaTooLarge",
    "DimensionMismatch",
    "MalformedProgram",
    "as_rational",
    "IntervalSet",
    "UNIT",
    "Box",
    "LinearProgram",
    "parse_interval_set",
    "format_interval_set",
    "parse_lp",
    "format_lp",
    "measure",
    "locate",
    "shrink",
    "random_interval_set",
]


class DomainError(ValueError):
    """Base class for malformed domain values."""


class MalformedRational(DomainError):
    pass


class OrderViolation(DomainError):
    pass


class MissingEndpoint(DomainError):
    pass


class OutOfUnitRange(DomainError):
    pass


class DeltaTooLarge(DomainError):
    pass


class DimensionMismatch(DomainError):
    pass


class MalformedProgram(DomainError):
    pass


_RATIONAL_RE = re.compile(r"^[+-]?\d+(/\d+)?$")


def as_rational(value) -> Fraction:
    """Coerce ints, Fractions and ``p/q`` strings to a Fraction.

    Floats are rejected: they would silently smuggle binary rounding into
    an exact computation.
    """
    if isinstance(value, bool):
        raise MalformedRational(f"not a rational: {value!r}")
    if isinstance(value, Fraction):
        return value
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        text = value.strip()
        if not _RATIONAL_RE.match(text):
            raise MalformedRational(f"not a rational: {value!r}")
        try:
            return Fraction(text)
        except ZeroDivisionError:
            raise MalformedRational(f"zero denominator: {value!r}") from None
    if hasattr(value, "numerator") and hasattr(value, "denominator") and not isinstance(value, float):
        return Fraction(int(value.numerator), int(value.denominator))
    raise MalformedRational(f"not a rational: {value!r}")


@dataclass(frozen=True)
class IntervalSet:
    """A finite union of closed intervals ``[c_i, d_i]`` covering 0 and 1.

    Endpoints satisfy ``0 = c_0 < d_0 < c_1 < ... < c_{k-1} < d_{k-1} = 1``.
    The single interval ``[0, 1]`` is the only one-interval set allowed.
    """

    intervals: tuple[tuple[Fraction, Fraction], ...]

    def __post_init__(self):
        ivs = tuple((as_rational(c), as_rational(d)) for c, d in self.intervals)
        object.__setattr__(self, "intervals", ivs)
        if not ivs:
            raise MissingEndpoint("an interval set needs at least one interval")
        if ivs[0][0] != 0 or ivs[-1][1] != 1:
            raise MissingEndpoint("first interval must start at 0 and last must end at 1")
        flat = [v for iv in ivs for v in iv]
        if any(a >= b for a, b in zip(flat, flat[1:])):
            raise OrderViolation(f"endpoints not strictly increasing: {format_interval_set(self)}")

    @classmethod
    def of(cls, *pairs) -> "IntervalSet":
        return cls(tuple((as_rational(c), as_rational(d)) for c, d in pairs))

    @property
    def k(self) -> int:
        return len(self.intervals)

    @property
    def lows(self) -> list[Fraction]:
        return [c for c, _ in self.intervals]

    @property
    def highs(self) -> list[Fraction]:
        return [d for _, d in self.intervals]

    def measure(self) -> Fraction:
        return sum((d - c for c, d in self.intervals), Fraction(0))

    def gaps(self) -> list[Fraction]:
        return [self.intervals[i + 1][0] - self.intervals[i][1] for i in range(self.k - 1)]

    def lengths(self) -> list[Fraction]:
        return [d - c for c, d in self.intervals]

    def __contains__(self, v) -> bool:
        v = as_rational(v)
        return 0 <= v <= 1 and locate(self, v) is not None

    def __str__(self) -> str:
        return format_interval_set(self)


UNIT = IntervalSet(((Fraction(0), Fraction(1)),))


def _fmt(q: Fraction) -> str:
    return str(q)


def format_interval_set(E: IntervalSet) -> str:
    return ";".join(f"{_fmt(c)},{_fmt(d)}" for c, d in E.intervals)


def parse_interval_set(text: str) -> IntervalSet:
    """Parse ``c1,d1;c2,d2;...`` into a validated IntervalSet."""
    pairs = []
    for chunk in text.strip().split(";"):
        parts = chunk.split(",")
        if len(parts) != 2:
            raise MalformedRational(f"expected 'c,d', got {chunk!r}")
        pairs.append((as_rational(parts[0]), as_rational(parts[1])))
    return IntervalSet(tuple(pairs))


def random_interval_set(rng: random.Random, max_k: int = 5, max_den: int = 50) -> IntervalSet:
    """Random valid set with at most ``max_k`` intervals on the grid ``1/den``, ``den <= max_den``."""
    k = rng.randint(1, max_k)
    if k == 1:
        return UNIT
    den = rng.randint(2 * k - 1, max_den)
    cuts = sorted(rng.sample(range(1, den), 2 * k - 2))
    pts = [Fraction(0)] + [Fraction(v, den) for v in cuts] + [Fraction(1)]
    return IntervalSet(tuple((pts[2 * i], pts[2 * i + 1]) for i in range(k)))


def measure(E: IntervalSet) -> Fraction:
    return E.measure()


def locate(E: IntervalSet, v) -> int | None:
    """Index of the interval containing ``v``, or None if ``v`` is in a gap."""
    v = as_rational(v)
    if not 0 <= v <= 1:
        raise OutOfUnitRange(f"{v} is outside [0, 1]")
    # intervals are disjoint and closed, so at most one match
    for i, (c, d) in enumerate(E.intervals):
        if c <= v <= d:
            return i
        if v < c:
            return None
    return None


def shrink(E: IntervalSet, delta) -> IntervalSet:
    """Pull every interior endpoint inward by ``delta``; 0 and 1 stay put."""
    delta = as_rational(delta)
    if delta < 0:
        raise DeltaTooLarge("delta must be nonnegative")
    if delta == 0:
        return E
    k = E.k
    limits = [length / 2 for length in E.gaps()]
    limits += [length / 2 for length in E.lengths()]
    if k > 1 and delta >= min(limits):
        raise DeltaTooLarge(f"delta={delta} must be below half the smallest interval and gap")
    out = []
    for i, (c, d) in enumerate(E.intervals):
        out.append((c + delta if i > 0 else c, d - delta if i < k - 1 else d))
    return IntervalSet(tuple(out))


@dataclass(frozen=True)
class Box:
    """Per-variable closed bounds inside the unit cube."""

    lo: tuple[Fraction, ...]
    hi: tuple[Fraction, ...]

    def __post_init__(self):
        lo = tuple(as_rational(v) for v in self.lo)
        hi = tuple(as_rational(v) for v in self.hi)
        if len(lo) != len(hi):
            raise DimensionMismatch("lo and hi differ in length")
        for a, b in zip(lo, hi):
            if not (0 <= a <= b <= 1):
                raise OutOfUnitRange(f"bad box side [{a}, {b}]")
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)

    @classmethod
    def unit(cls, n: int) -> "Box":
        return cls((Fraction(0),) * n, (Fraction(1),) * n)

    @classmethod
    def from_sigma(cls, var_sets: Sequence[IntervalSet], sigma: Sequence[int]) -> "Box":
        lo, hi = [], []
        for E, s in zip(var_sets, sigma):
            c, d = E.intervals[s]
            lo.append(c)
            hi.append(d)
        return cls(tuple(lo), tuple(hi))

    def __len__(self):
        return len(self.lo)

    def contains(self, y: Sequence[Fraction]) -> bool:
        return len(y) == len(self.lo) and all(a <= v <= b for a, v, b in zip(self.lo, y, self.hi))


Row = tuple[Mapping[int, Fraction], Fraction]


@dataclass(frozen=True)
class LinearProgram:
    """The system ``A x <= b`` over the implicit box ``0 <= x <= 1``.

    ``rows`` holds ``(coefficients, rhs)`` pairs with sparse 0-based
    coefficient dicts.  ``var_sets`` gives each variable its own IntervalSet.
    """

    n: int
    rows: tuple[tuple[dict, Fraction], ...] = ()
    var_sets: tuple[IntervalSet, ...] = field(default=None)

    def __post_init__(self):
        if self.n < 0:
            raise DimensionMismatch("negative variable count")
        rows = []
        for coeffs, rhs in self.rows:
            if not isinstance(coeffs, Mapping):
                coeffs = dict(enumerate(coeffs))
            clean = {}
            for j, a in coeffs.items():
                if not 0 <= j < self.n:
                    raise DimensionMismatch(f"variable index {j} out of range for n={self.n}")
                a = as_rational(a)
                if a:
                    clean[j] = clean.get(j, Fraction(0)) + a
            rows.append(({j: a for j, a in sorted(clean.items()) if a}, as_rational(rhs)))
        object.__setattr__(self, "rows", tuple(rows))
        sets = self.var_sets
        if sets is None:
            sets = (UNIT,) * self.n
        elif isinstance(sets, IntervalSet):
            sets = (sets,) * self.n
        sets = tuple(sets)
        if len(sets) != self.n:
            raise DimensionMismatch(f"{len(sets)} interval sets for {self.n} variables")
        object.__setattr__(self, "var_sets", sets)

    @property
    def m(self) -> int:
        return len(self.rows)

    def with_sets(self, var_sets) -> "LinearProgram":
        return LinearProgram(self.n, self.rows, var_sets)

    def add_rows(self, rows: Iterable) -> "LinearProgram":
        return LinearProgram(self.n, self.rows + tuple(rows), self.var_sets)

    def dense(self) -> list[list[Fraction]]:
        out = []
        for coeffs, _ in self.rows:
            row = [Fraction(0)] * self.n
            for j, a in coeffs.items():
                row[j] = a
            out.append(row)
        return out

    def rhs(self) -> list[Fraction]:
        return [b for _, b in self.rows]

    def satisfied_by(self, y: Sequence) -> bool:
        """Exact check of ``A y <= b`` and ``0 <= y <= 1``."""
        if len(y) != self.n:
            raise DimensionMismatch(f"point of length {len(y)} for n={self.n}")
        if any(not 0 <= v <= 1 for v in y):
            return False
        return all(sum((a * y[j] for j, a in coeffs.items()), Fraction(0)) <= b for coeffs, b in self.rows)

    def in_sets(self, y: Sequence) -> bool:
        return all(v in E for v, E in zip(y, self.var_sets))


_TERM_RE = re.compile(r"^(?:([+-]?\d+(?:/\d+)?)\*)?([+-]?)x(\d+)$")


def parse_lp(text: str, var_sets=None) -> LinearProgram:
    """Read the ``lp <n> <m>`` text format (rows ``rhs : coeff*x<i> ...``)."""
    header = None
    rows = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if header is None:
            parts = line.split()
            if len(parts) != 3 or parts[0] != "lp":
                raise MalformedProgram(f"line {lineno}: expected 'lp <n> <m>' header")
            try:
                header = (int(parts[1]), int(parts[2]))
            except ValueError:
                raise MalformedProgram(f"line {lineno}: bad header counts") from None
            continue
        if ":" not in line:
            raise MalformedProgram(f"line {lineno}: expected '<rhs> : <terms>'")
        lhs, _, terms = line.partition(":")
        try:
            rhs = as_rational(lhs)
        except MalformedRational as exc:
            raise MalformedProgram(f"line {lineno}: {exc}") from None
        coeffs: dict[int, Fraction] = {}
        for tok in terms.split():
            m = _TERM_RE.match(tok)
            if not m:
                raise MalformedProgram(f"line {lineno}: bad term {tok!r}")
            coef = Fraction(m.group(1)) if m.group(1) else Fraction(1)
            if m.group(2) == "-":
                coef = -coef
            idx = int(m.group(3))
            if not 1 <= idx <= header[0]:
                raise MalformedProgram(f"line {lineno}: variable x{idx} out of range")
            coeffs[idx - 1] = coeffs.get(idx - 1, Fraction(0)) + coef
        rows.append((coeffs, rhs))
    if header is None:
        raise MalformedProgram("missing 'lp <n> <m>' header")
    if len(rows) != header[1]:
        raise MalformedProgram(f"header promises {header[1]} rows, found {len(rows)}")
    return LinearProgram(header[0], tuple(rows), var_sets)


def format_lp(lp: LinearProgram) -> str:
    lines = [f"lp {lp.n} {lp.m}"]
    for coeffs, rhs in lp.rows:
        terms = " ".join(f"{a}*x{j + 1}" for j, a in coeffs.items())
        lines.append(f"{rhs} : {terms}".rstrip())
    return "\n".join(lines) + "\n"
