"""Rational parsing/formatting and a small outward-rounded interval type."""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from numbers import Rational

from .errors import SchemaError

Number = "Fraction | float"


def parse_rational(text) -> Fraction:
    """Parse ``"p/q"``, ``"p"`` or an int into a Fraction.

    Floats are rejected: every exact quantity travels as a string.
    """
    if isinstance(text, bool):
        raise SchemaError(f"not a rational: {text!r}")
    if isinstance(text, int):
        return Fraction(text)
    if not isinstance(text, str):
        raise SchemaError(f"rational must be a 'p/q' string, got {text!r}")
    try:
        return Fraction(text.strip())
    except (ValueError, ZeroDivisionError) as exc:
        raise SchemaError(f"not a rational: {text!r}") from exc


def format_rational(q) -> str:
    q = Fraction(q)
    if q.denominator == 1:
        return str(q.numerator)
    return f"{q.numerator}/{q.denominator}"


def format_float(x: float) -> str:
    return format(float(x), ".17g")


def format_number(x) -> str:
    """Rationals as ``"p/q"``, floats with 17 significant digits."""
    if isinstance(x, Rational):
        return format_rational(x)
    return format_float(x)


def parse_number(text):
    """Inverse of `format_number`; a decimal point or exponent means float."""
    if isinstance(text, (int, Fraction)):
        return Fraction(text)
    if isinstance(text, float):
        return text
    if not isinstance(text, str):
        raise SchemaError(f"not a number: {text!r}")
    s = text.strip().lower()
    if any(c in s for c in ".e") or s in ("inf", "-inf", "nan"):
        try:
            return float(s)
        except ValueError as exc:
            raise SchemaError(f"not a number: {text!r}") from exc
    return parse_rational(s)


def is_exact(x) -> bool:
    return isinstance(x, Rational)


def _down(x: float) -> float:
    return math.nextafter(x, -math.inf)


def _up(x: float) -> float:
    return math.nextafter(x, math.inf)


@dataclass(frozen=True)
class Interval:
    """Closed interval [lo, hi] with outward rounding on every operation.

    Each float operation is assumed correctly rounded (IEEE 754 for +, -, *,
    /, sqrt); widening by one ulp on each side then gives a rigorous
    enclosure.
    """

    lo: float
    hi: float

    def __post_init__(self):
        if not self.lo <= self.hi:
            raise ValueError(f"empty interval [{self.lo}, {self.hi}]")

    @classmethod
    def point(cls, x) -> "Interval":
        if isinstance(x, Interval):
            return x
        if isinstance(x, Rational):
            f = float(x)
            lo = f if Fraction(f) <= x else _down(f)
            hi = f if Fraction(f) >= x else _up(f)
            return cls(lo, hi)
        return cls(float(x), float(x))

    @classmethod
    def around(cls, x: float, err: float) -> "Interval":
        return cls(_down(x - err), _up(x + err))

    @classmethod
    def sqrt_of(cls, q) -> "Interval":
        """Enclosure of sqrt(q) for a nonnegative rational or interval."""
        iv = cls.point(q)
        if iv.lo < 0:
            raise ValueError("sqrt of negative interval")
        return cls(max(0.0, _down(math.sqrt(iv.lo))), _up(math.sqrt(iv.hi)))

    @property
    def mid(self) -> float:
        return 0.5 * (self.lo + self.hi)

    @property
    def width(self) -> float:
        return self.hi - self.lo

    def __add__(self, other):
        o = Interval.point(other)
        return Interval(_down(self.lo + o.lo), _up(self.hi + o.hi))

    __radd__ = __add__

    def __neg__(self):
        return Interval(-self.hi, -self.lo)

    def __sub__(self, other):
        return self + (-Interval.point(other))

    def __rsub__(self, other):
        return Interval.point(other) - self

    def __mul__(self, other):
        o = Interval.point(other)
        p = [self.lo * o.lo, self.lo * o.hi, self.hi * o.lo, self.hi * o.hi]
        return Interval(_down(min(p)), _up(max(p)))

    __rmul__ = __mul__

    def __contains__(self, x) -> bool:
        if isinstance(x, Interval):
            return self.lo <= x.lo and x.hi <= self.hi
        return self.lo <= x <= self.hi

    def certainly_le(self, other) -> bool:
        return self.hi <= Interval.point(other).lo

    def hull(self, other) -> "Interval":
        o = Interval.point(other)
        return Interval(min(self.lo, o.lo), max(self.hi, o.hi))
