"""Autonomous Hamiltonians on the normalized sphere and disc.

The sphere carries the area form (1/4pi) dtheta ^ dz, so its total area is 1
and the region {z' <= z} has area (z + 1)/2.  The disc is the southern
hemisphere {-1 <= z <= 0} of area 1/2.

An `AxisymmetricProfile` is a function h(z) on [-1, 1] given as an ordered
list of pieces.  Polynomial pieces with rational coefficients evaluate
exactly on rational input; inverse-square-root pieces and smooth blends
evaluate in floating point.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from numbers import Rational
from typing import Sequence

import numpy as np
from scipy import integrate, optimize

from .errors import ArgumentError, DomainError, SchemaError, StructuralError
from .exact import Interval, format_number, parse_number, parse_rational, format_rational

ONE = Fraction(1)
HALF = Fraction(1, 2)


@dataclass(frozen=True)
class SphereModel:
    """Normalization of (S^2, omega) used throughout."""

    total_area: Fraction = ONE
    disc_area: Fraction = HALF
    z_range: tuple = (Fraction(-1), ONE)

    @staticmethod
    def area_of_sublevel(z):
        """Area of {z' <= z}."""
        if isinstance(z, Rational):
            z = Fraction(z)
        if not -1 <= z <= 1:
            raise DomainError(f"z={z} outside [-1, 1]")
        return (z + 1) / 2

    @staticmethod
    def z_of_area(a):
        """Inverse of `area_of_sublevel`."""
        if isinstance(a, Rational):
            a = Fraction(a)
        if not 0 <= a <= 1:
            raise DomainError(f"area {a} outside [0, 1]")
        return 2 * a - 1


SPHERE = SphereModel()


# --------------------------------------------------------------------------
# smooth step


def smooth_step(s: float) -> float:
    """C-infinity step: 0 for s <= 0, 1 for s >= 1, all derivatives flat there."""
    if s <= 0:
        return 0.0
    if s >= 1:
        return 1.0
    u = 1.0 / s - 1.0 / (1.0 - s)
    if u > 700.0:
        return 0.0
    if u < -700.0:
        return 1.0
    return 1.0 / (1.0 + math.exp(u))


def smooth_step_derivs(s: float) -> tuple[float, float, float]:
    """(E, E', E'') at s."""
    if s <= 0:
        return 0.0, 0.0, 0.0
    if s >= 1:
        return 1.0, 0.0, 0.0
    e = smooth_step(s)
    p = e * (1.0 - e)
    if p == 0.0:
        return e, 0.0, 0.0
    w = 1.0 / s**2 + 1.0 / (1.0 - s) ** 2
    dw = -2.0 / s**3 + 2.0 / (1.0 - s) ** 3
    d1 = p * w
    d2 = d1 * (1.0 - 2.0 * e) * w + p * dw
    return e, d1, d2


# --------------------------------------------------------------------------
# pieces


def _as_rational(x):
    if isinstance(x, Rational):
        return Fraction(x)
    if isinstance(x, float) and x.is_integer():
        return Fraction(int(x))
    return x


class Piece:
    """One analytic piece of a profile on the closed z-interval [lo, hi]."""

    kind = "abstract"
    exact = False
    singular_at_lo = False

    def __init__(self, lo, hi):
        self.lo = Fraction(lo)
        self.hi = Fraction(hi)
        if not self.lo < self.hi:
            raise StructuralError(f"empty piece [{self.lo}, {self.hi}]", "pieces-cover")

    # subclasses implement _value / _deriv
    def value(self, z):
        if self.singular_at_lo and z == self.lo:
            raise DomainError(f"profile is singular at z={self.lo}")
        return self._value(z)

    def deriv(self, z, order: int = 1):
        if self.singular_at_lo and z == self.lo:
            raise DomainError(f"profile is singular at z={self.lo}")
        return self._deriv(z, order)

    def value_interval(self, z) -> Interval:
        """Rigorous enclosure of the value (1-ulp-per-op model for floats)."""
        v = self.value(z)
        if isinstance(v, Rational):
            return Interval.point(v)
        return Interval.around(v, 8 * abs(v) * 2.0**-52)

    def is_constant(self) -> bool:
        return False

    def is_zero(self) -> bool:
        return False

    def is_linear(self) -> bool:
        return False

    def critical_points(self) -> list:
        """Interior points of (lo, hi) where the derivative changes sign."""
        return _numeric_critical_points(self)

    def integral(self, a=None, b=None):
        """(value, error bound) of the integral of the piece over [a, b]."""
        a = self.lo if a is None else a
        b = self.hi if b is None else b
        val, err = integrate.quad(lambda z: float(self._value(z)), float(a), float(b),
                                  epsabs=1e-14, epsrel=1e-13, limit=200)
        return val, max(err, 1e-15 * abs(val))

    def restricted(self, lo, hi) -> "Piece":
        raise NotImplementedError

    def to_json(self) -> dict:
        raise NotImplementedError

    def _header(self):
        return {"from": format_rational(self.lo), "to": format_rational(self.hi), "kind": self.kind}

    def __eq__(self, other):
        return type(self) is type(other) and self.to_json() == other.to_json()

    def __hash__(self):
        return hash(str(self.to_json()))

    def __repr__(self):
        return f"{type(self).__name__}({self.to_json()})"


class PolyPiece(Piece):
    """sum_j coeffs[j] * z**j; exact when all coefficients are rational."""

    kind = "poly"

    def __init__(self, lo, hi, coeffs: Sequence = ()):
        super().__init__(lo, hi)
        cs = [_as_rational(c) for c in coeffs]
        while cs and cs[-1] == 0:
            cs.pop()
        self.coeffs = tuple(cs)
        self.exact = all(isinstance(c, Rational) for c in self.coeffs)

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    def _value(self, z):
        if not self.coeffs:
            return Fraction(0) if isinstance(z, Rational) else 0.0
        acc = self.coeffs[-1]
        for c in reversed(self.coeffs[:-1]):
            acc = acc * z + c
        if not isinstance(z, Rational) or not self.exact:
            return float(acc)
        return Fraction(acc)

    def _deriv_coeffs(self, order=1):
        cs = list(self.coeffs)
        for _ in range(order):
            cs = [j * c for j, c in enumerate(cs)][1:]
        return cs

    def _deriv(self, z, order=1):
        return PolyPiece(self.lo, self.hi, self._deriv_coeffs(order))._value(z)

    def is_constant(self):
        return len(self.coeffs) <= 1

    def is_zero(self):
        return not self.coeffs

    def is_linear(self):
        return len(self.coeffs) <= 2

    def critical_points(self):
        d = self._deriv_coeffs()
        if len(d) <= 1:
            return []
        if len(d) == 2 and self.exact:
            z0 = -Fraction(d[0]) / Fraction(d[1])
            return [z0] if self.lo < z0 < self.hi else []
        roots = np.roots([float(c) for c in reversed(d)])
        out = []
        for r in roots:
            if abs(r.imag) > 1e-12:
                continue
            x = float(r.real)
            if float(self.lo) < x < float(self.hi):
                # sign change only for odd multiplicity
                eps = 1e-7 * max(1.0, float(self.hi - self.lo))
                if self._deriv(x - eps) * self._deriv(x + eps) < 0:
                    out.append(x)
        return sorted(out)

    def integral(self, a=None, b=None):
        a = self.lo if a is None else a
        b = self.hi if b is None else b
        prim = [Fraction(0)] + [c / (j + 1) for j, c in enumerate(self.coeffs)] if self.exact \
            else [0.0] + [float(c) / (j + 1) for j, c in enumerate(self.coeffs)]
        P = PolyPiece(self.lo, self.hi, prim)
        if self.exact and isinstance(a, Rational) and isinstance(b, Rational):
            return P._value(Fraction(b)) - P._value(Fraction(a)), 0
        v = float(P._value(float(b))) - float(P._value(float(a)))
        return v, 1e-15 * (abs(v) + 1)

    def restricted(self, lo, hi):
        return PolyPiece(lo, hi, self.coeffs)

    def to_json(self):
        d = self._header()
        if self.is_zero():
            d["kind"] = "zero"
        else:
            d["coeffs"] = [format_number(c) for c in self.coeffs]
        return d


class InvSqrtPiece(Piece):
    """a * (1 + z)**(-1/2) with a = sign * sqrt(a2), singular at z = -1."""

    kind = "invsqrt"

    def __init__(self, lo, hi, a2=2, sign: int = 1):
        super().__init__(lo, hi)
        self.a2 = Fraction(a2)
        if self.a2 <= 0 or sign not in (1, -1):
            raise ArgumentError("invsqrt piece needs a2 > 0 and sign +-1")
        self.sign = sign
        self.singular_at_lo = self.lo == -1
        if self.lo < -1:
            raise StructuralError("invsqrt piece extends below z=-1", "pieces-cover")

    def _value(self, z):
        if isinstance(z, Rational):
            return self.sign * math.sqrt(self.a2 / (1 + Fraction(z)))
        return self.sign * math.sqrt(float(self.a2) / (1.0 + z))

    def value_interval(self, z):
        if self.singular_at_lo and z == self.lo:
            raise DomainError(f"profile is singular at z={self.lo}")
        if isinstance(z, Rational):
            iv = Interval.sqrt_of(self.a2 / (1 + Fraction(z)))
        else:
            q = float(self.a2) / (1.0 + z)
            iv = Interval.sqrt_of(Interval.around(q, 4 * 2.0**-52 * q))
        return iv if self.sign > 0 else -iv

    def _deriv(self, z, order=1):
        a = self.sign * math.sqrt(float(self.a2))
        u = 1.0 + float(z)
        c = 1.0
        p = -0.5
        for _ in range(order):
            c *= p
            p -= 1.0
        return a * c * u**p

    def critical_points(self):
        return []

    def integral(self, a=None, b=None):
        a = self.lo if a is None else a
        b = self.hi if b is None else b
        amp = self.sign * math.sqrt(float(self.a2))
        v = 2.0 * amp * (math.sqrt(1.0 + float(b)) - math.sqrt(1.0 + float(a)))
        return v, 8 * 2.0**-52 * abs(v)

    def restricted(self, lo, hi):
        return InvSqrtPiece(lo, hi, self.a2, self.sign)

    def to_json(self):
        d = self._header()
        d["a2"] = format_rational(self.a2)
        if self.sign < 0:
            d["sign"] = -1
        return d


class BlendPiece(Piece):
    """(1 - E(s)) * left(z) + E(s) * right(z), s = (z - t0)/(t1 - t0).

    E is `smooth_step`.  With constant left/right this is a smooth,
    monotone step that is flat to all orders at t0 and t1.
    """

    kind = "cutoff"

    def __init__(self, lo, hi, left: Piece, right: Piece, t0=None, t1=None):
        super().__init__(lo, hi)
        self.left = left
        self.right = right
        self.t0 = self.lo if t0 is None else Fraction(t0)
        self.t1 = self.hi if t1 is None else Fraction(t1)
        if not self.t0 < self.t1:
            raise StructuralError("cutoff needs t0 < t1", "pieces-cover")
        self.singular_at_lo = left.singular_at_lo and self.lo == left.lo

    def _s(self, z):
        return (float(z) - float(self.t0)) / float(self.t1 - self.t0)

    def _value(self, z):
        if z <= self.t0:
            return self.left._value(z)
        if z >= self.t1:
            return self.right._value(z)
        e = smooth_step(self._s(z))
        return (1.0 - e) * float(self.left._value(z)) + e * float(self.right._value(z))

    def value_interval(self, z):
        if z <= self.t0:
            return self.left.value_interval(z)
        if z >= self.t1:
            return self.right.value_interval(z)
        v = self._value(z)
        return Interval.around(v, 64 * 2.0**-52 * (abs(v) + abs(float(self.left._value(z)))
                                                   + abs(float(self.right._value(z)))))

    def _deriv(self, z, order=1):
        if order > 2:
            raise ArgumentError("cutoff derivatives implemented up to order 2")
        w = float(self.t1 - self.t0)
        e, e1, e2 = smooth_step_derivs(self._s(z))
        L, R = float(self.left._value(z)), float(self.right._value(z))
        L1, R1 = float(self.left._deriv(z, 1)), float(self.right._deriv(z, 1))
        if order == 1:
            return (1 - e) * L1 + e * R1 + e1 / w * (R - L)
        L2, R2 = float(self.left._deriv(z, 2)), float(self.right._deriv(z, 2))
        return (1 - e) * L2 + e * R2 + 2 * e1 / w * (R1 - L1) + e2 / w**2 * (R - L)

    def is_constant(self):
        return self.left.is_constant() and self.right.is_constant() and \
            self.left._value(self.lo) == self.right._value(self.lo)

    def is_zero(self):
        return self.left.is_zero() and self.right.is_zero()

    def restricted(self, lo, hi):
        return BlendPiece(lo, hi, self.left.restricted(lo, hi), self.right.restricted(lo, hi),
                          self.t0, self.t1)

    def to_json(self):
        d = self._header()
        d["left"] = self.left.to_json()
        d["right"] = self.right.to_json()
        if self.t0 != self.lo or self.t1 != self.hi:
            d["t0"] = format_rational(self.t0)
            d["t1"] = format_rational(self.t1)
        return d


class SumPiece(Piece):
    """Linear combination sum c_j * piece_j of pieces sharing one interval."""

    kind = "sum"

    def __init__(self, lo, hi, terms: Sequence[tuple]):
        super().__init__(lo, hi)
        self.terms = tuple((_as_rational(c), p) for c, p in terms)
        self.exact = all(isinstance(c, Rational) and p.exact for c, p in self.terms)
        self.singular_at_lo = any(p.singular_at_lo for _, p in self.terms)

    def _value(self, z):
        return sum(c * p._value(z) for c, p in self.terms)

    def _deriv(self, z, order=1):
        return sum(c * p._deriv(z, order) for c, p in self.terms)

    def is_zero(self):
        return all(p.is_zero() or c == 0 for c, p in self.terms)

    def integral(self, a=None, b=None):
        vals = [p.integral(a, b) for _, p in self.terms]
        v = sum(c * iv for (c, _), (iv, _) in zip(self.terms, vals))
        e = sum(abs(float(c)) * float(ie) for (c, _), (_, ie) in zip(self.terms, vals))
        return v, e

    def restricted(self, lo, hi):
        return SumPiece(lo, hi, [(c, p.restricted(lo, hi)) for c, p in self.terms])

    def to_json(self):
        d = self._header()
        d["terms"] = [{"c": format_number(c), "piece": p.to_json()} for c, p in self.terms]
        return d


def _numeric_critical_points(piece: Piece, samples: int = 257) -> list:
    lo, hi = float(piece.lo), float(piece.hi)
    if piece.singular_at_lo:
        lo = lo + 1e-9 * (hi - lo)
    xs = np.linspace(lo, hi, samples)[1:-1]
    ds = np.array([float(piece._deriv(x)) for x in xs])
    scale = max(1e-300, float(np.max(np.abs(ds))) if len(ds) else 0.0)
    sig = np.where(np.abs(ds) <= 1e-12 * scale, 0, np.sign(ds))
    out = []
    prev_x, prev_s = None, 0
    for x, s in zip(xs, sig):
        if s == 0:
            continue
        if prev_s and s != prev_s:
            out.append(optimize.brentq(lambda t: float(piece._deriv(t)), prev_x, x, xtol=1e-14))
        prev_x, prev_s = x, s
    if len(out) > samples // 4:
        raise StructuralError("profile piece oscillates; critical values not finite",
                              "finite-critical-values")
    return out


def piece_from_json(d: dict) -> Piece:
    try:
        kind = d["kind"]
        lo, hi = parse_rational(d["from"]), parse_rational(d["to"])
        if kind == "zero":
            return PolyPiece(lo, hi, ())
        if kind == "poly":
            return PolyPiece(lo, hi, [parse_number(c) for c in d["coeffs"]])
        if kind == "invsqrt":
            return InvSqrtPiece(lo, hi, parse_rational(d.get("a2", "2")), int(d.get("sign", 1)))
        if kind == "cutoff":
            t0 = parse_rational(d["t0"]) if "t0" in d else None
            t1 = parse_rational(d["t1"]) if "t1" in d else None
            return BlendPiece(lo, hi, piece_from_json(d["left"]), piece_from_json(d["right"]), t0, t1)
        if kind == "sum":
            return SumPiece(lo, hi, [(parse_number(t["c"]), piece_from_json(t["piece"]))
                                     for t in d["terms"]])
    except (KeyError, TypeError) as exc:
        raise SchemaError(f"malformed piece {d!r}: {exc}") from exc
    raise SchemaError(f"unknown piece kind {kind!r}")


# --------------------------------------------------------------------------
# profiles


@dataclass(frozen=True)
class Segment:
    """Maximal run of a profile that is constant or strictly monotone."""

    lo: object
    hi: object
    h_lo: object
    h_hi: object
    direction: int  # 0 constant, +1 increasing, -1 decreasing
    pieces: tuple = ()


class AxisymmetricProfile:
    """Piecewise description of h(z) on [-1, 1].

    Parameters
    ----------
    pieces : sequence of Piece
        Ordered, contiguous, covering [-1, 1].
    support : {"disc", "sphere"}
        ``"disc"`` asserts h vanishes on [z0, 1] for some z0 < 0, so that
        H is compactly supported in the southern hemisphere.
    name : str, optional
    """

    def __init__(self, pieces: Sequence[Piece], support: str = "sphere", name: str | None = None):
        self.pieces = tuple(pieces)
        if support not in ("disc", "sphere"):
            raise SchemaError(f"support must be 'disc' or 'sphere', got {support!r}")
        self.support = support
        self.name = name
        self._validate()

    # construction helpers ------------------------------------------------
    @classmethod
    def piecewise_linear(cls, knots, values, support="sphere", name=None):
        """Continuous PL profile through (knots[i], values[i])."""
        knots = [Fraction(k) for k in knots]
        values = [_as_rational(v) for v in values]
        pieces = []
        for (z0, z1), (h0, h1) in zip(zip(knots, knots[1:]), zip(values, values[1:])):
            slope = (h1 - h0) / (z1 - z0)
            pieces.append(PolyPiece(z0, z1, (h0 - slope * z0, slope)))
        return cls(pieces, support, name)

    def _validate(self):
        ps = self.pieces
        if not ps:
            raise StructuralError("profile has no pieces", "pieces-cover")
        if ps[0].lo != -1 or ps[-1].hi != 1:
            raise StructuralError("pieces must cover [-1, 1]", "pieces-cover")
        for a, b in zip(ps, ps[1:]):
            if a.hi != b.lo:
                raise StructuralError(f"gap or overlap at z={a.hi}", "pieces-cover")
            va, vb = a._value(a.hi), b._value(b.lo)
            if isinstance(va, Rational) and isinstance(vb, Rational):
                ok = va == vb
            else:
                ok = math.isclose(float(va), float(vb), rel_tol=1e-12, abs_tol=1e-12)
            if not ok:
                raise StructuralError(f"discontinuity at z={a.hi}: {va} != {vb}", "continuity")
        for p in ps[1:]:
            if p.singular_at_lo:
                raise StructuralError("only z=-1 may be singular", "continuity")
        if self.support == "disc":
            z0 = self.zero_from()
            if z0 is None or z0 >= 0:
                raise StructuralError("disc-supported profile must vanish on [z0, 1] with z0 < 0",
                                      "disc-support")

    def zero_from(self):
        """Smallest breakpoint b with h identically zero on [b, 1], or None."""
        b = None
        for p in reversed(self.pieces):
            if p.is_zero():
                b = p.lo
            else:
                break
        return b

    # evaluation ----------------------------------------------------------
    @property
    def singular(self) -> bool:
        return self.pieces[0].singular_at_lo

    @property
    def breakpoints(self) -> list:
        return [p.lo for p in self.pieces] + [Fraction(1)]

    def piece_at(self, z) -> Piece:
        if not -1 <= z <= 1:
            raise DomainError(f"z={z} outside [-1, 1]")
        for p in self.pieces:
            if z <= p.hi:
                return p
        return self.pieces[-1]

    def __call__(self, z):
        return eval_profile(self, z)

    def deriv(self, z, order: int = 1):
        """One-sided (left at breakpoints) derivative."""
        return self.piece_at(z).deriv(z, order)

    def value_interval(self, z) -> Interval:
        return self.piece_at(z).value_interval(z)

    @property
    def exact(self) -> bool:
        return all(p.exact for p in self.pieces)

    @property
    def is_pl(self) -> bool:
        return all(p.exact and p.is_linear() for p in self.pieces if isinstance(p, PolyPiece)) and \
            all(isinstance(p, PolyPiece) for p in self.pieces)

    def integral(self):
        """(int_{-1}^{1} h dz, error bound); exact Fraction when all pieces are."""
        total, err = Fraction(0), 0.0
        for p in self.pieces:
            v, e = p.integral()
            if isinstance(total, Rational) and isinstance(v, Rational):
                total += v
            else:
                total = float(total) + float(v)
            err += float(e)
        return total, err

    def segments(self) -> list[Segment]:
        """Split [-1, 1] into maximal constant / strictly monotone runs."""
        raw = []
        for p in self.pieces:
            cuts = [p.lo] + list(p.critical_points()) + [p.hi]
            for a, b in zip(cuts, cuts[1:]):
                if p.is_constant():
                    d = 0
                else:
                    ha = _safe_value(p, a)
                    hb = p._value(b)
                    d = (hb > ha) - (hb < ha)
                raw.append(Segment(a, b, _safe_value(p, a), p._value(b), d, (p,)))
        merged: list[Segment] = []
        for s in raw:
            if merged and merged[-1].direction == s.direction and \
                    (s.direction != 0 or merged[-1].h_hi == s.h_lo):
                m = merged[-1]
                merged[-1] = Segment(m.lo, s.hi, m.h_lo, s.h_hi, m.direction, m.pieces + s.pieces)
            else:
                merged.append(s)
        return merged

    def critical_values(self) -> list:
        vals = set()
        for s in self.segments():
            vals.add(s.h_lo)
            vals.add(s.h_hi)
        return sorted(vals, key=float)

    # algebra -------------------------------------------------------------
    def _combine(self, other, a, b, support):
        cuts = sorted(set(self.breakpoints) | set(other.breakpoints))
        pieces = []
        for lo, hi in zip(cuts, cuts[1:]):
            mid = (lo + hi) / 2
            p, q = self.piece_at(mid).restricted(lo, hi), other.piece_at(mid).restricted(lo, hi)
            if isinstance(p, PolyPiece) and isinstance(q, PolyPiece):
                n = max(len(p.coeffs), len(q.coeffs))
                cp = list(p.coeffs) + [0] * (n - len(p.coeffs))
                cq = list(q.coeffs) + [0] * (n - len(q.coeffs))
                pieces.append(PolyPiece(lo, hi, [a * x + b * y for x, y in zip(cp, cq)]))
            else:
                pieces.append(SumPiece(lo, hi, [(a, p), (b, q)]))
        return AxisymmetricProfile(pieces, support)

    def __add__(self, other):
        if isinstance(other, AxisymmetricProfile):
            sup = "disc" if self.support == other.support == "disc" else "sphere"
            return self._combine(other, 1, 1, sup)
        return self.shifted(other)

    def scaled(self, a):
        return self._combine(PROFILE_ZERO, a, 0, self.support)

    def shifted(self, c):
        const = AxisymmetricProfile([PolyPiece(-1, 1, (c,))], "sphere")
        return self._combine(const, 1, 1, "sphere" if c != 0 else self.support)

    # serialization -------------------------------------------------------
    def to_json(self) -> dict:
        return {"support": self.support, "pieces": [p.to_json() for p in self.pieces]}

    @classmethod
    def from_json(cls, d: dict) -> "AxisymmetricProfile":
        if not isinstance(d, dict) or "pieces" not in d:
            raise SchemaError("profile JSON needs 'pieces'")
        support = d.get("support", "sphere")
        return cls([piece_from_json(p) for p in d["pieces"]], support, d.get("name"))

    def __eq__(self, other):
        return isinstance(other, AxisymmetricProfile) and self.to_json() == other.to_json()

    def __hash__(self):
        return hash(str(self.to_json()))

    def __repr__(self):
        label = self.name or f"{len(self.pieces)} pieces"
        return f"AxisymmetricProfile({label}, support={self.support})"


def _safe_value(p: Piece, z):
    if p.singular_at_lo and z == p.lo:
        return math.inf if p.sign > 0 else -math.inf  # type: ignore[attr-defined]
    return p._value(z)


def eval_profile(p: AxisymmetricProfile, z):
    """h(z); exact rational for rational z on an exact piece.

    Raises `DomainError` outside [-1, 1] or at the singular point z = -1.
    """
    if isinstance(z, Rational):
        z = Fraction(z)
    elif isinstance(z, float) and not math.isfinite(z):
        raise DomainError(f"z={z} is not finite")
    return p.piece_at(z).value(z)


def make_smoothing(base: AxisymmetricProfile, n: int) -> AxisymmetricProfile:
    """Flatten a profile singular at z = -1 on the cap [-1, -1 + 4**-n].

    The result equals ``base`` for z >= -1 + 4**-n and equals the plateau
    value base(-1 + 4**-n) on the cap (for the twist this is 2**n * sqrt 2).
    The flattening is the clip min(h, plateau), continuous and monotone;
    its Hofer norm is exactly the plateau value.  Nonsingular profiles are
    returned unchanged.
    """
    if not isinstance(n, int) or isinstance(n, bool) or n <= 0:
        raise ArgumentError(f"cap index must be a positive integer, got {n!r}")
    if not base.singular:
        return base
    cap = Fraction(-1) + Fraction(1, 4**n)
    plateau = float(base.piece_at(cap).value(cap))
    pieces: list[Piece] = [PolyPiece(-1, cap, (plateau,))]
    for p in base.pieces:
        if p.hi <= cap:
            continue
        pieces.append(p.restricted(max(p.lo, cap), p.hi) if p.lo < cap else p)
    name = f"{base.name}_n{n}" if base.name else None
    return AxisymmetricProfile(pieces, base.support, name)


def smoothing_plateau(n: int) -> float:
    """Plateau value of the n-th twist smoothing, 2**n * sqrt(2)."""
    return 2.0**n * math.sqrt(2.0)


# --------------------------------------------------------------------------
# fixtures

PROFILE_ZERO = AxisymmetricProfile([PolyPiece(-1, 1, ())], "disc", "zero")

PROFILE_RAMP = AxisymmetricProfile(
    [PolyPiece(-1, Fraction(-1, 2), (-1, -2)), PolyPiece(Fraction(-1, 2), 1, ())], "disc", "ramp")

PROFILE_TENT = AxisymmetricProfile.piecewise_linear(
    [-1, Fraction(-9, 10), Fraction(-1, 2), Fraction(-1, 10), 1], [0, 0, 1, 0, 0], "disc", "tent")

PROFILE_HEIGHT = AxisymmetricProfile([PolyPiece(-1, 1, (0, 1))], "sphere", "height")

_TWIST_CORE = InvSqrtPiece(-1, Fraction(-3, 4), 2)
PROFILE_TWIST = AxisymmetricProfile(
    [_TWIST_CORE,
     BlendPiece(Fraction(-3, 4), Fraction(-1, 2), InvSqrtPiece(Fraction(-3, 4), Fraction(-1, 2), 2),
                PolyPiece(Fraction(-3, 4), Fraction(-1, 2), ())),
     PolyPiece(Fraction(-1, 2), 1, ())],
    "disc", "twist")

PROFILE_SPHERE_TWIST = AxisymmetricProfile([InvSqrtPiece(-1, 1, 2)], "sphere", "sphere_twist")

FIXTURES = {
    "zero": PROFILE_ZERO,
    "ramp": PROFILE_RAMP,
    "tent": PROFILE_TENT,
    "height": PROFILE_HEIGHT,
    "twist": PROFILE_TWIST,
    "sphere_twist": PROFILE_SPHERE_TWIST,
}


def smooth_staircase(levels: Sequence[tuple], support: str = "disc", name=None) -> AxisymmetricProfile:
    """Smooth profile stepping through constant levels.

    ``levels`` is a list of (z_start, z_end, value_before, value_after):
    on each [z_start, z_end] the profile blends smoothly between the two
    values; it is constant between consecutive steps.  The first value
    applies from z = -1 and the last up to z = 1.
    """
    pieces: list[Piece] = []
    z = Fraction(-1)
    cur = None
    for z0, z1, v0, v1 in levels:
        z0, z1 = Fraction(z0), Fraction(z1)
        v0, v1 = _as_rational(v0), _as_rational(v1)
        if cur is not None and cur != v0:
            raise StructuralError("staircase levels must chain", "continuity")
        if z0 > z:
            pieces.append(PolyPiece(z, z0, (v0,)))
        pieces.append(BlendPiece(z0, z1, PolyPiece(z0, z1, (v0,)), PolyPiece(z0, z1, (v1,))))
        z, cur = z1, v1
    if z < 1:
        pieces.append(PolyPiece(z, 1, (cur,)))
    return AxisymmetricProfile(pieces, support, name)


def smoothed_ramp(width=Fraction(1, 8)) -> AxisymmetricProfile:
    """Ramp-like smooth monotone profile: value 1 near the pole, 0 for z >= -1/2."""
    return smooth_staircase([(Fraction(-1, 2) - Fraction(2) * width, Fraction(-1, 2), 1, 0)],
                            name="smoothed_ramp")


def smoothed_tent() -> AxisymmetricProfile:
    """Smooth bump: 0 near the pole, 1 around z = -1/2, 0 again from z = -1/10."""
    return smooth_staircase([(Fraction(-9, 10), Fraction(-6, 10), 0, 1),
                             (Fraction(-4, 10), Fraction(-1, 10), 1, 0)], name="smoothed_tent")


# --------------------------------------------------------------------------
# triangulated fields


@dataclass(frozen=True)
class TriangulatedField:
    """Piecewise-linear scalar field on an abstract triangulated sphere.

    Triangle areas are stored rather than recomputed from an embedding, so
    fields with exact rational areas summing to 1 can be built directly.
    """

    heights: tuple
    triangles: tuple
    areas: tuple
    validated: bool = field(default=False, compare=False)

    def __init__(self, heights, triangles, areas, validate: bool = True):
        object.__setattr__(self, "heights", tuple(_as_rational(h) for h in heights))
        object.__setattr__(self, "triangles", tuple(tuple(int(i) for i in t) for t in triangles))
        object.__setattr__(self, "areas", tuple(Fraction(a) for a in areas))
        object.__setattr__(self, "validated", False)
        if validate:
            self.validate()

    @property
    def n_vertices(self) -> int:
        return len(self.heights)

    def edges(self) -> dict:
        """Map sorted vertex pair -> list of incident triangle indices."""
        out: dict = {}
        for ti, (a, b, c) in enumerate(self.triangles):
            for u, v in ((a, b), (b, c), (c, a)):
                out.setdefault((u, v) if u < v else (v, u), []).append(ti)
        return out

    def validate(self):
        if len(self.triangles) != len(self.areas):
            raise StructuralError("one area per triangle required", "mesh-areas")
        if any(a <= 0 for a in self.areas):
            raise StructuralError("triangle areas must be positive", "mesh-areas")
        if sum(self.areas) != 1:
            raise StructuralError(f"triangle areas sum to {sum(self.areas)}, not 1", "total-area")
        n = self.n_vertices
        for t in self.triangles:
            if len(set(t)) != 3 or not all(0 <= i < n for i in t):
                raise StructuralError(f"bad triangle {t}", "mesh-topology")
        edges = self.edges()
        if any(len(ts) != 2 for ts in edges.values()):
            raise StructuralError("every edge must be shared by exactly two triangles", "manifold")
        used = {i for t in self.triangles for i in t}
        euler = len(used) - len(edges) + len(self.triangles)
        if len(used) != n:
            raise StructuralError("isolated vertices present", "mesh-topology")
        if euler != 2:
            raise StructuralError(f"Euler characteristic {euler} != 2: not a sphere", "genus-0")
        object.__setattr__(self, "validated", True)

    def to_json(self) -> dict:
        return {
            "vertices": [{"h": format_number(h)} for h in self.heights],
            "triangles": [{"v": list(t), "area": format_rational(a)}
                          for t, a in zip(self.triangles, self.areas)],
        }

    @classmethod
    def from_json(cls, d: dict, validate: bool = True) -> "TriangulatedField":
        try:
            hs = [parse_number(v["h"]) for v in d["vertices"]]
            tris = [t["v"] for t in d["triangles"]]
            areas = [parse_rational(t["area"]) for t in d["triangles"]]
        except (KeyError, TypeError) as exc:
            raise SchemaError(f"malformed mesh JSON: {exc}") from exc
        return cls(hs, tris, areas, validate)
