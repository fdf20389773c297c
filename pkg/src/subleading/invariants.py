"""Calabi, Hofer norm, and four routes to the Ruelle invariant.

Sign conventions.  The flow of H = h(z) rotates each latitude circle at
angular speed -4 pi h'(z), so that a Hamiltonian that is large near the
south pole (the centre of the disc) has positive Ruelle invariant.  A level
circle's interior is the side containing the pole z = -1.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from fractions import Fraction
from numbers import Rational
from typing import Sequence

import numpy as np
from numba import njit

from .errors import ArgumentError, DomainError
from .model import AxisymmetricProfile, BlendPiece, InvSqrtPiece, Piece, PolyPiece
from .reeb import MeasuredReebTree, _exact_sum, tree_integral


@dataclass(frozen=True)
class RuelleEstimate:
    """A value of the Ruelle invariant and how it was obtained."""

    value: object
    route: str
    error_bound: float = 0.0

    def to_json(self) -> dict:
        from .exact import format_number

        return {"value": format_number(self.value), "route": self.route,
                "error_bound": format_number(float(self.error_bound))}


# --------------------------------------------------------------------------
# Calabi and Hofer


def calabi_estimate(p: AxisymmetricProfile | MeasuredReebTree):
    """(Calabi invariant, error bound)."""
    if isinstance(p, MeasuredReebTree):
        if p.boundary is None:
            raise DomainError("Calabi needs a disc: tree has no boundary vertex")
        return tree_integral(p), 0.0
    if p.support != "disc":
        raise DomainError("Calabi is defined for disc-supported profiles; use the mean of H instead")
    total, err = p.integral()
    return total / 2, err / 2


def calabi(p: AxisymmetricProfile | MeasuredReebTree):
    """Calabi invariant: the integral of H against omega, (1/2) int h dz.

    Exact for rational piecewise-polynomial profiles.
    """
    return calabi_estimate(p)[0]


def sphere_mean(p: AxisymmetricProfile | MeasuredReebTree):
    """Integral of H over the whole sphere (total area 1)."""
    if isinstance(p, MeasuredReebTree):
        return tree_integral(p)
    return p.integral()[0] / 2


def hofer_norm(p: AxisymmetricProfile):
    """max h - min h; ``math.inf`` for profiles singular at the pole."""
    if p.singular:
        return math.inf
    vals = p.critical_values()
    return max(vals, key=float) - min(vals, key=float)


# --------------------------------------------------------------------------
# Ruelle: combinatorial routes


def ruelle_tree(t: MeasuredReebTree) -> RuelleEstimate:
    """Sum of chi_i H(v_i) over tree vertices, chi_i = 2 - val(v_i).

    The edge form, sum over edges oriented away from the boundary vertex of
    H(far end) - H(near end), is computed as well and must agree.
    """
    if t.boundary is None:
        raise DomainError("Ruelle invariant needs the boundary vertex of the disc")
    chi_form = _exact_sum([t.chi(v.id) * v.h for v in t.vertices])
    edge_form = _exact_sum([t.vertex(far).h - t.vertex(near).h for near, far in _edges_from(t, t.boundary)])
    if isinstance(chi_form, Rational) and isinstance(edge_form, Rational):
        assert chi_form == edge_form, (chi_form, edge_form)
    else:
        assert math.isclose(float(chi_form), float(edge_form), rel_tol=1e-9, abs_tol=1e-9)
    return RuelleEstimate(chi_form, "tree", 0.0)


def _edges_from(t: MeasuredReebTree, root) -> list[tuple]:
    out, seen, stack = [], {root}, [root]
    while stack:
        x = stack.pop()
        for y in t.neighbors(x):
            if y not in seen:
                seen.add(y)
                out.append((x, y))
                stack.append(y)
    return out


def sphere_chi_sum(t: MeasuredReebTree):
    """Sum of chi_i H(v_i) without reference to a boundary vertex."""
    return _exact_sum([t.chi(v.id) * v.h for v in t.vertices])


def ruelle_levelcount(p: AxisymmetricProfile) -> RuelleEstimate:
    """Integral over levels xi of the signed count n_H(xi) of level circles.

    A circle counts +1 when H increases on crossing it towards the pole.
    On each monotone run of h, n_H is constant on the run's range of
    values, so the integral is a finite exact sum.
    """
    if p.support != "disc":
        raise DomainError("Ruelle invariant needs the disc trivialization; profile is sphere-global")
    terms = []
    for s in p.segments():
        if s.direction == 0:
            continue
        sign = -s.direction  # H grows towards the pole iff h decreases in z
        terms.append(sign * abs(s.h_hi - s.h_lo) if math.isfinite(float(s.h_lo)) else math.inf)
    return RuelleEstimate(_exact_sum(terms), "level-count", 0.0)


def ruelle_morse(critical_points: Sequence[tuple]) -> RuelleEstimate:
    """Sum of (-1)^index H(p) over critical points (H-value, Morse index)."""
    terms = []
    for h, ind in critical_points:
        if ind not in (0, 1, 2) or isinstance(ind, bool):
            raise ArgumentError(f"Morse index must be 0, 1 or 2, got {ind!r}")
        h = Fraction(h) if isinstance(h, Rational) else h
        terms.append(h if ind % 2 == 0 else -h)
    return RuelleEstimate(_exact_sum(terms), "morse", 0.0)


def morse_data_from_tree(t: MeasuredReebTree) -> list[tuple]:
    """Critical points of a generic Morse realization of a tree.

    Leaves other than the boundary are extrema (index 2 for a local max,
    0 for a local min); a vertex of valence v >= 3 is v - 2 saddles.
    """
    out = []
    for v in t.vertices:
        if v.id == t.boundary:
            continue
        val = t.valence(v.id)
        if val == 1:
            nb = t.vertex(t.neighbors(v.id)[0])
            out.append((v.h, 2 if v.h > nb.h else 0))
        elif val >= 3:
            out.extend([(v.h, 1)] * (val - 2))
    return out


# --------------------------------------------------------------------------
# action primitive of the time-one map


@dataclass(frozen=True)
class ActionPrimitive:
    """F = h - (1 + z) h', the primitive of (phi^1)^* lambda - lambda.

    ``pieces`` is a list of (lo, hi, F on that interval); F may jump at
    breakpoints of a piecewise-linear h.
    """

    pieces: tuple
    lambda_choice: str = "lambda = -((1+z)/(4 pi)) dtheta"

    def __call__(self, z):
        for lo, hi, f in self.pieces:
            if lo <= z <= hi:
                return f(z)
        raise DomainError(f"z={z} outside [-1, 1]")


def action_primitive_check(p: AxisymmetricProfile):
    """Build F = h - (1 + z) h' and return (F, |int F dz - 2 int h dz|)."""
    from scipy import integrate

    pieces = []
    int_f: object = Fraction(0)
    err = 0.0
    for pc in p.pieces:
        if isinstance(pc, PolyPiece):
            d = pc._deriv_coeffs()
            # (1 + z) h'(z) coefficients
            one_z = [0] * (len(d) + 1)
            for j, c in enumerate(d):
                one_z[j] += c
                one_z[j + 1] += c
            fc = [(pc.coeffs[j] if j < len(pc.coeffs) else 0) - (one_z[j] if j < len(one_z) else 0)
                  for j in range(max(len(pc.coeffs), len(one_z)))]
            fp = PolyPiece(pc.lo, pc.hi, fc)
            v, _ = fp.integral()
            pieces.append((pc.lo, pc.hi, fp._value))
        else:
            def fz(z, pc=pc):
                return float(pc._value(z)) - (1.0 + float(z)) * float(pc._deriv(z))

            lo = float(pc.lo)
            v, e = integrate.quad(fz, lo, float(pc.hi), epsabs=1e-13, epsrel=1e-13, limit=400)
            err += e
            pieces.append((pc.lo, pc.hi, fz))
        int_f = int_f + v if isinstance(int_f, Rational) and isinstance(v, Rational) else float(int_f) + float(v)
    int_h, _ = p.integral()
    diff = int_f - 2 * int_h if isinstance(int_f, Rational) and isinstance(int_h, Rational) \
        else float(int_f) - 2 * float(int_h)
    return ActionPrimitive(tuple(pieces)), abs(diff)


# --------------------------------------------------------------------------
# Ruelle: numerical route

_MAXC = 10
_POLY, _BLEND, _INVSQRT = 0, 1, 2


def _compile_profile(p: AxisymmetricProfile):
    """Flatten a profile into arrays for the compiled evaluator."""
    n = len(p.pieces)
    lo = np.zeros(n)
    hi = np.zeros(n)
    kind = np.zeros(n, dtype=np.int64)
    cl = np.zeros((n, _MAXC))
    cr = np.zeros((n, _MAXC))
    t01 = np.zeros((n, 2))
    smooth = True

    def coeffs(pc):
        if not isinstance(pc, PolyPiece) or len(pc.coeffs) > _MAXC:
            raise DomainError(f"numeric route does not support piece {pc!r}")
        out = np.zeros(_MAXC)
        out[: len(pc.coeffs)] = [float(c) for c in pc.coeffs]
        return out

    for i, pc in enumerate(p.pieces):
        lo[i], hi[i] = float(pc.lo), float(pc.hi)
        if isinstance(pc, PolyPiece):
            kind[i] = _POLY
            cl[i] = coeffs(pc)
        elif isinstance(pc, BlendPiece):
            kind[i] = _BLEND
            cl[i], cr[i] = coeffs(pc.left), coeffs(pc.right)
            t01[i] = float(pc.t0), float(pc.t1)
        elif isinstance(pc, InvSqrtPiece):
            kind[i] = _INVSQRT
            cl[i, 0] = pc.sign * math.sqrt(float(pc.a2))
        else:
            raise DomainError(f"numeric route does not support piece {pc!r}")
    # C^2 check at breakpoints
    for a, b in zip(p.pieces, p.pieces[1:]):
        z = a.hi
        for order in (1, 2):
            if not math.isclose(float(a._deriv(z, order)), float(b._deriv(z, order)),
                                rel_tol=1e-8, abs_tol=1e-8):
                smooth = False
    return (lo, hi, kind, cl, cr, t01), smooth


@njit(cache=True)
def _poly3(c, z):
    v = 0.0
    d1 = 0.0
    d2 = 0.0
    for j in range(c.shape[0] - 1, -1, -1):
        d2 = d2 * z + 2.0 * d1
        d1 = d1 * z + v
        v = v * z + c[j]
    return v, d1, d2


@njit(cache=True)
def _step3(s):
    if s <= 0.0:
        return 0.0, 0.0, 0.0
    if s >= 1.0:
        return 1.0, 0.0, 0.0
    u = 1.0 / s - 1.0 / (1.0 - s)
    if u > 700.0:
        return 0.0, 0.0, 0.0
    if u < -700.0:
        return 1.0, 0.0, 0.0
    e = 1.0 / (1.0 + np.exp(u))
    p = e * (1.0 - e)
    w = 1.0 / (s * s) + 1.0 / ((1.0 - s) * (1.0 - s))
    dw = -2.0 / (s * s * s) + 2.0 / ((1.0 - s) * (1.0 - s) * (1.0 - s))
    d1 = p * w
    d2 = d1 * (1.0 - 2.0 * e) * w + p * dw
    return e, d1, d2


@njit(cache=True)
def _hprime(lo, hi, kind, cl, cr, t01, z):
    """(h'(z), h''(z)) from the flattened profile."""
    n = lo.shape[0]
    i = n - 1
    for j in range(n):
        if z <= hi[j]:
            i = j
            break
    k = kind[i]
    if k == 0:
        _, d1, d2 = _poly3(cl[i], z)
        return d1, d2
    if k == 1:
        L, L1, L2 = _poly3(cl[i], z)
        R, R1, R2 = _poly3(cr[i], z)
        w = t01[i, 1] - t01[i, 0]
        e, e1, e2 = _step3((z - t01[i, 0]) / w)
        d1 = (1.0 - e) * L1 + e * R1 + e1 / w * (R - L)
        d2 = (1.0 - e) * L2 + e * R2 + 2.0 * e1 / w * (R1 - L1) + e2 / (w * w) * (R - L)
        return d1, d2
    a = cl[i, 0]
    u = 1.0 + z
    return -0.5 * a * u ** -1.5, 0.75 * a * u ** -2.5


@njit(cache=True)
def _rhs(lo, hi, kind, cl, cr, t01, x, y, a, b, c, d):
    """Flow and variational equation; (a b; c d) is the derivative matrix."""
    s = x * x + y * y - 1.0
    d1, d2 = _hprime(lo, hi, kind, cl, cr, t01, s)
    k = 4.0 * np.pi
    j11 = 2.0 * k * d2 * x * y
    j12 = k * (2.0 * d2 * y * y + d1)
    j21 = -k * (2.0 * d2 * x * x + d1)
    j22 = -j11
    return (k * d1 * y, -k * d1 * x,
            j11 * a + j12 * c, j11 * b + j12 * d,
            j21 * a + j22 * c, j21 * b + j22 * d)


@njit(cache=True)
def _winding(lo, hi, kind, cl, cr, t01, x0, y0, T, nsteps):
    """Turns swept by the first column of D phi^t for t in [0, T] and [0, T/2]."""
    h = T / nsteps
    x, y, a, b, c, d = x0, y0, 1.0, 0.0, 0.0, 1.0
    ang = 0.0
    prev = 0.0
    half = 0.0
    for n in range(nsteps):
        p1 = _rhs(lo, hi, kind, cl, cr, t01, x, y, a, b, c, d)
        q = 0.5 * h
        p2 = _rhs(lo, hi, kind, cl, cr, t01, x + q * p1[0], y + q * p1[1], a + q * p1[2],
                  b + q * p1[3], c + q * p1[4], d + q * p1[5])
        p3 = _rhs(lo, hi, kind, cl, cr, t01, x + q * p2[0], y + q * p2[1], a + q * p2[2],
                  b + q * p2[3], c + q * p2[4], d + q * p2[5])
        p4 = _rhs(lo, hi, kind, cl, cr, t01, x + h * p3[0], y + h * p3[1], a + h * p3[2],
                  b + h * p3[3], c + h * p3[4], d + h * p3[5])
        r = h / 6.0
        x += r * (p1[0] + 2.0 * p2[0] + 2.0 * p3[0] + p4[0])
        y += r * (p1[1] + 2.0 * p2[1] + 2.0 * p3[1] + p4[1])
        a += r * (p1[2] + 2.0 * p2[2] + 2.0 * p3[2] + p4[2])
        b += r * (p1[3] + 2.0 * p2[3] + 2.0 * p3[3] + p4[3])
        c += r * (p1[4] + 2.0 * p2[4] + 2.0 * p3[4] + p4[4])
        d += r * (p1[5] + 2.0 * p2[5] + 2.0 * p3[5] + p4[5])
        # the system is linear in (a b; c d): rescaling keeps directions
        nrm = abs(a) + abs(b) + abs(c) + abs(d)
        if nrm > 1e100:
            a /= nrm
            b /= nrm
            c /= nrm
            d /= nrm
        cur = np.arctan2(c, a)
        dd = cur - prev
        while dd > np.pi:
            dd -= 2.0 * np.pi
        while dd < -np.pi:
            dd += 2.0 * np.pi
        ang += dd
        prev = cur
        if n + 1 == nsteps // 2:
            half = ang
    return ang / (2.0 * np.pi), half / (2.0 * np.pi)


def _disc_rate_field(tab, zs, thetas, P, nsteps):
    rates = np.zeros((len(zs), len(thetas)))
    halves = np.zeros_like(rates)
    for i, z in enumerate(zs):
        rho = math.sqrt(1.0 + z)
        for j, th in enumerate(thetas):
            full, half = _winding(*tab, rho * math.cos(th), rho * math.sin(th), float(P), nsteps)
            rates[i, j] = full / P
            halves[i, j] = half / (P / 2)
    return rates, halves


def ruelle_numeric(p: AxisymmetricProfile, grid: tuple = (16, 2), P: int = 64,
                   max_turn: float = 0.05) -> RuelleEstimate:
    """Ruelle invariant from the winding of the linearized flow.

    Integrates the flow and its variational equation with fixed-step RK4 in
    Cartesian disc coordinates (x, y) = sqrt(1+z) (cos theta, sin theta),
    in which omega = (1/2 pi) dx dy and the trivialization is the constant
    frame.  The winding of the first column of the derivative over
    [0, P], divided by P, is averaged against omega: Gauss-Legendre nodes in
    z on each non-constant piece times uniform theta nodes.

    Parameters
    ----------
    grid : (nodes per piece in z, nodes in theta)
    P : homogenization time.
    max_turn : largest rotation angle (radians) per RK4 step.

    The error bound adds the change under doubling the step to the change
    between homogenization times P/2 and P.  Profiles that are not C^2 at
    breakpoints trigger a warning and a doubled bound.
    """
    if P < 1:
        raise ArgumentError("homogenization depth P must be >= 1")
    if p.support != "disc":
        raise DomainError("Ruelle invariant needs a disc-supported profile")
    tab, smooth = _compile_profile(p)
    if not smooth:
        warnings.warn("profile is not C^2 at a breakpoint; numeric Ruelle bound degraded",
                      RuntimeWarning, stacklevel=2)
    nz, nth = grid
    gx, gw = np.polynomial.legendre.leggauss(nz)
    zs, ws = [], []
    for pc in p.pieces:
        if pc.is_constant() or pc.lo >= 0:
            continue
        a, b = float(pc.lo), float(min(pc.hi, 0))
        zs.extend(0.5 * (b - a) * gx + 0.5 * (b + a))
        ws.extend(0.5 * (b - a) * gw)
    if not zs:
        return RuelleEstimate(0.0, "numeric", 0.0)
    zs, ws = np.array(zs), np.array(ws)
    thetas = 2 * np.pi * (np.arange(nth) + 0.5) / nth
    omega_max = max(abs(float(_hprime(*tab, z)[0])) for z in np.linspace(-1 + 1e-9, 0, 2001))
    omega_max = max(omega_max, float(np.max(np.abs([_hprime(*tab, z)[0] for z in zs]))))
    nsteps = max(64, int(math.ceil(4 * math.pi * omega_max * P / max_turn)))
    nsteps += nsteps % 2
    fine, half = _disc_rate_field(tab, zs, thetas, P, nsteps)
    coarse, _ = _disc_rate_field(tab, zs, thetas, P, nsteps // 2)

    def integrate_rates(r):
        # omega = (1/4 pi) dtheta dz: uniform theta average times dz/2
        return float(np.sum(ws * r.mean(axis=1)) / 2)

    val = integrate_rates(fine)
    err = abs(val - integrate_rates(coarse)) + abs(val - integrate_rates(half))
    if not smooth:
        err *= 2
    return RuelleEstimate(val, "numeric", err)
