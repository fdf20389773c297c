"""Link spectral invariants of autonomous Hamiltonians.

For H = h(z) the equally spaced latitude circles z = a_i, a_i = -1 + 2i/(k+1),
form a monotone link and H is constant on each, so Lagrangian control gives

    mu_k(H) = (1/k) sum_{i=1}^{k} h(a_i).

For a general measured Reeb tree, `place_link` builds a monotone link whose
circles are level circles of H, except for a bounded number per vertex that
only have H confined to a small interval; `muk_bounds` turns it into a
two-sided bound on mu_k.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from numbers import Rational
from typing import Iterable, Sequence

import numpy as np

from .errors import ArgumentError, DomainError, KTooSmallError
from .exact import Interval, format_number
from .invariants import calabi, ruelle_tree, sphere_chi_sum, sphere_mean
from .model import AxisymmetricProfile, BlendPiece, PolyPiece, eval_profile
from .reeb import MeasuredReebTree, _exact_sum, tree_from_profile, tree_integral


def _check_k(k, least: int = 1) -> int:
    if isinstance(k, bool) or not isinstance(k, (int, np.integer)) or k < least:
        raise ArgumentError(f"k must be an integer >= {least}, got {k!r}")
    return int(k)


def sample_points(k: int) -> list[Fraction]:
    """a_i = -1 + 2i/(k+1), i = 1..k."""
    k = _check_k(k)
    return [Fraction(-1) + Fraction(2 * i, k + 1) for i in range(1, k + 1)]


def muk_axisymmetric(p: AxisymmetricProfile, k: int):
    """(1/k) sum_i h(a_i); exact rational when every sample hits an exact piece."""
    pts = sample_points(k)
    vals = [eval_profile(p, a) for a in pts]
    if all(isinstance(v, Rational) for v in vals):
        return sum(vals, Fraction(0)) / k
    return math.fsum(float(v) for v in vals) / k


def fk(p: AxisymmetricProfile, k: int):
    """f_k = mu_k - mu_1.

    For disc-supported profiles mu_1 = h(0) = 0, so f_k = mu_k.
    """
    mu = muk_axisymmetric(p, k)
    mu1 = muk_axisymmetric(p, 1)
    if isinstance(mu, Rational) and isinstance(mu1, Rational):
        return mu - mu1
    return float(mu) - float(mu1)


def gk(p: AxisymmetricProfile, k: int):
    """g_k = mu_{2^k - 1} - mu_{2^(k-1) - 1}, k >= 2."""
    k = _check_k(k, 2)
    if k > 26:
        raise ArgumentError("g_k by direct sampling is limited to k <= 26")
    a = muk_axisymmetric(p, 2**k - 1)
    b = muk_axisymmetric(p, 2 ** (k - 1) - 1)
    if isinstance(a, Rational) and isinstance(b, Rational):
        return a - b
    return float(a) - float(b)


# --------------------------------------------------------------------------
# link placement


@dataclass(frozen=True)
class Circle:
    """One component of a monotone link placed on a tree.

    ``label`` is "T1" (level circle on an edge), "T2" (inside the plateau of
    ``vertex``) or "T3" (near ``vertex``).  Edge circles record the edge and
    the cumulative measure from its first endpoint.  ``h_lo == h_hi`` when
    H is known to be constant on the circle.
    """

    label: str
    h_lo: object
    h_hi: object
    vertex: int | None = None
    edge: tuple | None = None
    position: object = None

    @property
    def exact(self) -> bool:
        return self.h_lo == self.h_hi

    def to_json(self) -> dict:
        d = {"label": self.label}
        if self.vertex is not None:
            d["vertex"] = self.vertex
        if self.edge is not None:
            d["edge"] = list(self.edge)
            d["position"] = format_number(self.position)
        if self.exact:
            d["h"] = format_number(self.h_lo)
        else:
            d["h_lo"] = format_number(self.h_lo)
            d["h_hi"] = format_number(self.h_hi)
        return d


@dataclass(frozen=True)
class LinkPlacement:
    """k circles on a measured tree whose complement has k+1 parts of area 1/(k+1)."""

    k: int
    circles: tuple
    complement_measures: tuple
    vertex_counts: dict = field(default_factory=dict, compare=False)

    def labels(self, label: str, vertex: int | None = None) -> list[Circle]:
        return [c for c in self.circles
                if c.label == label and (vertex is None or c.vertex == vertex)]

    def to_json(self) -> dict:
        return {"k": self.k, "circles": [c.to_json() for c in self.circles],
                "complement_measures": [format_number(m) for m in self.complement_measures]}


def _h_bounds(x):
    if isinstance(x, Interval):
        return x.lo, x.hi
    return x, x


def _sufficient_min_k(t: MeasuredReebTree) -> int:
    """Least k with 3/(k+1) < mu(e) for every edge (sufficient for placement)."""
    if not t.edges:
        return 1
    m = min(Fraction(e.measure) if isinstance(e.measure, Rational) else e.measure for e in t.edges)
    return max(1, math.floor(3 / m))


def min_admissible_k(t: MeasuredReebTree) -> int:
    """Least k0 such that `place_link` succeeds for every k >= k0.

    Every k above the sufficient bound succeeds, so only the range below
    it is searched.
    """
    k0 = _sufficient_min_k(t)
    while k0 > 1:
        try:
            _place(t, k0 - 1)
        except _TooSmall:
            break
        k0 -= 1
    return k0


class _TooSmall(Exception):
    pass


def place_link(t: MeasuredReebTree, k: int) -> LinkPlacement:
    """Monotone link with k components adapted to the tree.

    Around each vertex v_i a neighbourhood V_i is cut out by one level
    circle x_{i,j} on every incident edge, at measure r_{i,j} from v_i with
    r_{i,j} in (0, 1/(k+1)] chosen so that the branch beyond x_{i,j} has
    measure in (1/(k+1))Z.  The rest of each edge is cut into pieces of
    measure 1/(k+1) by level circles (T1).  Inside V_i, floor((k+1) m_i)
    circles lie in the plateau (T2, H = H(v_i)) and the remaining ones
    (T3) only have H within the range of H over V_i; enough of the
    x_{i,j} are relabelled T3 for vertex i that |T3(i)| = val(v_i) - 1.

    Raises `KTooSmallError` when the neighbourhoods of the two ends of an
    edge would overlap.
    """
    k = _check_k(k)
    try:
        return _place(t, k)
    except _TooSmall:
        raise KTooSmallError(k, min_admissible_k(t)) from None


def _place(t: MeasuredReebTree, k: int) -> LinkPlacement:
    N = k + 1
    u = Fraction(1, N)
    exact = isinstance(t.total_measure(), Rational)
    if not exact:
        raise DomainError("link placement needs rational masses and measures")

    # offsets r_{i,j}
    r: dict = {}
    for v in t.vertices:
        for idx in t._adj[v.id]:
            a = t.branch_measure(v.id, idx)
            r[(v.id, idx)] = a - u * (math.ceil(a * N) - 1)
    for idx, e in enumerate(t.edges):
        if r[(e.u, idx)] + r[(e.v, idx)] > e.measure:
            raise _TooSmall()

    circles: list[Circle] = []
    pieces: list = []
    counts: dict = {}
    x_circles: dict = {}  # (vertex, edge idx) -> position in circles
    for idx, e in enumerate(t.edges):
        ru, rv = r[(e.u, idx)], r[(e.v, idx)]
        positions = [ru]
        gap = e.measure - ru - rv
        nsub = gap / u
        assert nsub.denominator == 1, "offset arithmetic failed"
        positions.extend(ru + j * u for j in range(1, int(nsub)))
        if gap > 0:
            positions.append(e.measure - rv)
        for j, s in enumerate(positions):
            lo, hi = _h_bounds(e.h_at(s))
            circles.append(Circle("T1", lo, hi, None, (e.u, e.v), s))
            if j == 0:
                x_circles[(e.u, idx)] = len(circles) - 1
            if j == len(positions) - 1:
                x_circles[(e.v, idx)] = len(circles) - 1
        pieces.extend(b - a for a, b in zip(positions, positions[1:]))

    claimed: set = set()
    for v in t.vertices:
        val = t.valence(v.id)
        mu_v = v.mass + sum((r[(v.id, idx)] for idx in t._adj[v.id]), Fraction(0))
        n_inside = mu_v * N - 1
        assert n_inside.denominator == 1 and n_inside >= 0, "vertex neighbourhood not quantized"
        n_inside = int(n_inside)
        S = math.floor(N * v.mass)
        B = val - 1
        if val == 0:
            S, B = n_inside, 0  # constant Hamiltonian: every circle lies in the plateau
        n_t3_inside = n_inside - S
        relabel = S + B - n_inside
        # H range over V_i: vertex value and the x_{i,j} circles
        ends = [v.h] + [circles[x_circles[(v.id, idx)]].h_lo for idx in t._adj[v.id]] \
            + [circles[x_circles[(v.id, idx)]].h_hi for idx in t._adj[v.id]]
        h_lo, h_hi = min(ends, key=float), max(ends, key=float)
        circles.extend(Circle("T2", v.h, v.h, v.id) for _ in range(S))
        circles.extend(Circle("T3", h_lo, h_hi, v.id) for _ in range(n_t3_inside))
        pieces.extend([mu_v / (n_inside + 1)] * (n_inside + 1))
        taken = 0
        for idx in sorted(t._adj[v.id]):
            if taken == relabel:
                break
            ci = x_circles[(v.id, idx)]
            if ci in claimed:
                continue
            c = circles[ci]
            circles[ci] = Circle("T3", c.h_lo, c.h_hi, v.id, c.edge, c.position)
            claimed.add(ci)
            taken += 1
        if taken < relabel:
            raise _TooSmall()
        counts[v.id] = {"T2": S, "T3": B if val else 0, "S": math.floor(N * v.mass), "B": val - 1}
    if len(circles) != k:
        raise _TooSmall()
    return LinkPlacement(k, tuple(circles), tuple(pieces), counts)


def muk_bounds(t: MeasuredReebTree, k: int) -> tuple:
    """(lo, hi) with lo <= mu_k(H) <= hi from the placed link."""
    link = place_link(t, k)
    lo = _exact_sum([c.h_lo for c in link.circles])
    hi = _exact_sum([c.h_hi for c in link.circles])
    return lo / k, hi / k


def audit_placement(t: MeasuredReebTree, link: LinkPlacement) -> list[str]:
    """Check a placement against the monotone-link structure; returns problems."""
    problems = []
    k = link.k
    if len(link.circles) != k:
        problems.append(f"{len(link.circles)} circles for k={k}")
    if len(link.complement_measures) != k + 1:
        problems.append(f"{len(link.complement_measures)} complement parts")
    if any(m != Fraction(1, k + 1) for m in link.complement_measures):
        problems.append("complement measure differs from 1/(k+1)")
    if sum(link.complement_measures) != 1:
        problems.append("complement measures do not sum to 1")
    for v in t.vertices:
        val = t.valence(v.id)
        if val == 0:
            continue
        if len(link.labels("T2", v.id)) != math.floor((k + 1) * v.mass):
            problems.append(f"|T2({v.id})| != floor((k+1) m)")
        if len(link.labels("T3", v.id)) != val - 1:
            problems.append(f"|T3({v.id})| != val - 1")
    return problems


# --------------------------------------------------------------------------
# Weyl sequences


@dataclass
class WeylSequence:
    """Subleading sequence k -> k mu_k - (k+1) * (integral of H) and its limit."""

    entries: list
    target: object
    mode: str = "disc"
    extrapolated: float = math.nan
    extrapolation_error: float = math.inf

    @property
    def ks(self) -> list:
        return [e[0] for e in self.entries]

    def midpoints(self) -> list:
        return [(lo + hi) / 2 for _, lo, hi in self.entries]

    def to_csv_rows(self) -> list[list[str]]:
        rows = [["k", "lo", "hi", "midpoint", "target"]]
        for k, lo, hi in self.entries:
            rows.append([str(k), format_number(lo), format_number(hi),
                         format_number((lo + hi) / 2), format_number(self.target)])
        return rows


def weyl_sequence(obj: AxisymmetricProfile | MeasuredReebTree, k_values: Iterable[int],
                  mode: str = "disc") -> WeylSequence:
    """Values of k mu_k - (k+1) I for the given k, I the Calabi invariant or mean.

    ``mode="disc"`` uses f_k and the Calabi invariant with target
    -Ru/2; ``mode="sphere"`` uses mu_k and the integral of H over the
    sphere with target -(1/2) sum chi_i H(v_i).  Trees give interval
    entries from `muk_bounds`.
    """
    if mode not in ("disc", "sphere"):
        raise ArgumentError(f"mode must be 'disc' or 'sphere', got {mode!r}")
    if isinstance(obj, AxisymmetricProfile) and obj.singular:
        raise DomainError("singular profile: use the twists module or make_smoothing")
    tree = obj if isinstance(obj, MeasuredReebTree) else tree_from_profile(obj)
    if mode == "disc":
        integral = calabi(obj)
        target = -ruelle_tree(tree).value / 2
    else:
        integral = sphere_mean(obj)
        target = -sphere_chi_sum(tree) / 2
    entries = []
    for k in sorted(set(_check_k(k) for k in k_values)):
        if isinstance(obj, AxisymmetricProfile):
            mu = fk(obj, k) if mode == "disc" else muk_axisymmetric(obj, k)
            lo = hi = k * mu - (k + 1) * integral
        else:
            blo, bhi = muk_bounds(obj, k)
            lo, hi = k * blo - (k + 1) * integral, k * bhi - (k + 1) * integral
        entries.append((k, lo, hi))
    seq = WeylSequence(entries, target, mode)
    if len(entries) >= 4:
        seq.extrapolated, seq.extrapolation_error = extrapolate_limit(seq)
    return seq


def _neville(xs: Sequence[float], ys: Sequence[float], x: float = 0.0) -> float:
    p = list(ys)
    n = len(xs)
    for m in range(1, n):
        for i in range(n - m):
            p[i] = ((x - xs[i + m]) * p[i] + (xs[i] - x) * p[i + 1]) / (xs[i] - xs[i + m])
    return p[0]


def extrapolate_limit(s: WeylSequence | Sequence, order: int = 2) -> tuple[float, float]:
    """Richardson extrapolation in 1/k of the interval midpoints.

    Fits a polynomial of degree ``order`` in eps = 1/k through the last
    order+1 midpoints (Neville) and evaluates at eps = 0.  The error is the
    change from the previous window plus the largest interval half-width.
    A sequence whose successive window estimates do not contract, or that
    is not finite, is flagged by returning ``(estimate, inf)``.
    """
    if isinstance(s, WeylSequence):
        entries = s.entries
    else:
        entries = [(k, v, v) if not isinstance(v, tuple) else (k, *v) for k, v in s]
    if len(entries) < 4:
        raise ArgumentError("extrapolation needs at least 4 entries")
    ks = np.array([float(e[0]) for e in entries])
    mids = np.array([(float(lo) + float(hi)) / 2 for _, lo, hi in entries])
    half = max((float(hi) - float(lo)) / 2 for _, lo, hi in entries)
    if not np.all(np.isfinite(mids)):
        return math.nan, math.inf
    m = min(order + 1, len(entries) - 2)
    eps = 1.0 / ks
    est = [_neville(eps[j - m:j], mids[j - m:j]) for j in range(m, len(ks) + 1)]
    last = est[-1]
    inc = [abs(b - a) for a, b in zip(est, est[1:])]
    err = inc[-1] + half
    scale = 1e-9 * (1.0 + abs(last))
    if len(inc) >= 3 and inc[-1] > scale:
        tail = inc[-3:]
        if tail[-1] >= tail[0] and tail[-1] >= tail[1]:
            return float(last), math.inf
    if not math.isfinite(last):
        return float(last), math.inf
    return float(last), float(err)


# --------------------------------------------------------------------------
# prescribed signatures


def prescribe_fk_sequence(s: Sequence) -> AxisymmetricProfile:
    """Smooth profile with f_i = s_i for i = 2..K, zero on [-1, 0].

    With z_k = 1 - 2/(k+1) the largest sample point of mu_k, H is zero up
    to z_1 = 0 and constant near each z_k, with value fixed recursively by

        H(z_{k+1}) = (k+1) s_{k+1} - sum_{i<=k} H(-1 + 2i/(k+2)).

    Between z_k and z_{k+1} H steps with the smooth step E inside a window
    that avoids every sample point of mu_m for m <= K, so all samples see
    exact rational plateau values and f_i = s_i holds exactly.
    """
    s = [Fraction(x) for x in s]
    K = len(s) + 1
    if K < 2:
        raise ArgumentError("need at least s_2")
    samples = sorted({Fraction(-1) + Fraction(2 * i, m + 1) for m in range(1, K + 1)
                      for i in range(1, m + 1)})

    def zk(k):
        return 1 - Fraction(2, k + 1)

    levels = {1: Fraction(0)}
    pieces_spec = []  # (z_k, window lo, window hi, value before, value after)

    def value_at(z):
        # H on [-1, z_k] from the levels fixed so far
        v = Fraction(0)
        for zlo, w0, w1, a, b in pieces_spec:
            if z > zlo:
                v = a if z <= w0 else b
        return v

    for k in range(1, K):
        total = sum((value_at(Fraction(-1) + Fraction(2 * i, k + 2)) for i in range(1, k + 1)),
                    Fraction(0))
        new = (k + 1) * s[k - 1] - total
        lo, hi = zk(k), zk(k + 1)
        inside = [x for x in samples if lo < x < hi]
        pts = [lo] + inside + [hi]
        g0, g1 = max(zip(pts, pts[1:]), key=lambda ab: (ab[1] - ab[0], -ab[0]))
        w = (g1 - g0) / 4
        pieces_spec.append((lo, g0 + w, g1 - w, levels[k], new))
        levels[k + 1] = new
    pieces = []
    z = Fraction(-1)
    cur = Fraction(0)
    for zlo, w0, w1, a, b in pieces_spec:
        if a == b:
            continue
        pieces.append(PolyPiece(z, w0, (a,)))
        pieces.append(BlendPiece(w0, w1, PolyPiece(w0, w1, (a,)), PolyPiece(w0, w1, (b,))))
        z, cur = w1, b
    pieces.append(PolyPiece(z, 1, (cur,)))
    return AxisymmetricProfile(pieces, "sphere", "prescribed")
