"""Divergence certificates for the disc twist T and the sphere twist T'.

Disc twist.  With h = sqrt(2/(1+z)) near the pole, the sample a_i =
-1 + 2i/(k+1) gives h(a_i) = sqrt((k+1)/i) whenever a_i <= -3/4, i.e.
i <= (k+1)/8.  The subleading quantity

    D_k = 2 (k f_k(T) - (k+1) Cal(T)) = 2 sum_i h(a_i) - (k+1) int h dz

is enclosed in an interval for every k and compared with -h(a_1) =
-sqrt(k+1).

Sphere twist.  For F(z) = sqrt(2/(1+z)) on the whole sphere,
mu_{2^k-1} = S(k)/(2^k - 1) with S(k) = sqrt(2^k) sum_{i<2^k} i^(-1/2), and

    (2^k - 1) g_k(T') = S(k) - 2 S(k-1) - S(k-1)/(2^(k-1) - 1).

The partial sums of i^(-1/2) are evaluated through the Hurwitz zeta
function, sum_{i<=M} i^(-1/2) = zeta(1/2) - zeta(1/2, M+1).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import mpmath
import numpy as np
from numba import njit

from .errors import ArgumentError, ResourceError
from .exact import Interval
from .model import PROFILE_TWIST, AxisymmetricProfile
from .spectral import _check_k, fk
from .invariants import calabi

U = 2.0**-53  # unit roundoff

CERTIFIED = "certified-divergent"
INCONCLUSIVE = "inconclusive"


@dataclass
class DivergenceCertificate:
    """Values of D_k with enclosures, their upper bounds and a verdict."""

    k_values: np.ndarray
    sequence_values: np.ndarray
    upper_bounds: np.ndarray
    verdict: str
    lo: np.ndarray = field(default=None, repr=False)
    hi: np.ndarray = field(default=None, repr=False)
    certified: np.ndarray = field(default=None, repr=False)

    def rows(self) -> list[tuple]:
        out = []
        for j, k in enumerate(self.k_values):
            ok = bool(self.certified[j]) if self.certified is not None else \
                self.sequence_values[j] <= self.upper_bounds[j]
            out.append((int(k), float(self.sequence_values[j]), float(self.upper_bounds[j]),
                        CERTIFIED if ok and self.verdict == CERTIFIED else INCONCLUSIVE))
        return out


# --------------------------------------------------------------------------
# disc twist


def twist_integral() -> Interval:
    """Enclosure of int_{-1}^{1} h dz for the twist profile.

    The closed-form part contributes sqrt(2) exactly; the cutoff part is
    integrated with mpmath at 30 digits.
    """
    with mpmath.workdps(30):
        c = mpmath.mpf(4)

        def integrand(z):
            s = c * (z + mpmath.mpf(3) / 4)
            if s <= 0:
                e = mpmath.mpf(0)
            elif s >= 1:
                e = mpmath.mpf(1)
            else:
                e = 1 / (1 + mpmath.exp(1 / s - 1 / (1 - s)))
            return mpmath.sqrt(2 / (1 + z)) * (1 - e)

        nodes = [mpmath.mpf(-3) / 4, mpmath.mpf(-5) / 8, mpmath.mpf(-1) / 2]
        cut, err = mpmath.quad(integrand, nodes, error=True)
        total = mpmath.sqrt(2) + cut
        tol = float(err) + 1e-25
    return Interval.around(float(total), tol + 2 * U * float(total))


@njit(cache=True)
def _cutoff_sums(kmin, kmax):
    """For each k: sum over the cutoff band of sqrt(N/i) (1 - E(8i/N - 1)), and of sqrt(N/i)."""
    n = kmax - kmin + 1
    vals = np.zeros(n)
    mags = np.zeros(n)
    cnt = np.zeros(n)
    for j in range(n):
        N = kmin + j + 1
        i0 = N // 8 + 1
        acc = 0.0
        mag = 0.0
        c = 0
        i = i0
        while 4 * i < N:
            s = 8.0 * i / N - 1.0
            r = np.sqrt(N / i)
            if s > 0.0:
                # 1 - E(s) = E(1 - s) = 1 / (1 + exp(1/(1-s) - 1/s))
                u = 1.0 / (1.0 - s) - 1.0 / s
                if u < 700.0:
                    acc += r / (1.0 + np.exp(u))
            else:
                acc += r
            mag += r
            c += 1
            i += 1
        vals[j] = acc
        mags[j] = mag
        cnt[j] = c
    return vals, mags, cnt


def twist_T_sequence(k_max: int, k_min: int = 7, profile: AxisymmetricProfile | None = None,
                     certify: bool = True) -> DivergenceCertificate:
    """D_k = 2(k f_k - (k+1) Cal) for k_min <= k <= k_max with upper bounds -h(a_1).

    For the twist profile every D_k is enclosed under a floating-point
    error model (one rounding per operation, 32 ulps per transcendental
    term) and compared with -sqrt(k+1); the verdict is
    ``certified-divergent`` when all comparisons hold.  Other profiles go
    through the generic exact/float evaluation and can only be certified if
    their bounds -h(a_1) are unbounded below, which is not checkable from
    finite data; they come back ``inconclusive``.
    """
    k_max = _check_k(k_max, 7)
    if k_min < 7 or k_min > k_max:
        raise ArgumentError("need 7 <= k_min <= k_max")
    if profile is not None and profile != PROFILE_TWIST:
        return _generic_sequence(profile, k_min, k_max)
    ks = np.arange(k_min, k_max + 1)
    Ns = ks + 1
    # prefix sums P(m) = sum_{i<=m} i^(-1/2), sequential so the error is at most (m+1) u P(m)
    m_max = int(Ns[-1] // 8)
    terms = 1.0 / np.sqrt(np.arange(1, m_max + 1, dtype=float))
    prefix = np.concatenate([[0.0], np.cumsum(terms)])
    cut, mag, cnt = _cutoff_sums(int(ks[0]), int(ks[-1]))
    I = twist_integral()
    lo = np.empty(len(ks))
    hi = np.empty(len(ks))
    mid = np.empty(len(ks))
    bound = np.empty(len(ks))
    ok = np.zeros(len(ks), dtype=bool)
    for j, N in enumerate(Ns):
        N = int(N)
        m1 = N // 8
        P = prefix[m1]
        p_iv = Interval.around(P, (m1 + 2) * U * P)
        sq = Interval.sqrt_of(N)
        closed = sq * p_iv
        c_err = 32 * U * mag[j] + (cnt[j] + 2) * U * mag[j]
        cut_iv = Interval.around(cut[j], c_err)
        total = closed + cut_iv
        val = total * 2 - I * N
        lo[j], hi[j] = val.lo, val.hi
        mid[j] = 2 * (math.sqrt(N) * P + cut[j]) - N * I.mid
        b = -sq
        bound[j] = -math.sqrt(N)
        ok[j] = val.hi <= b.lo if certify else mid[j] <= bound[j]
    verdict = CERTIFIED if ok.all() else INCONCLUSIVE
    return DivergenceCertificate(ks, mid, bound, verdict, lo, hi, ok)


def _generic_sequence(p: AxisymmetricProfile, k_min: int, k_max: int) -> DivergenceCertificate:
    # finite data cannot show -h(a_1) -> -inf for an arbitrary profile
    ks = np.arange(k_min, k_max + 1)
    cal = float(calabi(p))
    vals = np.array([2 * (k * float(fk(p, int(k))) - (k + 1) * cal) for k in ks])
    bounds = np.array([0.0 - float(p(Fraction(-1) + Fraction(2, int(k) + 1))) for k in ks])
    return DivergenceCertificate(ks, vals, bounds, INCONCLUSIVE, vals, vals,
                                 np.zeros(len(ks), dtype=bool))


def first_decreasing_index(values: np.ndarray) -> int:
    """Smallest j such that values[j:] is strictly decreasing."""
    inc = np.nonzero(np.diff(values) >= 0)[0]
    return 0 if len(inc) == 0 else int(inc[-1]) + 1


# --------------------------------------------------------------------------
# sphere twist


@dataclass
class SphereTwistResult:
    """S(k), (2^k - 1) g_k(T'), the lower bound and the monitored constant."""

    k_values: list
    S_values: list
    gk_scaled_values: list
    lower_bounds: list
    growth_bounds: list
    C_values: list
    verdicts: list

    def rows(self) -> list[tuple]:
        return [(k, float(v), float(b), verdict) for k, v, b, verdict in
                zip(self.k_values, self.gk_scaled_values, self.lower_bounds, self.verdicts)]


def _partial_zeta_half(M: int):
    """sum_{i=1}^{M} i^(-1/2) at the current mpmath precision."""
    if M <= 0:
        return mpmath.mpf(0)
    return mpmath.zeta(mpmath.mpf(1) / 2) - mpmath.zeta(mpmath.mpf(1) / 2, M + 1)


def S_value(k: int, dps: int = 40):
    """S(k) = sqrt(2^k) sum_{i=1}^{2^k - 1} i^(-1/2) as an mpmath number."""
    with mpmath.workdps(dps):
        return mpmath.sqrt(mpmath.mpf(2) ** k) * _partial_zeta_half(2**k - 1)


def S_direct(k: int) -> float:
    """Direct correctly-rounded-sum oracle for S(k) (practical for k <= 24)."""
    n = 2**k
    return math.sqrt(n) * math.fsum(1.0 / math.sqrt(i) for i in range(1, n))


def sphere_twist_sequence(k_max: int, k_min: int = 2, C_max: float = 3.0,
                          dps: int = 40) -> SphereTwistResult:
    """S(k) and (2^k - 1) g_k(T') for k_min <= k <= k_max.

    The verdict for k is ``certified-divergent`` when the growth bound
    S(k) - 2 S(k-1) >= sqrt(2^k)(1 - 1/sqrt 2) holds with a margin well above
    the working precision and the monitored constant S(k-1)/(2^(k-1) - 1)
    stays below ``C_max``; the scaled g_k then exceeds
    sqrt(2^k)(1 - 1/sqrt 2) - C_max, which is unbounded in k.
    """
    if isinstance(k_max, bool) or not isinstance(k_max, int):
        raise ArgumentError("k_max must be an integer")
    if k_max > 60:
        raise ResourceError("k_max > 60 exceeds the supported range")
    if k_min < 2 or k_max < k_min:
        raise ArgumentError("need 2 <= k_min <= k_max")
    ks, Ss, gs, lbs, grow, Cs, verdicts = [], [], [], [], [], [], []
    with mpmath.workdps(dps):
        tol = mpmath.mpf(10) ** (-(dps - 10))
        S_prev = S_value(k_min - 1, dps)
        for k in range(k_min, k_max + 1):
            S = S_value(k, dps)
            C = S_prev / (2 ** (k - 1) - 1)
            g = S - 2 * S_prev - C
            growth = S - 2 * S_prev
            lb = mpmath.sqrt(mpmath.mpf(2) ** k) * (1 - 1 / mpmath.sqrt(2))
            ok = growth - lb > tol and C < C_max
            ks.append(k)
            Ss.append(float(S))
            gs.append(float(g))
            grow.append(float(growth))
            lbs.append(float(lb - C))
            Cs.append(float(C))
            verdicts.append(CERTIFIED if ok else INCONCLUSIVE)
            S_prev = S
    return SphereTwistResult(ks, Ss, gs, lbs, grow, Cs, verdicts)
