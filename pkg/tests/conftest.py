from __future__ import annotations

import random
from fractions import Fraction

import pytest

from subleading.model import AxisymmetricProfile, smooth_staircase

_ACCEPTANCE: list[tuple[int, str, bool, str]] = []


class AcceptanceRecorder:
    """Collects one line per acceptance criterion for the terminal summary."""

    def __call__(self, number: int, title: str, ok: bool, detail: str = "") -> bool:
        _ACCEPTANCE.append((number, title, bool(ok), detail))
        print(_format(number, title, ok, detail))
        return bool(ok)


def _format(number, title, ok, detail):
    status = "PASS" if ok else "FAIL"
    return f"[{status}] criterion {number:2d}: {title}" + (f" ({detail})" if detail else "")


@pytest.fixture
def acceptance() -> AcceptanceRecorder:
    return AcceptanceRecorder()


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number, title, ok, detail in sorted(_ACCEPTANCE, key=lambda r: r[0]):
        terminalreporter.write_line(_format(number, title, ok, detail))


# --------------------------------------------------------------------------
# seeded generators shared by several test modules


def random_pl_disc_profile(rng: random.Random, n_knots: int = 4) -> AxisymmetricProfile:
    """Piecewise-linear disc profile with rational knots, zero from some z0 < 0 on."""
    z0 = Fraction(-rng.randint(1, 9), 10)
    inner = sorted({Fraction(-1) + (z0 + 1) * Fraction(rng.randint(1, 99), 100)
                    for _ in range(n_knots)})
    zs = [Fraction(-1)] + inner + [z0, Fraction(1)]
    vals = [Fraction(rng.randint(-6, 6), rng.randint(1, 4)) for _ in zs[:-2]] + [0, 0]
    return AxisymmetricProfile.piecewise_linear(zs, vals, "disc")


def random_smooth_disc_profile(rng: random.Random) -> AxisymmetricProfile:
    """Smooth staircase on the disc: a few smooth steps ending at value 0."""
    n = rng.randint(1, 3)
    cuts = sorted(rng.sample(range(1, 50), 2 * n))
    zs = [Fraction(-1) + Fraction(c, 50) for c in cuts]  # inside (-1, 0)
    values = [Fraction(0)]
    for _ in range(n):
        v = Fraction(0)
        while v == values[0]:
            v = Fraction(rng.randint(-8, 8), rng.randint(1, 3))
        values.insert(0, v)
    steps = [(zs[2 * j], zs[2 * j + 1], values[j], values[j + 1]) for j in range(n)]
    return smooth_staircase(steps, "disc")
