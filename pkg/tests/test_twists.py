from __future__ import annotations

import math

import mpmath
import numpy as np
import pytest

from subleading import PROFILE_RAMP, PROFILE_TWIST, calabi, sphere_twist_sequence, twist_T_sequence
from subleading.errors import ArgumentError, ResourceError
from subleading.model import PROFILE_SPHERE_TWIST
from subleading.spectral import fk, gk
from subleading.twists import (CERTIFIED, INCONCLUSIVE, S_direct, S_value, first_decreasing_index,
                               twist_integral)


def test_twist_integral_encloses_quadrature():
    iv = twist_integral()
    oracle = 2 * float(calabi(PROFILE_TWIST))
    assert iv.lo <= oracle + 1e-12 and oracle - 1e-12 <= iv.hi
    assert iv.hi - iv.lo < 1e-12
    # the global mpmath precision is untouched
    assert mpmath.mp.dps == 15


def test_twist_sequence_matches_direct_sum():
    cert = twist_T_sequence(60)
    cal = float(calabi(PROFILE_TWIST))
    for k, v, lo, hi in zip(cert.k_values, cert.sequence_values, cert.lo, cert.hi):
        direct = 2 * (k * float(fk(PROFILE_TWIST, int(k))) - (k + 1) * cal)
        assert v == pytest.approx(direct, abs=1e-9)
        assert lo - 1e-9 <= direct <= hi + 1e-9


def test_twist_certificate_small_range():
    cert = twist_T_sequence(2000)
    assert cert.verdict == CERTIFIED
    assert np.all(cert.hi <= -np.sqrt(cert.k_values + 1))
    assert cert.rows()[0][0] == 7 and cert.rows()[0][3] == CERTIFIED


def test_twist_sequence_decreasing():
    cert = twist_T_sequence(500)
    assert first_decreasing_index(cert.sequence_values) == 0


def test_twist_argument_checks():
    with pytest.raises(ArgumentError):
        twist_T_sequence(5)
    with pytest.raises(ArgumentError):
        twist_T_sequence(20, k_min=30)


def test_generic_profile_inconclusive():
    cert = twist_T_sequence(30, profile=PROFILE_RAMP)
    assert cert.verdict == INCONCLUSIVE


def test_S_values_against_direct_sum():
    for k in range(1, 18):
        assert float(S_value(k)) == pytest.approx(S_direct(k), rel=1e-13)
    assert float(S_value(2)) == pytest.approx(2 * (1 + 1 / math.sqrt(2) + 1 / math.sqrt(3)), abs=1e-14)


def test_sphere_twist_sequence():
    res = sphere_twist_sequence(40)
    assert all(v == CERTIFIED for v in res.verdicts)
    for k, g, lb in zip(res.k_values, res.gk_scaled_values, res.lower_bounds):
        assert g >= lb - 1e-9
    assert max(res.gk_scaled_values) >= 1e4
    assert max(res.C_values) < 3
    # scaled g_2 matches the sampled definition
    assert res.gk_scaled_values[0] == pytest.approx(3 * gk(PROFILE_SPHERE_TWIST, 2), abs=1e-12)


def test_sphere_twist_limits():
    with pytest.raises(ResourceError):
        sphere_twist_sequence(61)
    with pytest.raises(ArgumentError):
        sphere_twist_sequence(10, k_min=1)
