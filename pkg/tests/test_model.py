from __future__ import annotations

import json
import math
import random
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import random_pl_disc_profile, random_smooth_disc_profile
from subleading import (PROFILE_HEIGHT, PROFILE_RAMP, PROFILE_TENT, PROFILE_TWIST, PROFILE_ZERO,
                        AxisymmetricProfile, SphereModel, TriangulatedField, eval_profile,
                        make_smoothing)
from subleading.errors import ArgumentError, DomainError, SchemaError, StructuralError
from subleading.invariants import hofer_norm
from subleading.meshes import latlong_mesh
from subleading.model import FIXTURES, PolyPiece, smoothing_plateau


def test_sphere_model_normalization():
    m = SphereModel()
    assert m.total_area == 1 and m.disc_area == Fraction(1, 2)
    assert m.area_of_sublevel(-1) == 0
    assert m.area_of_sublevel(1) == 1
    assert m.area_of_sublevel(0) == Fraction(1, 2)
    assert m.z_of_area(Fraction(3, 4)) == Fraction(1, 2)
    with pytest.raises(DomainError):
        m.area_of_sublevel(Fraction(3, 2))


def test_eval_examples():
    assert eval_profile(PROFILE_RAMP, -0.75) == 0.5
    assert eval_profile(PROFILE_RAMP, Fraction(-3, 4)) == Fraction(1, 2)
    assert isinstance(eval_profile(PROFILE_RAMP, Fraction(-3, 4)), Fraction)
    assert eval_profile(PROFILE_TWIST, Fraction(-7, 8)) == 4
    assert eval_profile(PROFILE_TWIST, -0.875) == 4
    for z in (Fraction(-1), Fraction(-1, 3), 0.25, Fraction(1)):
        assert eval_profile(PROFILE_ZERO, z) == 0


def test_eval_singular_point_is_domain_error():
    with pytest.raises(DomainError):
        eval_profile(PROFILE_TWIST, -1)
    with pytest.raises(DomainError):
        eval_profile(PROFILE_RAMP, Fraction(3, 2))


def test_ramp_is_continuous_at_breakpoint():
    assert PROFILE_RAMP(Fraction(-1, 2)) == 0
    assert PROFILE_RAMP(Fraction(-1)) == 1


def test_disc_support_enforced():
    with pytest.raises(StructuralError) as info:
        AxisymmetricProfile([PolyPiece(-1, 1, (1,))], "disc")
    assert info.value.invariant == "disc-support"


def test_discontinuity_rejected():
    with pytest.raises(StructuralError) as info:
        AxisymmetricProfile([PolyPiece(-1, 0, (1,)), PolyPiece(0, 1, (0,))], "sphere")
    assert info.value.invariant == "continuity"


def test_cover_required():
    with pytest.raises(StructuralError):
        AxisymmetricProfile([PolyPiece(-1, 0, ())], "sphere")


def test_bad_support_flag():
    with pytest.raises(SchemaError):
        AxisymmetricProfile([PolyPiece(-1, 1, ())], "torus")


def test_critical_values():
    assert PROFILE_RAMP.critical_values() == [0, 1]
    assert PROFILE_TENT.critical_values() == [0, 1]
    assert PROFILE_HEIGHT.critical_values() == [-1, 1]


def test_smoothing_twist():
    h3 = make_smoothing(PROFILE_TWIST, 3)
    assert not h3.singular
    plateau = 8 * math.sqrt(2)
    assert h3(-1) == pytest.approx(plateau)
    assert hofer_norm(h3) == pytest.approx(plateau, rel=1e-14)
    assert smoothing_plateau(3) == pytest.approx(plateau)
    # equals the base outside the cap
    for z in (-0.9, Fraction(-7, 8), -0.6, 0.3):
        assert float(h3(z)) == pytest.approx(float(PROFILE_TWIST(z)))
    # Hofer distance between consecutive smoothings is the plateau gap, <= 2^n sqrt 2
    h4 = make_smoothing(PROFILE_TWIST, 4)
    gap = float(h4(-1)) - float(h3(-1))
    assert gap <= 2**3 * math.sqrt(2) + 1e-12


def test_smoothing_monotone_on_cap():
    h2 = make_smoothing(PROFILE_TWIST, 2)
    zs = [-1 + j / 400 for j in range(400)]
    vals = [float(h2(z)) for z in zs]
    assert all(a >= b - 1e-12 for a, b in zip(vals, vals[1:]))


@pytest.mark.parametrize("n", [0, -1, 2.5])
def test_smoothing_bad_index(n):
    with pytest.raises(ArgumentError):
        make_smoothing(PROFILE_TWIST, n)


def test_smoothing_of_nonsingular_is_identity():
    assert make_smoothing(PROFILE_RAMP, 2) == PROFILE_RAMP


@pytest.mark.parametrize("name", sorted(FIXTURES))
def test_profile_json_roundtrip_fixtures(name):
    p = FIXTURES[name]
    doc = json.loads(json.dumps(p.to_json()))
    assert AxisymmetricProfile.from_json(doc) == p


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10**6))
def test_profile_json_roundtrip_random(seed):
    rng = random.Random(seed)
    for p in (random_pl_disc_profile(rng), random_smooth_disc_profile(rng)):
        q = AxisymmetricProfile.from_json(json.loads(json.dumps(p.to_json())))
        assert q == p
        for z in (Fraction(-9, 10), Fraction(-1, 3), Fraction(1, 2)):
            assert q(z) == p(z)


def test_profile_schema_errors():
    with pytest.raises(SchemaError):
        AxisymmetricProfile.from_json({"support": "disc"})
    with pytest.raises(SchemaError):
        AxisymmetricProfile.from_json({"pieces": [{"kind": "mystery", "from": "-1", "to": "1"}]})
    with pytest.raises(SchemaError):
        AxisymmetricProfile.from_json({"pieces": [{"kind": "poly", "from": -1.0, "to": "1"}]})


def test_integral_exact_for_pl():
    total, err = PROFILE_RAMP.integral()
    assert total == Fraction(1, 4) and err == 0
    total, _ = PROFILE_TENT.integral()
    assert total == Fraction(2, 5)


def test_triangulated_field_validation():
    f = latlong_mesh(PROFILE_RAMP, 4, 3)
    assert sum(f.areas) == 1
    assert len(f.triangles) == 2 * 3 * 3
    g = TriangulatedField.from_json(json.loads(json.dumps(f.to_json())))
    assert g == f
    with pytest.raises(StructuralError) as info:
        TriangulatedField(f.heights, f.triangles, [a * 2 for a in f.areas])
    assert info.value.invariant == "total-area"
    with pytest.raises(StructuralError):
        TriangulatedField(f.heights, f.triangles[:-1], list(f.areas[:-2]) + [f.areas[-2] * 2])


def test_profile_algebra():
    two = PROFILE_RAMP + PROFILE_RAMP
    assert two(Fraction(-3, 4)) == 1
    assert PROFILE_RAMP.scaled(3)(Fraction(-1)) == 3
    shifted = PROFILE_RAMP.shifted(Fraction(1, 2))
    assert shifted.support == "sphere"
    assert shifted(Fraction(1)) == Fraction(1, 2)
