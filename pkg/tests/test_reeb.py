from __future__ import annotations

import json
import random
from fractions import Fraction

import networkx as nx
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import random_pl_disc_profile
from subleading import (PROFILE_HEIGHT, PROFILE_RAMP, PROFILE_TENT, PROFILE_TWIST, PROFILE_ZERO,
                        AxisymmetricProfile, MeasuredReebTree, TriangulatedField, tree_from_mesh,
                        tree_from_profile, tree_integral)
from subleading.errors import DomainError, StructuralError
from subleading.meshes import latlong_mesh, ridge_mesh, two_bump_mesh
from subleading.reeb import single_vertex_tree, two_bump_tree

F = Fraction


def _by_h(t):
    return sorted(((v.h, v.mass) for v in t.vertices), key=lambda x: (float(x[0]), float(x[1])))


def test_ramp_tree():
    t = tree_from_profile(PROFILE_RAMP)
    assert len(t.vertices) == 2 and len(t.edges) == 1
    b = t.vertex(t.boundary)
    assert (b.h, b.mass) == (0, F(3, 4))
    (other,) = [v for v in t.vertices if v.id != t.boundary]
    assert (other.h, other.mass) == (1, 0)
    assert t.edges[0].measure == F(1, 4)
    assert tree_integral(t) == F(1, 8)


def test_zero_tree():
    t = tree_from_profile(PROFILE_ZERO)
    assert len(t.vertices) == 1 and not t.edges
    assert t.vertices[0].mass == 1 and t.vertices[0].h == 0


def test_tent_tree():
    t = tree_from_profile(PROFILE_TENT)
    assert _by_h(t) == [(0, F(1, 20)), (0, F(11, 20)), (1, 0)]
    assert [e.measure for e in t.edges] == [F(1, 5), F(1, 5)]
    assert t.vertex(t.boundary).mass == F(11, 20)
    assert tree_integral(t) == F(1, 5)


def test_height_tree_is_a_segment():
    t = tree_from_profile(PROFILE_HEIGHT)
    assert _by_h(t) == [(-1, 0), (1, 0)]
    assert t.boundary is None
    assert t.edges[0].measure == 1
    assert tree_integral(t) == 0


def test_singular_profile_rejected():
    with pytest.raises(DomainError):
        tree_from_profile(PROFILE_TWIST)


def test_single_vertex_integral():
    assert tree_integral(single_vertex_tree(F(3, 7), boundary=False)) == F(3, 7)


def test_tree_json_roundtrip():
    for t in (tree_from_profile(PROFILE_RAMP), tree_from_profile(PROFILE_TENT), two_bump_tree()):
        doc = json.loads(json.dumps(t.to_json()))
        assert MeasuredReebTree.from_json(doc) == t


def test_tree_json_schema_example():
    doc = {"vertices": [{"id": 0, "h": "0", "mass": "3/4"}, {"id": 1, "h": "1", "mass": "0"}],
           "edges": [{"u": 0, "v": 1, "measure": "1/4", "h_param": [["0", "0"], ["1/4", "1"]]}],
           "boundary": 0}
    t = MeasuredReebTree.from_json(doc)
    assert tree_integral(t) == F(1, 8)
    assert t.vertex(0).mass == F(3, 4) and t.boundary == 0


def test_tree_invariants_enforced():
    doc = {"vertices": [{"id": 0, "h": "0", "mass": "1/2"}, {"id": 1, "h": "1", "mass": "0"}],
           "edges": [{"u": 0, "v": 1, "measure": "1/4", "h_param": [["0", "0"], ["1/4", "1"]]}],
           "boundary": 0}
    with pytest.raises(StructuralError):
        MeasuredReebTree.from_json(doc)  # total measure 3/4


def test_constant_mesh_single_vertex():
    f = latlong_mesh(lambda z: F(2), 4, 4)
    t = tree_from_mesh(f)
    assert len(t.vertices) == 1 and t.vertices[0].mass == 1 and t.vertices[0].h == 2


def test_two_bump_mesh_star():
    t = tree_from_mesh(two_bump_mesh(), boundary_value=0)
    assert len(t.vertices) == 3 and len(t.edges) == 2
    centre = t.vertex(t.boundary)
    assert centre.h == 0 and t.valence(centre.id) == 2
    assert sorted(v.h for v in t.vertices if v.id != centre.id) == [1, 2]
    assert t.total_measure() == 1


def test_ridge_mesh_four_vertex_star():
    t = tree_from_mesh(ridge_mesh(), boundary_value=0)
    assert len(t.vertices) == 4
    saddle = [v for v in t.vertices if t.valence(v.id) == 3]
    assert len(saddle) == 1 and saddle[0].h == F(3, 5)
    assert sorted(v.h for v in t.vertices) == [0, F(3, 5), 1, 1]
    assert sum(t.chi(v.id) for v in t.vertices) == 2


def _torus(n=3):
    idx = lambda i, j: (i % n) * n + (j % n)  # noqa: E731
    tris = []
    for i in range(n):
        for j in range(n):
            tris.append((idx(i, j), idx(i + 1, j), idx(i + 1, j + 1)))
            tris.append((idx(i, j), idx(i + 1, j + 1), idx(i, j + 1)))
    return tris


def test_non_sphere_rejected():
    tris = _torus()
    with pytest.raises(StructuralError) as info:
        TriangulatedField(list(range(9)), tris, [F(1, len(tris))] * len(tris))
    assert info.value.invariant == "genus-0"


def test_mesh_matches_profile_when_rings_hit_breakpoints():
    f = latlong_mesh(PROFILE_RAMP, 8, 6)  # ring at z = -1/2
    t = tree_from_mesh(f, boundary_value=0)
    ref = tree_from_profile(PROFILE_RAMP)
    assert nx.is_isomorphic(t.to_networkx(), ref.to_networkx())
    assert t.total_measure() == 1
    # the PL field integrates to sum(area * mean vertex value), its own exact oracle
    direct = sum(a * sum(f.heights[i] for i in tri) / 3 for tri, a in zip(f.triangles, f.areas))
    assert tree_integral(t) == direct
    assert t.vertex(t.boundary).mass == F(3, 4)


def test_mesh_refinement_converges():
    errs = []
    for rings in (9, 33, 129):
        t = tree_from_mesh(latlong_mesh(PROFILE_TENT, rings, 4), boundary_value=0)
        assert t.total_measure() == 1
        errs.append(abs(float(t.vertex(t.boundary).mass) - 0.55))
    assert errs[-1] < errs[0]


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10**6))
def test_euler_characteristic_sum(seed):
    t = tree_from_profile(random_pl_disc_profile(random.Random(seed)))
    assert sum(t.chi(v.id) for v in t.vertices) == 2
    assert t.total_measure() == 1


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10**6))
def test_conservation_of_integral(seed):
    p = random_pl_disc_profile(random.Random(seed))
    total, _ = p.integral()
    assert tree_integral(tree_from_profile(p)) == total / 2


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10**6), st.fractions(F(1, 100), F(99, 100)))
def test_subdivision_invariance(seed, frac):
    p = random_pl_disc_profile(random.Random(seed))
    pieces = []
    for pc in p.pieces:
        if not pieces:
            mid = pc.lo + (pc.hi - pc.lo) * frac
            pieces.extend([pc.restricted(pc.lo, mid), pc.restricted(mid, pc.hi)])
        else:
            pieces.append(pc)
    q = AxisymmetricProfile(pieces, "disc")
    tp, tq = tree_from_profile(p), tree_from_profile(q)
    assert _by_h(tp) == _by_h(tq)
    assert sorted(e.measure for e in tp.edges) == sorted(e.measure for e in tq.edges)
    assert tree_integral(tp) == tree_integral(tq)
