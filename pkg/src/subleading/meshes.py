"""Synthetic triangulated fields with exact rational areas.

The latitude-longitude triangulation has rings at z_j = -1 + 2j/R and
``n_theta`` vertices per ring.  Each band between consecutive rings has area
(z_{j+1} - z_j)/2, split evenly over its 2 * n_theta triangles; the polar
caps are fans of n_theta triangles.  Splitting each quad into two triangles
makes the PL sublevel area inside a band linear in the level, so sampling
a profile that is piecewise linear with breakpoints on rings reproduces its
measured Reeb tree exactly away from the caps.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Callable

from .errors import ArgumentError
from .model import AxisymmetricProfile, TriangulatedField


def latlong_mesh(h: AxisymmetricProfile | Callable, n_rings: int, n_theta: int,
                 values: dict | None = None) -> TriangulatedField:
    """Sample z -> h(z) on the lat-long triangulation.

    Parameters
    ----------
    h : profile or callable
        Evaluated at the exact rational ring heights.
    n_rings : int
        R; the mesh has R - 1 rings plus two poles and 2 * n_theta * (R - 1)
        triangles.
    n_theta : int
        Vertices per ring (>= 3).
    values : dict, optional
        Overrides {vertex index: value}, for planting non-axisymmetric
        features.

    Vertex 0 is the south pole, vertex 1 + (j - 1) * n_theta + i is the i-th
    vertex of ring j, and the last vertex is the north pole.
    """
    if n_rings < 2 or n_theta < 3:
        raise ArgumentError("need n_rings >= 2 and n_theta >= 3")
    R, T = n_rings, n_theta
    zs = [Fraction(-1) + Fraction(2 * j, R) for j in range(R + 1)]
    south, north = 0, 1 + (R - 1) * T

    def ring(j, i):
        return 1 + (j - 1) * T + (i % T)

    heights = [h(zs[0])] + [h(zs[j]) for j in range(1, R) for _ in range(T)] + [h(zs[R])]
    for k, v in (values or {}).items():
        heights[k] = v
    tris, areas = [], []
    cap = Fraction(1, R) / T  # (z_1 - z_0)/2 split over T triangles
    band = Fraction(1, R) / (2 * T)
    for i in range(T):
        tris.append((south, ring(1, i + 1), ring(1, i)))
        areas.append(cap)
    for j in range(1, R - 1):
        for i in range(T):
            a, b = ring(j, i), ring(j, i + 1)
            c, d = ring(j + 1, i), ring(j + 1, i + 1)
            tris.append((a, b, d))
            tris.append((a, d, c))
            areas.extend((band, band))
    for i in range(T):
        tris.append((north, ring(R - 1, i), ring(R - 1, i + 1)))
        areas.append(cap)
    return TriangulatedField(heights, tris, areas)


def ring_vertex(n_rings: int, n_theta: int, j: int, i: int) -> int:
    """Index of vertex i on ring j of `latlong_mesh`."""
    return 1 + (j - 1) * n_theta + (i % n_theta)


def ridge_mesh(n_rings: int = 8, n_theta: int = 12) -> TriangulatedField:
    """Two maxima (H = 1) joined over a saddle (H = 3/5) on a zero background.

    The three planted vertices are consecutive on the equator ring, so the
    middle one is a saddle.  Its Reeb tree is a 4-vertex star centred on the
    saddle: background, saddle, and two maxima.
    """
    j = n_rings // 2
    vals = {ring_vertex(n_rings, n_theta, j, 0): Fraction(1),
            ring_vertex(n_rings, n_theta, j, 1): Fraction(3, 5),
            ring_vertex(n_rings, n_theta, j, 2): Fraction(1)}
    return latlong_mesh(lambda z: Fraction(0), n_rings, n_theta, vals)


def two_bump_mesh(n_rings: int = 8, n_theta: int = 12) -> TriangulatedField:
    """Two separated single-vertex bumps of heights 1 and 2 on zero background."""
    j = n_rings // 2
    vals = {ring_vertex(n_rings, n_theta, j, 0): Fraction(1),
            ring_vertex(n_rings, n_theta, j, n_theta // 2): Fraction(2)}
    return latlong_mesh(lambda z: Fraction(0), n_rings, n_theta, vals)
