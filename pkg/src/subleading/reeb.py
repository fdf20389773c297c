"""Measured Reeb trees: the sphere modulo connected components of level sets.

A `MeasuredReebTree` keeps, for each vertex, the value of H and the area
(mass) of the level component it stands for, and for each edge the area of
the band of regular level circles it parametrizes together with H as a
strictly monotone function of the cumulative area measured from the edge's
first endpoint.

Trees are extracted either from an axisymmetric profile (a path graph along
z) or from a piecewise-linear field on a triangulated sphere (contour tree
by join/split sweeps).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from numbers import Rational
from typing import Callable, Sequence

from scipy import integrate

from .errors import DomainError, SchemaError, StructuralError
from .exact import Interval, format_number, parse_number, parse_rational, format_rational
from .model import AxisymmetricProfile, TriangulatedField

_FLOAT_TOL = 1e-9


def _close(a, b, tol=_FLOAT_TOL) -> bool:
    if isinstance(a, Rational) and isinstance(b, Rational):
        return a == b
    return math.isclose(float(a), float(b), rel_tol=tol, abs_tol=tol)


def _exact_sum(values):
    total = Fraction(0)
    for v in values:
        total = total + v if isinstance(total, Rational) and isinstance(v, Rational) \
            else float(total) + float(v)
    return total


@dataclass(frozen=True)
class TreeVertex:
    id: int
    h: object
    mass: object


@dataclass(frozen=True)
class TreeEdge:
    """Edge u -> v; ``h_param`` lists (cumulative measure from u, H).

    ``linear`` says H is affine in the measure between consecutive
    breakpoints.  Otherwise ``h_func`` (if given) evaluates H at a
    cumulative measure, and without it only brackets are known.
    ``integral``, when known, is the exact integral of H over the edge.
    """

    u: int
    v: int
    measure: object
    h_param: tuple
    linear: bool = True
    integral: object = None
    h_func: Callable | None = field(default=None, compare=False, repr=False)

    def h_at(self, s):
        """H at cumulative measure s from u: exact value, or an `Interval`."""
        if not 0 <= s <= self.measure:
            raise DomainError(f"measure {s} outside edge [0, {self.measure}]")
        pts = self.h_param
        for (s0, h0), (s1, h1) in zip(pts, pts[1:]):
            if s0 <= s <= s1:
                if s == s0:
                    return h0
                if s == s1:
                    return h1
                if self.linear:
                    return h0 + (h1 - h0) * (s - s0) / (s1 - s0)
                if self.h_func is not None:
                    return self.h_func(s)
                lo, hi = (h0, h1) if h0 <= h1 else (h1, h0)
                return Interval(Interval.point(lo).lo, Interval.point(hi).hi)
        return pts[-1][1]

    def h_range(self, s0, s1) -> tuple:
        """(min, max) of H over the cumulative-measure window [s0, s1]."""
        a, b = self.h_at(s0), self.h_at(s1)
        vals = []
        for x in (a, b):
            vals.extend([x.lo, x.hi] if isinstance(x, Interval) else [x])
        return min(vals, key=float), max(vals, key=float)

    def edge_integral(self):
        if self.integral is not None:
            return self.integral
        if self.linear:
            return _exact_sum((s1 - s0) * (h0 + h1) / 2
                              for (s0, h0), (s1, h1) in zip(self.h_param, self.h_param[1:]))
        if self.h_func is None:
            raise DomainError("edge integral unknown: nonlinear edge without evaluator")
        val, _ = integrate.quad(lambda s: float(self.h_func(s)), 0.0, float(self.measure),
                                epsabs=1e-14, epsrel=1e-13, limit=200)
        return val

    def reversed(self) -> "TreeEdge":
        m = self.measure
        hp = tuple((m - s, h) for s, h in reversed(self.h_param))
        f = None if self.h_func is None else (lambda s, g=self.h_func: g(m - s))
        return TreeEdge(self.v, self.u, m, hp, self.linear, self.integral, f)


class MeasuredReebTree:
    """Finite tree with vertex masses, edge measures and H along edges.

    Parameters
    ----------
    vertices : sequence of TreeVertex
    edges : sequence of TreeEdge
    boundary : int, optional
        Id of the vertex containing the boundary of the disc (H = 0 there).
    """

    def __init__(self, vertices: Sequence[TreeVertex], edges: Sequence[TreeEdge],
                 boundary: int | None = None, validate: bool = True):
        self.vertices = tuple(vertices)
        self.edges = tuple(edges)
        self.boundary = boundary
        self._by_id = {v.id: v for v in self.vertices}
        self._adj: dict = {v.id: [] for v in self.vertices}
        for idx, e in enumerate(self.edges):
            if e.u not in self._adj or e.v not in self._adj:
                raise StructuralError(f"edge ({e.u}, {e.v}) names an unknown vertex", "tree")
            self._adj[e.u].append(idx)
            self._adj[e.v].append(idx)
        if validate:
            self.validate()

    # structure -----------------------------------------------------------
    def vertex(self, vid) -> TreeVertex:
        return self._by_id[vid]

    def incident(self, vid) -> list[TreeEdge]:
        return [self.edges[i] for i in self._adj[vid]]

    def valence(self, vid) -> int:
        return len(self._adj[vid])

    def chi(self, vid) -> int:
        """chi_i = 2 - val(v_i)."""
        return 2 - self.valence(vid)

    def neighbors(self, vid) -> list[int]:
        return [e.v if e.u == vid else e.u for e in self.incident(vid)]

    def oriented(self, idx: int, start: int) -> TreeEdge:
        """Edge ``idx`` oriented to start at vertex ``start``."""
        e = self.edges[idx]
        return e if e.u == start else e.reversed()

    def total_measure(self):
        return _exact_sum([v.mass for v in self.vertices] + [e.measure for e in self.edges])

    def branch_measure(self, vid, idx: int):
        """Measure of the component of G minus {vid} that contains edge ``idx``."""
        e = self.edges[idx]
        first = e.v if e.u == vid else e.u
        total = e.measure
        seen = {vid, first}
        stack = [first]
        while stack:
            x = stack.pop()
            total = total + self._by_id[x].mass
            for j in self._adj[x]:
                f = self.edges[j]
                y = f.v if f.u == x else f.u
                if y not in seen:
                    seen.add(y)
                    total = total + f.measure
                    stack.append(y)
        return total

    def validate(self):
        n = len(self.vertices)
        if n == 0:
            raise StructuralError("tree has no vertices", "tree")
        if len(self._by_id) != n:
            raise StructuralError("duplicate vertex ids", "tree")
        if len(self.edges) != n - 1:
            raise StructuralError(f"{len(self.edges)} edges for {n} vertices: not a tree", "tree")
        seen = {self.vertices[0].id}
        stack = [self.vertices[0].id]
        while stack:
            x = stack.pop()
            for y in self.neighbors(x):
                if y not in seen:
                    seen.add(y)
                    stack.append(y)
        if len(seen) != n:
            raise StructuralError("tree is disconnected", "tree")
        for v in self.vertices:
            if v.mass < 0:
                raise StructuralError(f"negative mass at vertex {v.id}", "mass")
        for e in self.edges:
            if not e.measure > 0:
                raise StructuralError(f"edge ({e.u}, {e.v}) has non-positive measure", "measure")
            hp = e.h_param
            if len(hp) < 2 or hp[0][0] != 0 or not _close(hp[-1][0], e.measure):
                raise StructuralError(f"edge ({e.u}, {e.v}) h_param must span [0, measure]",
                                      "h-monotone")
            sign = None
            for (s0, h0), (s1, h1) in zip(hp, hp[1:]):
                if not s1 > s0:
                    raise StructuralError("h_param measures must increase", "h-monotone")
                d = (h1 > h0) - (h1 < h0)
                if d == 0 or (sign is not None and d != sign):
                    raise StructuralError(f"H not strictly monotone on edge ({e.u}, {e.v})",
                                          "h-monotone")
                sign = d
            if not (_close(hp[0][1], self._by_id[e.u].h) and _close(hp[-1][1], self._by_id[e.v].h)):
                raise StructuralError(f"edge ({e.u}, {e.v}) endpoint H mismatch", "h-endpoints")
        total = self.total_measure()
        if not _close(total, 1):
            raise StructuralError(f"total measure {total} != 1", "total-measure")
        if self.boundary is not None:
            if self.boundary not in self._by_id:
                raise StructuralError("boundary vertex missing", "boundary")
            if self._by_id[self.boundary].h != 0:
                raise StructuralError("boundary vertex must have H = 0", "boundary")

    # serialization -------------------------------------------------------
    def to_json(self) -> dict:
        out = {
            "vertices": [{"id": v.id, "h": format_number(v.h), "mass": format_number(v.mass)}
                         for v in self.vertices],
            "edges": [],
            "boundary": self.boundary,
        }
        for e in self.edges:
            d = {"u": e.u, "v": e.v, "measure": format_number(e.measure),
                 "h_param": [[format_number(s), format_number(h)] for s, h in e.h_param]}
            if not e.linear:
                d["linear"] = False
            if e.integral is not None:
                d["integral"] = format_number(e.integral)
            out["edges"].append(d)
        return out

    @classmethod
    def from_json(cls, d: dict) -> "MeasuredReebTree":
        try:
            vs = [TreeVertex(int(v["id"]), parse_number(v["h"]), parse_number(v["mass"]))
                  for v in d["vertices"]]
            es = []
            for e in d["edges"]:
                integ = parse_number(e["integral"]) if "integral" in e else None
                es.append(TreeEdge(int(e["u"]), int(e["v"]), parse_number(e["measure"]),
                                   tuple((parse_number(s), parse_number(h)) for s, h in e["h_param"]),
                                   bool(e.get("linear", True)), integ))
        except (KeyError, TypeError, ValueError) as exc:
            raise SchemaError(f"malformed tree JSON: {exc}") from exc
        b = d.get("boundary")
        return cls(vs, es, None if b is None else int(b))

    def __eq__(self, other):
        return isinstance(other, MeasuredReebTree) and self.to_json() == other.to_json()

    def __hash__(self):
        return hash(str(self.to_json()))

    def __repr__(self):
        return f"MeasuredReebTree({len(self.vertices)} vertices, boundary={self.boundary})"

    # graph view ----------------------------------------------------------
    def to_networkx(self):
        import networkx as nx

        g = nx.Graph()
        for v in self.vertices:
            g.add_node(v.id, h=v.h, mass=v.mass)
        for e in self.edges:
            g.add_edge(e.u, e.v, measure=e.measure)
        return g


def tree_integral(t: MeasuredReebTree):
    """Integral of H over the sphere, computed on the tree.

    Sum of m_i H(v_i) plus the integral of H along each edge; exact for
    rational data with piecewise-linear edges or stored edge integrals.
    """
    return _exact_sum([v.mass * v.h for v in t.vertices] + [e.edge_integral() for e in t.edges])


def single_vertex_tree(h=0, boundary: bool = True) -> MeasuredReebTree:
    """Tree of a constant Hamiltonian."""
    h = Fraction(h) if isinstance(h, Rational) else h
    return MeasuredReebTree([TreeVertex(0, h, Fraction(1))], [], 0 if boundary and h == 0 else None)


def star_tree(center_h, center_mass, arms: Sequence[tuple], boundary: int | None = None,
              center_parent: tuple | None = None) -> MeasuredReebTree:
    """Build a star (or a star hanging off a root) with linear edges.

    Parameters
    ----------
    center_h, center_mass :
        Value and mass of the central vertex (id 1 if ``center_parent`` is
        given, else id 0).
    arms : list of (h, mass, measure)
        Leaves attached to the centre by linear edges.
    center_parent : (h, mass, measure), optional
        Extra root vertex (id 0) attached to the centre, e.g. the disc
        boundary component.
    """
    vs, es = [], []
    cid = 0
    nid = 0
    if center_parent is not None:
        ph, pm, pmeas = (Fraction(x) if isinstance(x, Rational) else x for x in center_parent)
        vs.append(TreeVertex(0, ph, pm))
        cid = 1
        es.append(TreeEdge(0, 1, pmeas, ((Fraction(0), ph), (pmeas, center_h))))
    vs.append(TreeVertex(cid, center_h, center_mass))
    nid = cid + 1
    for h, m, meas in arms:
        vs.append(TreeVertex(nid, h, m))
        es.append(TreeEdge(cid, nid, meas, ((Fraction(0), center_h), (meas, h))))
        nid += 1
    return MeasuredReebTree(vs, es, boundary)


def two_bump_tree() -> MeasuredReebTree:
    """Star tree of two maxima over a saddle, on a zero background.

    Boundary component (H = 0, mass 1/2) -- saddle (H = 3/5) -- two maxima
    at H = 1.  Masses and measures are rational and sum to 1.
    """
    F = Fraction
    return star_tree(F(3, 5), F(0), [(F(1), F(1, 10), F(1, 8)), (F(1), F(0), F(1, 8))],
                     boundary=0, center_parent=(F(0), F(1, 2), F(3, 20)))


# --------------------------------------------------------------------------
# profiles


def tree_from_profile(p: AxisymmetricProfile) -> MeasuredReebTree:
    """Reeb tree of H(theta, z) = h(z): a path graph ordered from z = 1 down.

    Plateaus become vertices of mass (length)/2; interior turning points and
    the poles become massless vertices; monotone runs become edges of
    measure (length)/2.  For disc-supported profiles the vertex containing
    z = 1 is the boundary vertex.
    """
    if p.singular:
        raise DomainError("profile is singular at z = -1; flatten it with make_smoothing first")
    segs = list(reversed(p.segments()))
    vertices: list[TreeVertex] = []
    edges: list[TreeEdge] = []

    def add_vertex(h, mass):
        vertices.append(TreeVertex(len(vertices), h, mass))
        return len(vertices) - 1

    pending = None  # monotone segment waiting for its lower-z vertex
    if segs[0].direction != 0:
        add_vertex(segs[0].h_hi, Fraction(0))  # north pole
    for s in segs:
        if s.direction == 0:
            vid = add_vertex(s.h_lo, (s.hi - s.lo) / 2)
            if pending is not None:
                edges.append(_profile_edge(p, pending, vid - 1, vid))
                pending = None
        else:
            if pending is not None:
                vid = add_vertex(pending.h_lo, Fraction(0))  # turning point
                edges.append(_profile_edge(p, pending, vid - 1, vid))
            pending = s
    if pending is not None:
        vid = add_vertex(pending.h_lo, Fraction(0))  # south pole
        edges.append(_profile_edge(p, pending, vid - 1, vid))
    boundary = 0 if p.support == "disc" else None
    return MeasuredReebTree(vertices, edges, boundary)


def _profile_edge(p: AxisymmetricProfile, seg, u: int, v: int) -> TreeEdge:
    """Edge from the high-z end of ``seg`` (vertex u) to its low-z end (v)."""
    top = seg.hi
    cuts = sorted({seg.lo, seg.hi} | {x for pc in seg.pieces for x in (pc.lo, pc.hi)
                                      if seg.lo < x < seg.hi}, key=float, reverse=True)
    hp = tuple(((top - z) / 2, p.piece_at(z).value(z) if z != seg.lo else seg.h_lo) for z in cuts)
    # the endpoint values come from the segment so they match the vertices
    hp = ((hp[0][0], seg.h_hi),) + hp[1:-1] + ((hp[-1][0], seg.h_lo),)
    linear = all(pc.exact and pc.is_linear() for pc in seg.pieces)
    integral = None
    f = None
    if linear:
        integral = None
    else:
        total = 0.0
        for a, b in zip(cuts[1:], cuts[:-1]):
            total += float(p.piece_at((a + b) / 2).restricted(a, b).integral()[0])
        integral = total / 2

        def f(s, p=p, top=top):
            z = top - 2 * s
            return p(z)
    return TreeEdge(u, v, (seg.hi - seg.lo) / 2, hp, linear, integral, f)


# --------------------------------------------------------------------------
# meshes


class _UnionFind:
    def __init__(self, n):
        self.parent = list(range(n))

    def find(self, x):
        root = x
        while self.parent[root] != root:
            root = self.parent[root]
        while self.parent[x] != root:
            self.parent[x], x = root, self.parent[x]
        return root

    def union(self, a, b):
        ra, rb = self.find(a), self.find(b)
        if ra != rb:
            self.parent[rb] = ra
        return ra


def _triangle_band(a, b, c, area, t0, t1):
    """Area and integral of f over {t0 <= f <= t1} in a linear triangle.

    Vertex values a <= b <= c, a < c; returns exact rationals for rational
    input.  The sublevel area F(t) is A(t-a)^2/((b-a)(c-a)) on [a, b] and
    A(1 - (c-t)^2/((c-a)(c-b))) on [b, c]; the first moment is integrated
    in closed form.
    """

    def F(t):
        if t <= a:
            return 0 * area
        if t >= c:
            return area
        if t <= b:
            return area * (t - a) ** 2 / ((b - a) * (c - a))
        return area * (1 - (c - t) ** 2 / ((c - a) * (c - b)))

    def M(t):
        # integral of s dF(s) from a to t
        if t <= a:
            return 0 * area
        if b > a:
            tt = min(t, b)
            k = 2 * area / ((b - a) * (c - a))
            # int_a^tt s (s - a) k ds
            m = k * ((tt**3 - a**3) / 3 - a * (tt**2 - a**2) / 2)
        else:
            m = 0 * area
        if t > b and c > b:
            tt = min(t, c)
            k = 2 * area / ((c - a) * (c - b))
            # int_b^tt s (c - s) k ds
            m += k * (c * (tt**2 - b**2) / 2 - (tt**3 - b**3) / 3)
        return m

    return F(t1) - F(t0), M(t1) - M(t0)


def tree_from_mesh(f: TriangulatedField, boundary: int | None = None,
                   boundary_value=None) -> MeasuredReebTree:
    """Contour tree of a PL field on a triangulated sphere, with measures.

    Vertices joined by edges of equal value are merged into clusters;
    flat triangles give cluster masses.  Join and split trees are swept
    with simulation-of-simplicity order (value, lowest vertex index) and
    merged into the augmented contour tree; each non-flat triangle's area
    is then distributed exactly over the tree arcs its level bands cross.
    Finally massless valence-2 nodes are suppressed.

    Parameters
    ----------
    boundary : int, optional
        A mesh vertex index whose cluster becomes the boundary vertex.
    boundary_value : optional
        Alternatively, the boundary vertex is the plateau of largest mass
        with this H value.
    """
    if not f.validated:
        f.validate()
    hs = f.heights
    n = len(hs)
    edges = f.edges()

    # clusters of equal-valued vertices joined by edges
    uf = _UnionFind(n)
    for (i, j) in edges:
        if hs[i] == hs[j]:
            uf.union(i, j)
    roots = sorted({uf.find(i) for i in range(n)})
    rep = {r: k for k, r in enumerate(roots)}
    cl = [rep[uf.find(i)] for i in range(n)]
    nc = len(roots)
    cval = [None] * nc
    cmin = [n] * nc
    for i in range(n):
        c = cl[i]
        cval[c] = hs[i]
        cmin[c] = min(cmin[c], i)
    mass = [Fraction(0)] * nc

    cadj: list[set] = [set() for _ in range(nc)]
    for (i, j) in edges:
        a, b = cl[i], cl[j]
        if a != b:
            cadj[a].add(b)
            cadj[b].add(a)

    order = sorted(range(nc), key=lambda c: (cval[c], cmin[c]))
    rank = [0] * nc
    for r, c in enumerate(order):
        rank[c] = r

    def sweep(seq):
        # returns, per node, the set of neighbours in the sweep tree
        uf2 = _UnionFind(nc)
        head = list(range(nc))
        done = [False] * nc
        tree = [set() for _ in range(nc)]
        for c in seq:
            done[c] = True
            for d in cadj[c]:
                if not done[d]:
                    continue
                rd, rc = uf2.find(d), uf2.find(c)
                if rd != rc:
                    hd = head[rd]
                    tree[hd].add(c)
                    tree[c].add(hd)
                    r = uf2.union(rc, rd)
                    head[r] = c
            head[uf2.find(c)] = c
        return tree

    join = sweep(order)  # sublevel sets: each node has <= 1 higher neighbour
    split = sweep(list(reversed(order)))  # superlevel sets: <= 1 lower neighbour

    def up(tree, c):
        return [d for d in tree[c] if rank[d] > rank[c]]

    def down(tree, c):
        return [d for d in tree[c] if rank[d] < rank[c]]

    # Carr-Snoeyink-Axen merge: peel leaves until one node remains
    def is_leaf(c):
        return len(up(split, c)) + len(down(join, c)) == 1

    arcs = []
    alive = set(range(nc))
    queue = sorted((c for c in range(nc) if is_leaf(c)), key=lambda c: rank[c], reverse=True)
    while len(alive) > 1:
        if not queue:
            raise StructuralError("contour tree merge stalled; mesh is not a sphere", "genus-0")
        c = queue.pop()
        if c not in alive or not is_leaf(c):
            continue
        other = down(split, c)[0] if not up(split, c) else up(join, c)[0]
        arcs.append((c, other))
        touched = set()
        for tree in (join, split):
            nb = list(tree[c])
            for d in nb:
                tree[d].discard(c)
                touched.add(d)
            ups = [d for d in nb if rank[d] > rank[c]]
            downs = [d for d in nb if rank[d] < rank[c]]
            if len(ups) == 1 and len(downs) == 1:
                tree[ups[0]].add(downs[0])
                tree[downs[0]].add(ups[0])
            tree[c] = set()
        alive.discard(c)
        queue.extend(d for d in sorted(touched, key=lambda d: rank[d]) if d in alive and is_leaf(d))
    return _assemble_mesh_tree(f, cl, cval, rank, mass, arcs, nc, boundary, boundary_value)


def _assemble_mesh_tree(f, cl, cval, rank, mass, arcs, nc, boundary, boundary_value):
    # root the augmented tree to answer path queries
    adj = [[] for _ in range(nc)]
    for a, b in arcs:
        adj[a].append(b)
        adj[b].append(a)
    parent = [-1] * nc
    depth = [0] * nc
    seen = [False] * nc
    stack = [0]
    seen[0] = True
    while stack:
        x = stack.pop()
        for y in adj[x]:
            if not seen[y]:
                seen[y] = True
                parent[y] = x
                depth[y] = depth[x] + 1
                stack.append(y)
    if not all(seen):
        raise StructuralError("contour tree is disconnected", "genus-0")

    arc_measure: dict = {}
    arc_moment: dict = {}

    def key(a, b):
        return (a, b) if a < b else (b, a)

    def path(a, b):
        pa, pb = [a], [b]
        while depth[pa[-1]] > depth[pb[-1]]:
            pa.append(parent[pa[-1]])
        while depth[pb[-1]] > depth[pa[-1]]:
            pb.append(parent[pb[-1]])
        while pa[-1] != pb[-1]:
            pa.append(parent[pa[-1]])
            pb.append(parent[pb[-1]])
        return pa + list(reversed(pb[:-1]))

    for tri, area in zip(f.triangles, f.areas):
        cs = sorted({cl[i] for i in tri}, key=lambda c: rank[c])
        if len(cs) == 1:
            mass[cs[0]] += area
            continue
        vals = sorted(f.heights[i] for i in tri)
        a, b, c = vals
        route = path(cs[0], cs[-1])
        for x, y in zip(route, route[1:]):
            t0, t1 = sorted((cval[x], cval[y]))
            if t0 == t1:
                continue
            dm, dq = _triangle_band(a, b, c, area, t0, t1)
            k = key(x, y)
            arc_measure[k] = arc_measure.get(k, 0) + dm
            arc_moment[k] = arc_moment.get(k, 0) + dq

    # contract arcs carrying no area (equal-valued neighbours)
    uf = _UnionFind(nc)
    for a, b in arcs:
        if arc_measure.get(key(a, b), 0) == 0:
            if cval[a] != cval[b]:
                raise StructuralError("arc with distinct values but zero area", "measure")
            uf.union(a, b)
    node = {}
    for c in range(nc):
        r = uf.find(c)
        node.setdefault(r, {"h": cval[c], "mass": Fraction(0), "members": []})
        node[r]["mass"] += mass[c]
        node[r]["members"].append(c)
    g_adj: dict = {r: {} for r in node}
    for a, b in arcs:
        ra, rb = uf.find(a), uf.find(b)
        if ra == rb:
            continue
        k = key(a, b)
        # orient from ra to rb
        g_adj[ra][rb] = (arc_measure[k], arc_moment[k])
        g_adj[rb][ra] = (arc_measure[k], arc_moment[k])

    # suppress massless valence-2 nodes by walking chains between kept nodes
    def regular(r):
        if len(g_adj[r]) != 2 or node[r]["mass"] > 0:
            return False
        a, b = (node[x]["h"] for x in g_adj[r])
        return (a - node[r]["h"]) * (b - node[r]["h"]) < 0

    keep = [r for r in node if not regular(r)]
    if not keep:
        keep = [min(node)]
    keep_set = set(keep)
    bnd_root = None
    if boundary is not None:
        bnd_root = uf.find(cl[boundary])
    elif boundary_value is not None:
        cands = [r for r in node if node[r]["h"] == boundary_value]
        if cands:
            bnd_root = max(cands, key=lambda r: (node[r]["mass"], -r))
    if bnd_root is not None and bnd_root not in keep_set:
        keep.append(bnd_root)
        keep_set.add(bnd_root)
    keep.sort(key=lambda r: (r != bnd_root, rank[r]))
    new_id = {r: i for i, r in enumerate(keep)}
    vertices = [TreeVertex(new_id[r], node[r]["h"], node[r]["mass"]) for r in keep]
    edges = []
    for r in keep:
        for nb in sorted(g_adj[r], key=lambda x: rank[x]):
            prev, cur = r, nb
            hp = [(Fraction(0), node[r]["h"])]
            s, mom = g_adj[r][nb]
            while cur not in keep_set:
                hp.append((s, node[cur]["h"]))
                nxt = next(x for x in g_adj[cur] if x != prev)
                dm, dq = g_adj[cur][nxt]
                prev, cur = cur, nxt
                s += dm
                mom += dq
            if new_id[r] < new_id[cur]:
                hp.append((s, node[cur]["h"]))
                edges.append(TreeEdge(new_id[r], new_id[cur], s, tuple(hp), False, mom))
    edges.sort(key=lambda e: (e.u, e.v))
    if bnd_root is not None and node[bnd_root]["h"] != 0:
        raise StructuralError("boundary vertex must have H = 0", "boundary")
    return MeasuredReebTree(vertices, edges, None if bnd_root is None else new_id[bnd_root])
