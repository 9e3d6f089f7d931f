"""Voronoi diagram of disjoint convex polygon sites.

Trisector vertices are found by Newton iteration on distance differences,
seeded from a Delaunay triangulation of points sampled along the polygon
boundaries, and accepted only after an exact empty-circle check. The vertex
count expected from Euler's relation tells us when every vertex has been
found; otherwise the boundary sampling is refined.

Bisectors are then built explicitly, one feature pair (vertex or edge of
each polygon) at a time: point/point and edge/edge pairs give lines,
point/edge pairs give parabolas. Each piece is clipped to the region where
its features are the nearest ones, and the pieces are ordered by the
nearest-point retraction onto the first site, which is monotone along a
bisector.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Optional

import numpy as np
from scipy.spatial import Delaunay, cKDTree

from .geom import (TAU, Feature, GeometryError, Point, SiteSet, ConvexPolygon,
                   nearest_point, orient2d)

INF = math.inf


class DegeneratePosition(GeometryError):
    """Input violates general position (e.g. four equidistant sites)."""


class InconsistentVertex(GeometryError):
    pass


# --- feature-level bisector pieces ------------------------------------------

@dataclass(frozen=True)
class BisectorArc:
    """One smooth piece of a bisector: x(t) = a + b t + c t² for t in [t0, t1].

    ``c`` is zero for line segments. For parabolic arcs ``b`` is the unit
    tangent of the directrix and t = 0 is the apex. ``dist`` describes the
    distance to the first site along the arc: ("point", p) or
    ("line", a, n) with unit outward normal n.
    """

    kind: str
    features: tuple
    a: tuple
    b: tuple
    c: tuple
    t0: float
    t1: float
    dist: tuple
    focus: Optional[Point] = None
    directrix: Optional[tuple] = None

    def point(self, t: float) -> Point:
        return Point(self.a[0] + self.b[0] * t + self.c[0] * t * t,
                     self.a[1] + self.b[1] * t + self.c[1] * t * t)

    @property
    def start(self) -> Optional[Point]:
        return None if self.t0 == -INF else self.point(self.t0)

    @property
    def end(self) -> Optional[Point]:
        return None if self.t1 == INF else self.point(self.t1)

    def direction(self, t: float) -> Point:
        dx = self.b[0] + 2 * self.c[0] * t
        dy = self.b[1] + 2 * self.c[1] * t
        ln = math.hypot(dx, dy)
        return Point(dx / ln, dy / ln)

    @property
    def start_direction(self) -> Optional[Point]:
        """Direction towards infinity at an unbounded start, else None."""
        if self.t0 != -INF:
            return None
        if self.kind == "line-segment":
            return Point(-self.b[0], -self.b[1])
        ln = math.hypot(*self.c)
        return Point(self.c[0] / ln, self.c[1] / ln)

    @property
    def end_direction(self) -> Optional[Point]:
        if self.t1 != INF:
            return None
        if self.kind == "line-segment":
            return Point(*self.b)
        ln = math.hypot(*self.c)
        return Point(self.c[0] / ln, self.c[1] / ln)

    def distance(self, t: float) -> float:
        x, y = self.point(t)
        if self.dist[0] == "point":
            p = self.dist[1]
            return math.hypot(x - p[0], y - p[1])
        _, a, n = self.dist
        return (x - a[0]) * n[0] + (y - a[1]) * n[1]

    def stationary(self) -> list:
        """Parameters where the distance along the arc can be minimal."""
        ts = [t for t in (self.t0, self.t1) if math.isfinite(t)]
        if self.kind == "parabolic-arc":
            ts.append(0.0)
        elif self.dist[0] == "point":
            p = self.dist[1]
            ts.append((p[0] - self.a[0]) * self.b[0] + (p[1] - self.a[1]) * self.b[1])
        return [min(max(t, self.t0), self.t1) for t in ts]

    def minimum(self):
        """(value, point) minimizing the site distance over the arc; ties go
        to the lexicographically smallest point."""
        cands = [(self.distance(t), self.point(t)) for t in self.stationary()]
        return _lexmin(cands)

    def clipped(self, t0: float, t1: float) -> "BisectorArc":
        return BisectorArc(self.kind, self.features, self.a, self.b, self.c,
                           max(t0, self.t0), min(t1, self.t1), self.dist,
                           self.focus, self.directrix)


def _lexmin(cands):
    best = min(c[0] for c in cands)
    return min((c for c in cands if c[0] <= best + TAU), key=lambda c: (c[1].x, c[1].y))


def _quad_geq(a, b, c):
    """Intervals of t with a t² + b t + c >= 0."""
    if a == 0.0:
        if b == 0.0:
            return [(-INF, INF)] if c >= 0 else []
        r = -c / b
        return [(r, INF)] if b > 0 else [(-INF, r)]
    disc = b * b - 4 * a * c
    if disc < 0:
        return [(-INF, INF)] if a > 0 else []
    sq = math.sqrt(disc)
    q = -0.5 * (b + math.copysign(sq, b))
    if q == 0.0:
        r1 = r2 = 0.0
    else:
        r1, r2 = sorted((q / a, c / q))
    if a > 0:
        return [(-INF, r1), (r2, INF)]
    return [(r1, r2)]


def _intersect(A, B):
    out = []
    for lo1, hi1 in A:
        for lo2, hi2 in B:
            lo, hi = max(lo1, lo2), min(hi1, hi2)
            if lo <= hi:
                out.append((lo, hi))
    return out


class _Site:
    """Per-polygon feature geometry used by the bisector construction."""

    def __init__(self, P: ConvexPolygon):
        self.P = P
        self.v = P.coords
        self.k = len(self.v)
        self.d = []
        self.n = []
        self.len = []
        for ax, ay, dx, dy, l2, nx, ny in P.edge_data:
            ln = math.sqrt(l2)
            self.d.append((dx / ln, dy / ln))
            self.n.append((nx, ny))
            self.len.append(ln)
        self.th0 = []
        self.span = []
        for m in range(self.k):
            npx, npy = self.n[m - 1]
            nnx, nny = self.n[m]
            t0 = math.atan2(npy, npx)
            self.th0.append(t0)
            self.span.append((math.atan2(nny, nnx) - t0) % (2 * math.pi))

    def region(self, kind, m):
        """Half-planes g·x >= h describing where feature m is nearest."""
        v = self.v[m]
        if kind == "vertex":
            dp, dn = self.d[m - 1], self.d[m]
            return [(dp, dp[0] * v[0] + dp[1] * v[1]),
                    ((-dn[0], -dn[1]), -(dn[0] * v[0] + dn[1] * v[1]))]
        d, n = self.d[m], self.n[m]
        w = self.v[(m + 1) % self.k]
        return [(d, d[0] * v[0] + d[1] * v[1]),
                ((-d[0], -d[1]), -(d[0] * w[0] + d[1] * w[1])),
                (n, n[0] * v[0] + n[1] * v[1])]

    def relevant(self, other: "_Site", tol: float):
        """Features of this site that can be nearest along a bisector with
        ``other``: some vertex of the other site must lie on the outer side
        of one of the feature's normals."""
        out = []
        for m in range(self.k):
            vx, vy = self.v[m]
            best_prev = best_next = -INF
            for qx, qy in other.v:
                best_prev = max(best_prev, (qx - vx) * self.n[m - 1][0] + (qy - vy) * self.n[m - 1][1])
                best_next = max(best_next, (qx - vx) * self.n[m][0] + (qy - vy) * self.n[m][1])
            if best_prev >= -tol or best_next >= -tol:
                out.append(("vertex", m))
            if best_next >= -tol:
                out.append(("edge", m))
        return out

    def key(self, x, y) -> float:
        """Position of the nearest-point retraction of (x, y) along the
        boundary of the unit offset, in [0, 2k): edge m covers [2m, 2m+1),
        the arc around vertex m+1 covers [2m+1, 2m+2)."""
        _, ax, ay, kind, idx = nearest_point(self.P, x, y)
        if kind == "edge":
            vx, vy = self.v[idx]
            t = ((ax - vx) * self.d[idx][0] + (ay - vy) * self.d[idx][1]) / self.len[idx]
            return 2 * idx + min(max(t, 0.0), 1.0)
        if kind == "inside":
            raise DegeneratePosition("point inside a site")
        off = (math.atan2(y - ay, x - ax) - self.th0[idx]) % (2 * math.pi)
        if off > self.span[idx] + 1e-9:
            off = 0.0 if off > math.pi + self.span[idx] / 2 else self.span[idx]
        frac = min(off / self.span[idx], 1.0)
        return (2 * idx - 1 + frac) % (2 * self.k)

    def support_key(self, ux, uy) -> float:
        """Key of the boundary point whose outward normal is (ux, uy)."""
        m = max(range(self.k), key=lambda i: self.v[i][0] * ux + self.v[i][1] * uy)
        vx, vy = self.v[m]
        return self.key(vx + ux, vy + uy)


def _feature_pair_pieces(A: _Site, fa, B: _Site, fb):
    """Bisector pieces of feature fa of A and fb of B, clipped to both
    feature regions, as BisectorArc with distance to A."""
    ka, ma = fa
    kb, mb = fb
    feats = (Feature(A.P.id, ka, ma), Feature(B.P.id, kb, mb))
    focus = directrix = None
    if ka == "vertex" and kb == "vertex":
        p, q = A.v[ma], B.v[mb]
        dx, dy = q[0] - p[0], q[1] - p[1]
        ln = math.hypot(dx, dy)
        a = ((p[0] + q[0]) / 2, (p[1] + q[1]) / 2)
        b = (-dy / ln, dx / ln)
        c = (0.0, 0.0)
        kind = "line-segment"
        dist = ("point", p)
    elif ka == "edge" and kb == "edge":
        n1, n2 = A.n[ma], B.n[mb]
        N = (n1[0] - n2[0], n1[1] - n2[1])
        nn = N[0] * N[0] + N[1] * N[1]
        if nn < 1e-24:
            return []
        a1, a2 = A.v[ma], B.v[mb]
        cst = (a1[0] * n1[0] + a1[1] * n1[1]) - (a2[0] * n2[0] + a2[1] * n2[1])
        a = (N[0] * cst / nn, N[1] * cst / nn)
        ln = math.sqrt(nn)
        b = (-N[1] / ln, N[0] / ln)
        c = (0.0, 0.0)
        kind = "line-segment"
        dist = ("line", a1, n1)
    else:
        if ka == "vertex":
            p, la, nl = A.v[ma], B.v[mb], B.n[mb]
            dist = ("point", p)
        else:
            p, la, nl = B.v[mb], A.v[ma], A.n[ma]
            dist = ("line", la, nl)
        delta = (p[0] - la[0]) * nl[0] + (p[1] - la[1]) * nl[1]
        if delta <= 0:
            return []
        foot = (p[0] - delta * nl[0], p[1] - delta * nl[1])
        a = (foot[0] + delta / 2 * nl[0], foot[1] + delta / 2 * nl[1])
        b = (-nl[1], nl[0])
        c = (nl[0] / (2 * delta), nl[1] / (2 * delta))
        kind = "parabolic-arc"
        focus = Point(*p)
        directrix = (Point(*la), Point(*nl))
    ivs = [(-INF, INF)]
    cn = math.hypot(*c)
    for g, h in A.region(ka, ma) + B.region(kb, mb):
        qa = g[0] * c[0] + g[1] * c[1]
        if abs(qa) <= 1e-12 * cn:
            # the constraint normal is orthogonal to the parabola axis
            qa = 0.0
        qb = g[0] * b[0] + g[1] * b[1]
        qc = g[0] * a[0] + g[1] * a[1] - h
        ivs = _intersect(ivs, _quad_geq(qa, qb, qc))
        if not ivs:
            return []
    return [BisectorArc(kind, feats, a, b, c, lo, hi, dist, focus, directrix)
            for lo, hi in ivs if hi - lo > 1e-12]


@dataclass
class Bisector:
    """The full bisector of sites i < j as ordered arcs, P_i on the left,
    with a global arc-length-like parameter s (0 at the start of arc 1)."""

    i: int
    j: int
    arcs: list
    s0: list  # s at each arc's t0 (first arc: s at t1 is 0)

    @property
    def _ref(self) -> float:
        t1 = self.arcs[0].t1
        return t1 if math.isfinite(t1) else 0.0

    def locate(self, s: float):
        m = int(np.searchsorted(self.s0, s, side="right")) - 1
        m = min(max(m, 0), len(self.arcs) - 1)
        arc = self.arcs[m]
        t = self._ref + s if m == 0 else arc.t0 + (s - self.s0[m])
        return m, min(max(t, arc.t0), arc.t1)

    def point(self, s: float) -> Point:
        m, t = self.locate(s)
        return self.arcs[m].point(t)

    def param(self, x, y) -> float:
        """Global parameter of a point on the bisector."""
        best = (INF, 0.0)
        for m, arc in enumerate(self.arcs):
            t = (x - arc.a[0]) * arc.b[0] + (y - arc.a[1]) * arc.b[1]
            t = min(max(t, arc.t0), arc.t1)
            px, py = arc.point(t)
            r = math.hypot(px - x, py - y)
            if r < best[0]:
                s = t - self._ref if m == 0 else self.s0[m] + (t - arc.t0)
                best = (r, s)
        return best[1]

    def sub_arcs(self, s_lo: float, s_hi: float) -> list:
        out = []
        for m, arc in enumerate(self.arcs):
            if m == 0:
                lo, hi = -INF, arc.t1 - self._ref
                t_lo, t_hi = self._ref + s_lo, self._ref + s_hi
            else:
                lo = self.s0[m]
                hi = lo + (arc.t1 - arc.t0)
                t_lo, t_hi = arc.t0 + (s_lo - lo), arc.t0 + (s_hi - lo)
            if s_hi <= lo or s_lo >= hi:
                continue
            a = arc.clipped(t_lo, t_hi)
            if a.t1 - a.t0 > 1e-12:
                out.append(a)
        return out


def build_bisector(sites: SiteSet, i: int, j: int, _cache=None) -> Bisector:
    """Bisector of sites i < j as an ordered chain of arcs."""
    A = _cache[i] if _cache else _Site(sites[i])
    B = _cache[j] if _cache else _Site(sites[j])
    x0, y0, x1, y1 = sites.bounds()
    tol = 1e-9 * max(1.0, x1 - x0, y1 - y0)
    pieces = []
    for fa in A.relevant(B, tol):
        for fb in B.relevant(A, tol):
            pieces.extend(_feature_pair_pieces(A, fa, B, fb))
    # orient and order by the retraction onto site i, cut opposite site j
    (wx, wy), (vx, vy) = _witness_floats(sites[i], sites[j])
    ln = math.hypot(wx - vx, wy - vy)
    cut = A.support_key((wx - vx) / ln, (wy - vy) / ln)
    period = 2 * A.k

    def rel(p):
        return (A.key(p.x, p.y) - cut) % period

    keyed = []
    for arc in pieces:
        lo, hi = arc.t0, arc.t1
        if lo == -INF and hi == INF:
            ta, tb = -1.0, 1.0
        elif lo == -INF:
            ta, tb = hi - 1.0, hi
        elif hi == INF:
            ta, tb = lo, lo + 1.0
        else:
            ta, tb = lo + 0.25 * (hi - lo), lo + 0.75 * (hi - lo)
        ka, kb = rel(arc.point(ta)), rel(arc.point(tb))
        if kb < ka:
            arc = BisectorArc(arc.kind, arc.features, arc.a,
                              (-arc.b[0], -arc.b[1]), arc.c, -arc.t1, -arc.t0,
                              arc.dist, arc.focus, arc.directrix)
        keyed.append((rel(arc.point(_mid(arc))), arc))
    keyed.sort(key=lambda p: p[0])
    arcs = [a for _, a in keyed]
    if not arcs or arcs[0].t0 != -INF or arcs[-1].t1 != INF:
        raise DegeneratePosition(f"could not assemble the bisector of sites {i} and {j}")
    s0 = [-INF]
    s = 0.0
    for arc in arcs[1:]:
        s0.append(s)
        s += arc.t1 - arc.t0 if math.isfinite(arc.t1) else 0.0
    return Bisector(i, j, arcs, s0)


def _mid(arc: BisectorArc) -> float:
    if arc.t0 == -INF and arc.t1 == INF:
        return 0.0
    if arc.t0 == -INF:
        return arc.t1 - 1.0
    if arc.t1 == INF:
        return arc.t0 + 1.0
    return 0.5 * (arc.t0 + arc.t1)


def _witness_floats(P: ConvexPolygon, Q: ConvexPolygon):
    from .geom import _witness_candidates
    d, wp, wq = min(_witness_candidates(P, Q), key=lambda c: c[0])
    return wp, wq


# --- diagram -----------------------------------------------------------------

@dataclass(frozen=True)
class VoronoiVertex:
    position: Point
    sites: tuple  # sorted triple of site ids
    value: float
    distances: tuple = ()


@dataclass
class VoronoiEdge:
    sites: tuple  # (i, j) with i < j
    arcs: list
    vertices: tuple  # indices into VoronoiDiagram.vertices, 0-2 entries
    critical: float = INF
    critical_point: Optional[Point] = None

    @property
    def n_arcs(self) -> int:
        return len(self.arcs)


@dataclass
class VoronoiDiagram:
    sites: SiteSet
    vertices: list = field(default_factory=list)
    edges: list = field(default_factory=list)
    faces: list = field(default_factory=list)  # per site: edge indices, ccw

    def euler_characteristic(self) -> int:
        return len(self.vertices) + 1 - len(self.edges) + len(self.sites)


def vertex_value(v: VoronoiVertex, sites: SiteSet = None) -> float:
    """Mean distance of a trisector point to its three sites."""
    if sites is not None:
        ds = [nearest_point(sites[i], v.position.x, v.position.y)[0] for i in v.sites]
    else:
        ds = list(v.distances)
    if max(ds) - min(ds) > 10 * TAU:
        raise InconsistentVertex(
            f"vertex at {tuple(v.position)} has distances spread {max(ds) - min(ds):g}")
    return sum(ds) / len(ds)


def edge_critical_value(edge: VoronoiEdge, sites: SiteSet = None):
    """Minimum distance to the defining sites over the edge's arc chain.

    Returns ``(value, witness)``; ties within TAU resolve to the
    lexicographically smallest point.
    """
    return _lexmin([arc.minimum() for arc in edge.arcs])


class _Sampler:
    """Boundary samples of all sites with a KD-tree for range queries.

    ``spacing`` is one number, or one number per polygon edge (a list per
    site)."""

    def __init__(self, sites: SiteSet, spacing):
        pts, own, eid = [], [], []
        hmax = 0.0
        e = 0
        for P in sites:
            v = P.vertices
            k = len(v)
            for m in range(k):
                h = spacing if np.isscalar(spacing) else spacing[P.id][m]
                hmax = max(hmax, h)
                a, b = v[m], v[(m + 1) % k]
                cnt = max(1, int(math.ceil(math.hypot(*(b - a)) / h)))
                t = np.arange(cnt)[:, None] / cnt
                pts.append(a + t * (b - a))
                own.append(np.full(cnt, P.id))
                eid.append(np.full(cnt, e))
                e += 1
        self.h = hmax
        self.points = np.concatenate(pts)
        self.owner = np.concatenate(own)
        self.edge = np.concatenate(eid)
        self.tree = cKDTree(self.points)

    def clearance(self, n_edges: int) -> np.ndarray:
        """Per edge: distance from its samples to the nearest sample of
        another site (infinite when none is among the nearest neighbours)."""
        k = min(24, len(self.points))
        d, idx = self.tree.query(self.points, k=k)
        d = np.where(self.owner[idx] != self.owner[:, None], d, np.inf).min(axis=1)
        out = np.full(n_edges, np.inf)
        np.minimum.at(out, self.edge, d)
        return out

    @cached_property
    def triangulation(self) -> Delaunay:
        return Delaunay(self.points)

    def sites_near(self, x, y, r) -> set:
        idx = self.tree.query_ball_point((x, y), r + self.h)
        return set(self.owner[idx].tolist())


def _dist_grad(P, x, y):
    d, ax, ay, kind, _ = nearest_point(P, x, y)
    if kind == "inside" or d == 0.0:
        return None
    return d, (x - ax) / d, (y - ay) / d


def _trisector(polys, x, y, max_iter=80):
    """Newton iteration for a point equidistant from three sites."""
    P, Q, R = polys

    def evaluate(x, y):
        gs = [_dist_grad(S, x, y) for S in (P, Q, R)]
        if any(g is None for g in gs):
            return None
        return gs, (gs[0][0] - gs[1][0], gs[0][0] - gs[2][0])

    cur = evaluate(x, y)
    if cur is None:
        return None
    for _ in range(max_iter):
        gs, F = cur
        nf = math.hypot(*F)
        if nf <= 1e-14 * (1.0 + gs[0][0]):
            break
        (_, ax, ay), (_, bx, by), (_, cx, cy) = gs
        j11, j12, j21, j22 = ax - bx, ay - by, ax - cx, ay - cy
        det = j11 * j22 - j12 * j21
        if abs(det) < 1e-300:
            return None
        dx = (F[0] * j22 - F[1] * j12) / det
        dy = (F[1] * j11 - F[0] * j21) / det
        step = 1.0
        while step > 1e-8:
            nxt = evaluate(x - step * dx, y - step * dy)
            if nxt is not None and math.hypot(*nxt[1]) < nf:
                x, y, cur = x - step * dx, y - step * dy, nxt
                break
            step *= 0.5
        else:
            break
    gs, F = cur
    if math.hypot(*F) > 1e-10 * (1.0 + gs[0][0]):
        return None
    return x, y, tuple(g[0] for g in gs)


def hull_bridges(sites: SiteSet) -> int:
    """Number of places where the convex hull of the union of the sites
    passes from one site to another (collinear hull points included)."""
    pts = sorted({(p, P.id) for P in sites for p in P.exact}, key=lambda q: q[0])
    if len(sites) < 2:
        return 0

    def chain(seq):
        h = []
        for p in seq:
            while len(h) >= 2 and orient2d(h[-2][0], h[-1][0], p[0]) < 0:
                h.pop()
            h.append(p)
        return h

    lower = chain(pts)
    upper = chain(pts[::-1])
    ring = [q[1] for q in lower[:-1] + upper[:-1]]
    return sum(1 for m in range(len(ring)) if ring[m] != ring[m - 1])


def expected_vertex_count(sites: SiteSet) -> int:
    n = len(sites)
    return max(0, 2 * n - 2 - hull_bridges(sites))


def _initial_spacing(sites: SiteSet) -> float:
    lens = [math.sqrt(e[4]) for P in sites for e in P.edge_data]
    return 0.25 * float(np.median(lens))


def _find_vertices(sites: SiteSet, max_levels: int = 6):
    n = len(sites)
    target = expected_vertex_count(sites)
    found: dict = {}  # triple -> list of (x, y, dists)
    count = 0
    h0 = _initial_spacing(sites)
    # refine edges that face a nearby site, where vertices crowd together
    coarse = _Sampler(sites, h0)
    clear = coarse.clearance(sites.n_vertices)
    fine = np.clip(clear / 4, h0 / 32, h0)
    spacing, e = [], 0
    for P in sites:
        spacing.append(fine[e:e + len(P)])
        e += len(P)
    h = h0
    sampler = None
    tried: dict = {}
    for level in range(max_levels):
        scale = 0.5 ** level
        sampler = _Sampler(sites, [sp * scale for sp in spacing])
        h = h0 * scale
        tri = sampler.triangulation
        own = sampler.owner[tri.simplices]
        distinct = (own[:, 0] != own[:, 1]) & (own[:, 1] != own[:, 2]) & (own[:, 0] != own[:, 2])
        simp = tri.simplices[distinct]
        cc = _circumcenters(sampler.points, simp)
        rad = np.hypot(*(cc - sampler.points[simp[:, 0]]).T)
        triples = np.sort(own[distinct], axis=1)
        ok = np.isfinite(cc).all(axis=1)
        cc, triples, rad = cc[ok], triples[ok], rad[ok]
        # one seed per triple and 3h-cell; nearby seeds converge to the same vertex
        cells = np.floor(cc / (3 * h)).astype(np.int64)
        _, first = np.unique(np.column_stack([triples, cells]), axis=0, return_index=True)
        for row in np.sort(first):
            key = tuple(int(t) for t in triples[row])
            sx, sy = float(cc[row, 0]), float(cc[row, 1])
            near = tried.setdefault(key, [])
            sep = min(3 * h, 0.5 * float(rad[row]))
            if any(math.hypot(sx - px, sy - py) < sep for px, py in near):
                continue
            near.append((sx, sy))
            sol = _trisector([sites[t] for t in key], sx, sy)
            if sol is None:
                continue
            x, y, ds = sol
            if any(math.hypot(x - p[0], y - p[1]) < 1e-7 for p in found.get(key, [])):
                continue
            r = sum(ds) / 3
            ok = True
            for l in sampler.sites_near(x, y, r):
                if l in key:
                    continue
                dl = nearest_point(sites[l], x, y)[0]
                if dl < r - TAU:
                    ok = False
                    break
                if dl <= r + TAU:
                    raise DegeneratePosition(
                        f"sites {key + (l,)} are equidistant from ({x:.9g}, {y:.9g})")
            if not ok:
                continue
            found.setdefault(key, []).append((float(x), float(y), ds))
            near.append((x, y))
            count += 1
        if count == target:
            break
        if count > target:
            break
    if count != target:
        raise DegeneratePosition(
            f"found {count} Voronoi vertices, expected {target} for {n} sites")
    verts = []
    for key in sorted(found):
        for x, y, ds in sorted(found[key]):
            verts.append(VoronoiVertex(Point(x, y), key, 0.0, ds))
    verts = [VoronoiVertex(v.position, v.sites, vertex_value(v), v.distances) for v in verts]
    pos = np.array([tuple(v.position) for v in verts]).reshape(-1, 2)
    if len(pos) > 1:
        pairs = cKDTree(pos).query_pairs(TAU)
        if pairs:
            a, b = sorted(pairs)[0]
            raise DegeneratePosition(f"Voronoi vertices {a} and {b} coincide")
    return verts, sampler


def _circumcenters(pts, simp):
    a, b, c = pts[simp[:, 0]], pts[simp[:, 1]], pts[simp[:, 2]]
    bx, by = (b - a).T
    cx, cy = (c - a).T
    d = 2 * (bx * cy - by * cx)
    with np.errstate(divide="ignore", invalid="ignore"):
        ux = (cy * (bx * bx + by * by) - by * (cx * cx + cy * cy)) / d
        uy = (bx * (cx * cx + cy * cy) - cx * (bx * bx + by * by)) / d
    return np.column_stack([a[:, 0] + ux, a[:, 1] + uy])


def _in_cell(sites, sampler, i, j, p: Point) -> bool:
    d = nearest_point(sites[i], p.x, p.y)[0]
    for l in sampler.sites_near(p.x, p.y, d):
        if l != i and l != j and nearest_point(sites[l], p.x, p.y)[0] < d:
            return False
    return True


def build_voronoi(sites: SiteSet) -> VoronoiDiagram:
    """Voronoi diagram of pairwise disjoint convex sites.

    Raises DegeneratePosition when the sites are not in general position.
    """
    n = len(sites)
    diagram = VoronoiDiagram(sites, faces=[[] for _ in range(n)])
    if n < 2:
        return diagram
    verts, sampler = _find_vertices(sites)
    diagram.vertices = verts
    on_pair: dict = {}
    for vi, v in enumerate(verts):
        a, b, c = v.sites
        for pair in ((a, b), (a, c), (b, c)):
            on_pair.setdefault(pair, []).append(vi)
    # pairs whose whole bisector may be an edge: adjacent in the sample triangulation
    own = sampler.owner[sampler.triangulation.simplices]
    pairs = np.concatenate([np.sort(own[:, [u, w]], axis=1) for u, w in ((0, 1), (1, 2), (0, 2))])
    pairs = np.unique(pairs[pairs[:, 0] != pairs[:, 1]], axis=0)
    cand = set(on_pair) | {(int(a), int(b)) for a, b in pairs}
    cache = {i: _Site(sites[i]) for i in range(n)}
    for i, j in sorted(cand):
        vids = on_pair.get((i, j), [])
        if not vids:
            # a vertex-free bisector is an edge only if it lies in both cells
            B = build_bisector(sites, i, j, cache)
            if _in_cell(sites, sampler, i, j, B.point(0.0)):
                _add_edge(diagram, B, -INF, INF, ())
            continue
        B = build_bisector(sites, i, j, cache)
        ps = sorted((B.param(*verts[v].position), v) for v in vids)
        bounds = [(-INF, None)] + ps + [(INF, None)]
        status = []
        for (sa, _), (sb, _) in zip(bounds[:-1], bounds[1:]):
            if sa == -INF:
                s = sb - 1.0
            elif sb == INF:
                s = sa + 1.0
            else:
                s = 0.5 * (sa + sb)
            status.append(_in_cell(sites, sampler, i, j, B.point(s)))
        if any(status[m] == status[m + 1] for m in range(len(status) - 1)):
            raise DegeneratePosition(f"inconsistent bisector of sites {i} and {j}")
        for m, inside in enumerate(status):
            if inside:
                (sa, va), (sb, vb) = bounds[m], bounds[m + 1]
                _add_edge(diagram, B, sa, sb, tuple(v for v in (va, vb) if v is not None))
    if diagram.euler_characteristic() != 2:
        raise DegeneratePosition(
            f"Euler check failed: {len(diagram.vertices)} vertices, "
            f"{len(diagram.edges)} edges, {n} faces")
    for i in range(n):
        keyed = []
        for e in diagram.faces[i]:
            p = _representative(diagram.edges[e])
            keyed.append((cache[i].key(p.x, p.y), e))
        diagram.faces[i] = [e for _, e in sorted(keyed)]
    return diagram


def _representative(edge: VoronoiEdge) -> Point:
    arc = edge.arcs[len(edge.arcs) // 2]
    return arc.point(_mid(arc))


def _add_edge(diagram, B: Bisector, sa, sb, vids):
    arcs = B.sub_arcs(sa, sb)
    if not arcs:
        raise DegeneratePosition(f"empty Voronoi edge between sites {B.i} and {B.j}")
    e = VoronoiEdge((B.i, B.j), arcs, vids)
    e.critical, e.critical_point = edge_critical_value(e)
    # a minimum at an end vertex takes the vertex's own value, so the edge
    # and the dual triangle do not differ by rounding noise
    for vid in vids:
        v = diagram.vertices[vid]
        if abs(v.value - e.critical) <= TAU * (1.0 + v.value):
            e.critical, e.critical_point = v.value, v.position
            break
    idx = len(diagram.edges)
    diagram.edges.append(e)
    diagram.faces[B.i].append(idx)
    diagram.faces[B.j].append(idx)


def dump_diagram(diagram: VoronoiDiagram) -> str:
    """Text dump: ``V x y v`` per vertex, ``E i j critical x y n_arcs`` per edge."""
    lines = [f"V {v.position.x!r} {v.position.y!r} {v.value!r}" for v in diagram.vertices]
    for e in diagram.edges:
        lines.append(f"E {e.sites[0]} {e.sites[1]} {e.critical!r} "
                     f"{e.critical_point.x!r} {e.critical_point.y!r} {e.n_arcs}")
    return "\n".join(lines) + ("\n" if lines else "")
