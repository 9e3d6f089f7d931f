"""Planar primitives for convex polygon sites.

Vertices are kept twice: as exact :class:`~fractions.Fraction` pairs, which
drive every combinatorial decision (orientation, containment, overlap), and
as doubles, which feed the distance computations.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from decimal import Decimal
from fractions import Fraction
from functools import cached_property
from typing import NamedTuple, Sequence

import numpy as np

from .predicates import orient2d

#: global comparison tolerance for derived (double precision) quantities
TAU = 1e-9

DEFAULT_MAX_VERTICES = 64


class GeometryError(ValueError):
    """Base class for invalid geometric input."""


class TooFewVertices(GeometryError):
    pass


class TooManyVertices(GeometryError):
    pass


class NonConvex(GeometryError):
    pass


class SelfIntersecting(GeometryError):
    pass


class DegenerateArea(GeometryError):
    pass


class OverlappingSites(GeometryError):
    pass


class DegenerateContact(GeometryError):
    """Two offset boundaries share a curve instead of isolated points."""


class Point(NamedTuple):
    x: float
    y: float


class Feature(NamedTuple):
    site: int
    kind: str  # "vertex" or "edge"
    index: int


def as_fraction(v) -> Fraction:
    """Exact rational value of a coordinate given as int, float, str, Decimal
    or Fraction. Strings and Decimals are read as decimal literals."""
    if isinstance(v, Fraction):
        return v
    if isinstance(v, (int, np.integer)):
        return Fraction(int(v))
    if isinstance(v, str):
        return Fraction(Decimal(v))
    if isinstance(v, Decimal):
        if not v.is_finite():
            raise GeometryError(f"non-finite coordinate {v}")
        return Fraction(v)
    f = float(v)
    if not math.isfinite(f):
        raise GeometryError(f"non-finite coordinate {v}")
    return Fraction(f)


@dataclass(frozen=True, eq=False)
class ConvexPolygon:
    """A strictly convex, counterclockwise polygon site."""

    exact: tuple
    id: int = 0

    @cached_property
    def vertices(self) -> np.ndarray:
        arr = np.array([[float(x), float(y)] for x, y in self.exact])
        arr.setflags(write=False)
        return arr

    @cached_property
    def coords(self) -> tuple:
        return tuple((float(x), float(y)) for x, y in self.exact)

    @cached_property
    def edge_data(self) -> tuple:
        """Per edge: (ax, ay, dx, dy, length², nx, ny) with outward unit normal."""
        out = []
        pts = self.coords
        k = len(pts)
        for m in range(k):
            ax, ay = pts[m]
            bx, by = pts[(m + 1) % k]
            dx, dy = bx - ax, by - ay
            ln = math.hypot(dx, dy)
            out.append((ax, ay, dx, dy, dx * dx + dy * dy, dy / ln, -dx / ln))
        return tuple(out)

    @cached_property
    def bbox(self) -> tuple:
        v = self.vertices
        return (float(v[:, 0].min()), float(v[:, 1].min()),
                float(v[:, 0].max()), float(v[:, 1].max()))

    def __len__(self):
        return len(self.exact)

    def with_id(self, new_id: int) -> "ConvexPolygon":
        return ConvexPolygon(self.exact, new_id)

    def contains(self, p) -> bool:
        """Closed point-in-polygon test with exact arithmetic."""
        q = (as_fraction(p[0]), as_fraction(p[1]))
        k = len(self.exact)
        return all(orient2d(self.exact[m], self.exact[(m + 1) % k], q) >= 0
                   for m in range(k))

    def features(self):
        k = len(self.exact)
        for m in range(k):
            yield Feature(self.id, "vertex", m)
            yield Feature(self.id, "edge", m)


def _exact_area2(pts) -> Fraction:
    k = len(pts)
    return sum((pts[m][0] * pts[(m + 1) % k][1] - pts[(m + 1) % k][0] * pts[m][1]
                for m in range(k)), Fraction(0))


def _segments_touch(a, b, c, d) -> bool:
    """Closed segment intersection test, exact."""
    o1, o2 = orient2d(a, b, c), orient2d(a, b, d)
    o3, o4 = orient2d(c, d, a), orient2d(c, d, b)
    if o1 * o2 < 0 and o3 * o4 < 0:
        return True

    def on_seg(p, q, r):
        return (min(p[0], q[0]) <= r[0] <= max(p[0], q[0])
                and min(p[1], q[1]) <= r[1] <= max(p[1], q[1]))

    return ((o1 == 0 and on_seg(a, b, c)) or (o2 == 0 and on_seg(a, b, d))
            or (o3 == 0 and on_seg(c, d, a)) or (o4 == 0 and on_seg(c, d, b)))


def _half(v) -> int:
    # 0 for directions with angle in [0, pi), 1 for [pi, 2 pi)
    return 0 if (v[1] > 0 or (v[1] == 0 and v[0] > 0)) else 1


def validate_polygon(points: Sequence, id: int = 0,
                     max_vertices: int = DEFAULT_MAX_VERTICES) -> ConvexPolygon:
    """Check convexity and simplicity; return a counterclockwise polygon.

    Raises TooFewVertices, TooManyVertices, NonConvex, SelfIntersecting or
    DegenerateArea.
    """
    pts = [(as_fraction(p[0]), as_fraction(p[1])) for p in points]
    k = len(pts)
    if k < 3:
        raise TooFewVertices(f"polygon has {k} vertices, need at least 3")
    if k > max_vertices:
        raise TooManyVertices(f"polygon has {k} vertices, cap is {max_vertices}")
    turns = [orient2d(pts[m - 1], pts[m], pts[(m + 1) % k]) for m in range(k)]
    if 0 in turns:
        m = turns.index(0)
        raise NonConvex(f"vertices {(m - 1) % k}, {m}, {(m + 1) % k} are collinear")
    if all(t < 0 for t in turns):
        pts.reverse()
    elif not all(t > 0 for t in turns):
        for m in range(k):
            for q in range(m + 2, k):
                if m == 0 and q == k - 1:
                    continue
                if _segments_touch(pts[m], pts[(m + 1) % k], pts[q], pts[(q + 1) % k]):
                    raise SelfIntersecting(f"edges {m} and {q} intersect")
        m = next(m for m in range(k) if turns[m] * turns[0] < 0)
        raise NonConvex(f"turn at vertex {m} has the wrong orientation")
    # all left turns: simple iff the edge direction winds exactly once
    dirs = [(pts[(m + 1) % k][0] - pts[m][0], pts[(m + 1) % k][1] - pts[m][1])
            for m in range(k)]
    wraps = sum(1 for m in range(k)
                if _half(dirs[m]) == 1 and _half(dirs[(m + 1) % k]) == 0)
    if wraps != 1:
        raise SelfIntersecting(f"boundary winds {wraps} times")
    area2 = _exact_area2(pts)
    if area2 / 2 < Fraction(1, 10 ** 12):
        raise DegenerateArea(f"signed area {float(area2) / 2:g} below 1e-12")
    return ConvexPolygon(tuple(pts), id)


def _float_gap(P: ConvexPolygon, Q: ConvexPolygon) -> float:
    """Largest separation of Q from P along P's edge normals (negative when
    every edge line of P has part of Q on its inner side)."""
    qv = Q.vertices
    return max(((qv[:, 0] - ax) * nx + (qv[:, 1] - ay) * ny).min()
               for ax, ay, _, _, _, nx, ny in P.edge_data)


def polygons_intersect(P: ConvexPolygon, Q: ConvexPolygon) -> bool:
    """Exact closed intersection test for two convex polygons."""
    px0, py0, px1, py1 = P.bbox
    qx0, qy0, qx1, qy1 = Q.bbox
    if px1 < qx0 or qx1 < px0 or py1 < qy0 or qy1 < py0:
        return False
    # separating axis test in floats, exact arithmetic only near contact
    gap = max(_float_gap(P, Q), _float_gap(Q, P))
    margin = 1e-9 * max(1.0, abs(px0), abs(py0), abs(px1), abs(py1),
                        abs(qx0), abs(qy0), abs(qx1), abs(qy1))
    if gap > margin:
        return False
    if gap < -margin:
        return True
    if P.contains(Q.exact[0]) or Q.contains(P.exact[0]):
        return True
    a, b = P.exact, Q.exact
    ka, kb = len(a), len(b)
    for m in range(ka):
        for q in range(kb):
            if _segments_touch(a[m], a[(m + 1) % ka], b[q], b[(q + 1) % kb]):
                return True
    return False


@dataclass(frozen=True, eq=False)
class SiteSet:
    """Pairwise disjoint convex polygons with ids 0..n-1."""

    polygons: tuple = field(default_factory=tuple)

    def __post_init__(self):
        for i, P in enumerate(self.polygons):
            if P.id != i:
                raise GeometryError(f"site at position {i} has id {P.id}")

    def __len__(self):
        return len(self.polygons)

    def __iter__(self):
        return iter(self.polygons)

    def __getitem__(self, i) -> ConvexPolygon:
        return self.polygons[i]

    @property
    def n_vertices(self) -> int:
        return sum(len(P) for P in self.polygons)

    @cached_property
    def padded(self) -> tuple:
        """(starts, dirs, mask): (n, K, 2) edge starts and vectors padded by
        repeating the last edge, plus the (n, K) validity mask."""
        n = len(self.polygons)
        K = max((len(P) for P in self.polygons), default=1)
        starts = np.zeros((n, K, 2))
        dirs = np.zeros((n, K, 2))
        mask = np.zeros((n, K), dtype=bool)
        for i, P in enumerate(self.polygons):
            v = P.vertices
            k = len(v)
            d = np.roll(v, -1, axis=0) - v
            starts[i, :k], dirs[i, :k], mask[i, :k] = v, d, True
            starts[i, k:], dirs[i, k:] = v[-1], d[-1]
        return starts, dirs, mask

    def bounds(self) -> tuple:
        return self._bounds

    @cached_property
    def _bounds(self) -> tuple:
        if not self.polygons:
            return (0.0, 0.0, 0.0, 0.0)
        b = np.array([P.bbox for P in self.polygons])
        return (float(b[:, 0].min()), float(b[:, 1].min()),
                float(b[:, 2].max()), float(b[:, 3].max()))


def check_disjoint(polygons: Sequence[ConvexPolygon]) -> None:
    """Raise OverlappingSites unless all polygons are pairwise disjoint."""
    if len(polygons) < 2:
        return
    boxes = np.array([P.bbox for P in polygons])
    order = np.argsort(boxes[:, 0], kind="stable")
    # sweep over x-sorted boxes; only overlapping boxes get the exact test
    active: list[int] = []
    for i in order:
        x0, y0, x1, y1 = boxes[i]
        active = [j for j in active if boxes[j, 2] >= x0]
        for j in active:
            if boxes[j, 1] <= y1 and y0 <= boxes[j, 3]:
                if polygons_intersect(polygons[i], polygons[j]):
                    a, b = sorted((polygons[i].id, polygons[j].id))
                    raise OverlappingSites(f"sites {a} and {b} intersect")
        active.append(i)


def make_sites(polygons: Sequence, max_vertices: int = DEFAULT_MAX_VERTICES) -> SiteSet:
    """Validate a list of vertex lists (or polygons) into a :class:`SiteSet`."""
    polys = []
    for i, p in enumerate(polygons):
        if isinstance(p, ConvexPolygon):
            polys.append(p.with_id(i))
        else:
            try:
                polys.append(validate_polygon(p, i, max_vertices))
            except GeometryError as exc:
                raise type(exc)(f"polygon {i}: {exc}") from None
    check_disjoint(polys)
    return SiteSet(tuple(polys))


# --- distances (double precision) -------------------------------------------

def nearest_point(P: ConvexPolygon, x: float, y: float):
    """Distance from (x, y) to P with the nearest point and its feature.

    Returns ``(d, ax, ay, kind, index)``; kind is "inside" for interior or
    boundary points of P (d = 0).
    """
    best = math.inf
    res = None
    inside = True
    for m, (ax, ay, dx, dy, l2, nx, ny) in enumerate(P.edge_data):
        rx, ry = x - ax, y - ay
        if dx * ry - dy * rx < 0:
            inside = False
        t = (rx * dx + ry * dy) / l2
        if t <= 0.0:
            qx, qy, kind, idx = ax, ay, "vertex", m
        elif t >= 1.0:
            qx, qy, kind, idx = ax + dx, ay + dy, "vertex", (m + 1) % len(P.edge_data)
        else:
            qx, qy, kind, idx = ax + t * dx, ay + t * dy, "edge", m
        d = math.hypot(x - qx, y - qy)
        if d < best:
            best, res = d, (qx, qy, kind, idx)
    if inside:
        return 0.0, x, y, "inside", -1
    return (best,) + res


def dist_point_polygon(p, P: ConvexPolygon):
    """Euclidean distance from p to P and the nearest point of P.

    Returns ``(distance, witness)``; the distance is 0 exactly when P
    (closed) contains p.
    """
    if P.contains(p):
        return 0.0, Point(float(p[0]), float(p[1]))
    d, ax, ay, _, _ = nearest_point(P, float(p[0]), float(p[1]))
    if d == 0.0:
        # exterior point closer than float resolution
        d = math.hypot(float(p[0]) - ax, float(p[1]) - ay) or 5e-324
    return d, Point(ax, ay)


def _point_segment(px, py, ax, ay, dx, dy, l2):
    t = ((px - ax) * dx + (py - ay) * dy) / l2
    t = 0.0 if t < 0.0 else (1.0 if t > 1.0 else t)
    qx, qy = ax + t * dx, ay + t * dy
    return math.hypot(px - qx, py - qy), qx, qy


def _witness_candidates(P: ConvexPolygon, Q: ConvexPolygon):
    # vertex of one polygon against each edge of the other, both directions
    for vx, vy in P.coords:
        for ax, ay, dx, dy, l2, _, _ in Q.edge_data:
            d, qx, qy = _point_segment(vx, vy, ax, ay, dx, dy, l2)
            yield d, (vx, vy), (qx, qy)
    for vx, vy in Q.coords:
        for ax, ay, dx, dy, l2, _, _ in P.edge_data:
            d, qx, qy = _point_segment(vx, vy, ax, ay, dx, dy, l2)
            yield d, (qx, qy), (vx, vy)


def dist_polygon_polygon(P: ConvexPolygon, Q: ConvexPolygon):
    """Distance between disjoint polygons and a witness pair (on P, on Q).

    Among witness pairs within TAU of the minimum the lexicographically
    smallest is returned. Raises OverlappingSites if P and Q meet.
    """
    if polygons_intersect(P, Q):
        raise OverlappingSites(f"sites {P.id} and {Q.id} intersect")
    cands = list(_witness_candidates(P, Q))
    best = min(c[0] for c in cands)
    tied = [c for c in cands if c[0] <= best + TAU]
    _, wp, wq = min(tied, key=lambda c: (c[1], c[2]))
    return best, (Point(*wp), Point(*wq))


def pair_distance(P: ConvexPolygon, Q: ConvexPolygon) -> float:
    """Distance between two disjoint polygons without validation."""
    return min(c[0] for c in _witness_candidates(P, Q))


def segment_polygon_distance(a, b, P: ConvexPolygon) -> float:
    """Distance from the closed segment ab to polygon P (0 if they meet)."""
    ax, ay = a
    bx, by = b
    if (ax, ay) == (bx, by):
        return nearest_point(P, ax, ay)[0]
    sdx, sdy = bx - ax, by - ay
    sl2 = sdx * sdx + sdy * sdy
    pts = P.coords
    k = len(pts)
    for m in range(k):
        c, d = pts[m], pts[(m + 1) % k]
        if _segments_touch((ax, ay), (bx, by), c, d):
            return 0.0
    best = min(nearest_point(P, ax, ay)[0], nearest_point(P, bx, by)[0])
    for vx, vy in pts:
        best = min(best, _point_segment(vx, vy, ax, ay, sdx, sdy, sl2)[0])
    return best


# --- offset boundaries ------------------------------------------------------

def offset_pieces(P: ConvexPolygon, alpha: float):
    """The boundary of P dilated by a disk of radius alpha, counterclockwise.

    Yields ``("seg", start, end)`` for translated edges and
    ``("arc", center, theta0, span)`` for vertex arcs, alternating and
    starting with edge 0.
    """
    pts = P.coords
    k = len(pts)
    out = []
    for m, (ax, ay, dx, dy, _, nx, ny) in enumerate(P.edge_data):
        out.append(("seg", (ax + alpha * nx, ay + alpha * ny),
                    (ax + dx + alpha * nx, ay + dy + alpha * ny)))
        nnx, nny = P.edge_data[(m + 1) % k][5:7]
        th0 = math.atan2(ny, nx)
        span = (math.atan2(nny, nnx) - th0) % (2 * math.pi)
        out.append(("arc", pts[(m + 1) % k], th0, span))
    return out


def _angle_in(theta, th0, span, tol):
    off = (theta - th0) % (2 * math.pi)
    if off > 2 * math.pi - tol:
        off -= 2 * math.pi
    return -tol <= off <= span + tol, off


def _seg_seg(p0, p1, q0, q1, scale):
    rx, ry = p1[0] - p0[0], p1[1] - p0[1]
    sx, sy = q1[0] - q0[0], q1[1] - q0[1]
    den = rx * sy - ry * sx
    wx, wy = q0[0] - p0[0], q0[1] - p0[1]
    lr, ls = math.hypot(rx, ry), math.hypot(sx, sy)
    if abs(den) <= 1e-12 * lr * ls:
        # parallel: a shared stretch of positive length is a degenerate contact
        if abs(wx * ry - wy * rx) <= 1e-12 * scale * lr:
            t0 = (wx * rx + wy * ry) / (lr * lr)
            t1 = ((q1[0] - p0[0]) * rx + (q1[1] - p0[1]) * ry) / (lr * lr)
            lo, hi = max(0.0, min(t0, t1)), min(1.0, max(t0, t1))
            if (hi - lo) * lr > 1e-9 * scale:
                raise DegenerateContact("offset boundaries overlap along a segment")
            if hi >= lo - 1e-12:
                return [(lo,)]
        return []
    t = (wx * sy - wy * sx) / den
    u = (wx * ry - wy * rx) / den
    eps = 1e-12
    if -eps <= t <= 1 + eps and -eps <= u <= 1 + eps:
        return [(min(max(t, 0.0), 1.0),)]
    return []


def _seg_arc(p0, p1, c, r, th0, span, scale):
    dx, dy = p1[0] - p0[0], p1[1] - p0[1]
    fx, fy = p0[0] - c[0], p0[1] - c[1]
    a = dx * dx + dy * dy
    b = 2 * (fx * dx + fy * dy)
    cc = fx * fx + fy * fy - r * r
    disc = b * b - 4 * a * cc
    if disc < -1e-12 * b * b - 1e-24:
        return []
    sq = math.sqrt(max(disc, 0.0))
    roots = {(-b - sq) / (2 * a), (-b + sq) / (2 * a)}
    out = []
    for t in sorted(roots):
        if -1e-12 <= t <= 1 + 1e-12:
            x, y = p0[0] + t * dx, p0[1] + t * dy
            ok, off = _angle_in(math.atan2(y - c[1], x - c[0]), th0, span, 1e-12)
            if ok:
                out.append((t, off))
    return out


def _arc_arc(c1, c2, r, a1, a2):
    dx, dy = c2[0] - c1[0], c2[1] - c1[1]
    d = math.hypot(dx, dy)
    if d == 0.0:
        raise DegenerateContact("coincident offset arcs")
    if d > 2 * r * (1 + 1e-15):
        return []
    h = math.sqrt(max(r * r - d * d / 4, 0.0))
    mx, my = c1[0] + dx / 2, c1[1] + dy / 2
    px, py = -dy / d, dx / d
    pts = [(mx + h * px, my + h * py)] if h == 0.0 else [
        (mx + h * px, my + h * py), (mx - h * px, my - h * py)]
    out = []
    for x, y in pts:
        ok1, off1 = _angle_in(math.atan2(y - c1[1], x - c1[0]), a1[0], a1[1], 1e-12)
        ok2, _ = _angle_in(math.atan2(y - c2[1], x - c2[0]), a2[0], a2[1], 1e-12)
        if ok1 and ok2:
            out.append((x, y, off1))
    return out


def offset_boundary_intersections(P: ConvexPolygon, Q: ConvexPolygon, alpha: float):
    """Points where the boundaries of the alpha-offsets of P and Q cross.

    Returned counterclockwise along the offset boundary of P, starting from
    its translated edge 0. Raises DegenerateContact when the boundaries
    share a curve.
    """
    if alpha <= 0:
        raise ValueError("alpha must be positive")
    x0, y0, x1, y1 = P.bbox
    scale = max(1.0, alpha, x1 - x0, y1 - y0)
    bp, bq = offset_pieces(P, alpha), offset_pieces(Q, alpha)
    found = []
    for ip, pp in enumerate(bp):
        for qq in bq:
            if pp[0] == "seg" and qq[0] == "seg":
                for (t,) in _seg_seg(pp[1], pp[2], qq[1], qq[2], scale):
                    x = pp[1][0] + t * (pp[2][0] - pp[1][0])
                    y = pp[1][1] + t * (pp[2][1] - pp[1][1])
                    found.append(((ip, t), x, y))
            elif pp[0] == "seg":
                for t, _ in _seg_arc(pp[1], pp[2], qq[1], alpha, qq[2], qq[3], scale):
                    x = pp[1][0] + t * (pp[2][0] - pp[1][0])
                    y = pp[1][1] + t * (pp[2][1] - pp[1][1])
                    found.append(((ip, t), x, y))
            elif qq[0] == "seg":
                for _, off in _seg_arc(qq[1], qq[2], pp[1], alpha, pp[2], pp[3], scale):
                    x = pp[1][0] + alpha * math.cos(pp[2] + off)
                    y = pp[1][1] + alpha * math.sin(pp[2] + off)
                    found.append(((ip, max(off, 0.0)), x, y))
            else:
                for x, y, off in _arc_arc(pp[1], qq[1], alpha, pp[2:], qq[2:]):
                    found.append(((ip, max(off, 0.0)), x, y))
    found.sort()
    merge = 1e-9 * scale
    pts: list[Point] = []
    for _, x, y in found:
        if all(math.hypot(x - p.x, y - p.y) > merge for p in pts):
            pts.append(Point(x, y))
    return pts


def convex_hull(points) -> list:
    """Strict convex hull (counterclockwise, collinear points dropped) by
    Andrew's monotone chain. Points are returned in their input type."""
    pts = sorted(set((p[0], p[1]) for p in points))
    if len(pts) < 3:
        return pts

    def chain(seq):
        h = []
        for p in seq:
            while len(h) >= 2 and orient2d(h[-2], h[-1], p) <= 0:
                h.pop()
            h.append(p)
        return h

    lower, upper = chain(pts), chain(pts[::-1])
    return lower[:-1] + upper[:-1]
