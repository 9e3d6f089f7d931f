"""Filtered nerve complexes of polygon offsets.

The restricted nerve has one simplex per Voronoi cell (edges for bisector
edges, triangles for trisector vertices) and therefore linear size. The
unrestricted nerve contains every pair and triple of sites, valued at the
offset radius where their offsets first share a point.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from itertools import combinations

import numpy as np

from .geom import ConvexPolygon, Point, SiteSet, nearest_point, segment_polygon_distance
from .geom import _witness_candidates

Simplex = tuple  # sorted tuple of 1-3 vertex ids


@dataclass
class FilteredComplex:
    """Simplices of dimension 0-2 with a filtration value each.

    ``planar`` marks complexes that are subcomplexes of a triangulation of a
    point set in the plane which eventually contain all of its triangles
    (alpha complexes); persistence can then use planar duality.
    """

    simplices: list = field(default_factory=list)
    values: list = field(default_factory=list)
    planar: bool = False

    def __len__(self):
        return len(self.simplices)

    def add(self, simplex, value: float):
        self.simplices.append(tuple(simplex))
        self.values.append(float(value))

    def items(self):
        return zip(self.simplices, self.values)

    def count(self, dim: int) -> int:
        return sum(1 for s in self.simplices if len(s) == dim + 1)

    def as_dict(self) -> dict:
        return dict(zip(self.simplices, self.values))

    def check(self):
        """Raise ValueError unless the complex is closed, duplicate free and
        monotone."""
        vals = self.as_dict()
        if len(vals) != len(self.simplices):
            raise ValueError("duplicate simplices")
        for s, v in vals.items():
            if list(s) != sorted(set(s)):
                raise ValueError(f"simplex {s} is not a sorted set")
            if len(s) > 1:
                for face in combinations(s, len(s) - 1):
                    if face not in vals:
                        raise ValueError(f"face {face} of {s} missing")
                    if vals[face] > v:
                        raise ValueError(f"face {face} enters after {s}")


def _clamped_triangles(edge_vals: dict, tri_vals: dict):
    for t, v in tri_vals.items():
        a, b, c = t
        yield t, max(v, edge_vals[(a, b)], edge_vals[(a, c)], edge_vals[(b, c)])


def restricted_nerve(diagram) -> FilteredComplex:
    """Nerve of the Voronoi-restricted offsets.

    Edge {i, j} enters at the smallest critical value among the bisector
    edges of i and j, triangle {i, j, k} at the smallest value among its
    trisector vertices, raised to its largest edge value if needed.
    """
    n = len(diagram.sites)
    edges: dict = {}
    for e in diagram.edges:
        if e.sites not in edges or e.critical < edges[e.sites]:
            edges[e.sites] = e.critical
    tris: dict = {}
    for v in diagram.vertices:
        if v.sites not in tris or v.value < tris[v.sites]:
            tris[v.sites] = v.value
    fc = FilteredComplex()
    for i in range(n):
        fc.add((i,), 0.0)
    for s in sorted(edges):
        fc.add(s, edges[s])
    for s, v in sorted(_clamped_triangles(edges, tris)):
        fc.add(s, v)
    return fc


# --- pair and triple values ------------------------------------------------

@dataclass(frozen=True)
class PairInfo:
    """Half the distance of two sites, with the set of points attaining
    min max(d_i, d_j) as a segment (a single point unless edges are parallel)."""

    value: float
    seg: tuple  # (Point, Point)


def pair_info(P: ConvexPolygon, Q: ConvexPolygon) -> PairInfo:
    cands = list(_witness_candidates(P, Q))
    d = min(c[0] for c in cands)
    mids = sorted({((a[0] + b[0]) / 2, (a[1] + b[1]) / 2)
                   for dd, a, b in cands if dd <= d + 1e-12 * (1.0 + d)})
    lo, hi = mids[0], mids[-1]
    if len(mids) > 2:
        ux, uy = hi[0] - lo[0], hi[1] - lo[1]
        proj = [(m[0] * ux + m[1] * uy, m) for m in mids]
        lo, hi = min(proj)[1], max(proj)[1]
        lo, hi = sorted((lo, hi))
    return PairInfo(d / 2, (Point(*lo), Point(*hi)))


def _covered_part(seg, R: ConvexPolygon, w: float):
    """Lexicographically smallest point x of the segment with dist(x, R) <= w,
    or None."""
    (ax, ay), (bx, by) = seg
    tol = 1e-12 * (1.0 + w)

    def f(t):
        return nearest_point(R, ax + t * (bx - ax), ay + t * (by - ay))[0] - w

    if (ax, ay) == (bx, by):
        return Point(ax, ay) if f(0.0) <= tol else None
    if segment_polygon_distance((ax, ay), (bx, by), R) > w + tol:
        return None
    # f is convex along the segment: locate a feasible t, then both ends
    lo, hi = 0.0, 1.0
    for _ in range(100):
        m1, m2 = lo + (hi - lo) / 3, hi - (hi - lo) / 3
        if f(m1) <= f(m2):
            hi = m2
        else:
            lo = m1
    tm = 0.5 * (lo + hi)
    if f(tm) > tol:
        return None
    ends = []
    for target in (0.0, 1.0):
        if f(target) <= tol:
            ends.append(target)
            continue
        good, bad = tm, target
        for _ in range(60):
            mid = 0.5 * (good + bad)
            if f(mid) <= tol:
                good = mid
            else:
                bad = mid
        ends.append(good)
    pts = [Point(ax + t * (bx - ax), ay + t * (by - ay)) for t in ends]
    return min(pts)


def _features(P: ConvexPolygon):
    for m, (ax, ay, dx, dy, _, nx, ny) in enumerate(P.edge_data):
        yield ("point", (ax, ay))
        yield ("line", (ax, ay), (nx, ny))


def _equidistant_points(fa, fb, fc):
    """Points x with equal (signed, for lines) distance r to three features,
    as (x, y) tuples."""
    lines = [f for f in (fa, fb, fc) if f[0] == "line"]
    pts = [f[1] for f in (fa, fb, fc) if f[0] == "point"]
    rows, rhs = [], []
    for _, a, n in lines:
        rows.append((n[0], n[1], -1.0))
        rhs.append(n[0] * a[0] + n[1] * a[1])
    for q in pts[1:]:
        p = pts[0]
        rows.append((2 * (q[0] - p[0]), 2 * (q[1] - p[1]), 0.0))
        rhs.append(q[0] ** 2 + q[1] ** 2 - p[0] ** 2 - p[1] ** 2)
    L = np.array(rows)
    c = np.array(rhs)
    if not pts:
        if abs(np.linalg.det(L)) < 1e-14:
            return []
        x, y, _ = np.linalg.solve(L, c)
        return [(float(x), float(y))]
    # two linear equations in (x, y, r): a line of solutions z0 + s w
    w = np.cross(L[0], L[1])
    if np.linalg.norm(w) < 1e-14:
        return []
    z0 = np.linalg.lstsq(L, c, rcond=None)[0]
    p = pts[0]
    # |x(s) - p|² = r(s)²
    dx, dy = z0[0] - p[0], z0[1] - p[1]
    qa = w[0] ** 2 + w[1] ** 2 - w[2] ** 2
    qb = 2 * (dx * w[0] + dy * w[1] - z0[2] * w[2])
    qc = dx * dx + dy * dy - z0[2] ** 2
    if abs(qa) < 1e-14 * (abs(qb) + abs(qc) + 1.0):
        roots = [-qc / qb] if abs(qb) > 1e-300 else []
    else:
        disc = qb * qb - 4 * qa * qc
        if disc < 0:
            return []
        sq = math.sqrt(disc)
        roots = [(-qb - sq) / (2 * qa), (-qb + sq) / (2 * qa)]
    return [(float(z0[0] + s * w[0]), float(z0[1] + s * w[1])) for s in roots]


def cech_triple_enumerate(P1, P2, P3):
    """min over x of max_i dist(x, P_i) by enumerating feature triples.

    Slow but independent of any iteration: the minimizer is either on the
    minimizing set of one pair or equidistant from one feature per site.
    """
    polys = (P1, P2, P3)

    def F(x, y):
        return max(nearest_point(P, x, y)[0] for P in polys)

    cands = []
    for A, B in combinations(polys, 2):
        for p in pair_info(A, B).seg:
            cands.append((F(*p), p))
    for fa in _features(P1):
        for fb in _features(P2):
            for fc in _features(P3):
                for x in _equidistant_points(fa, fb, fc):
                    cands.append((F(*x), Point(*x)))
    best = min(c[0] for c in cands)
    return best, min(c[1] for c in cands if c[0] <= best + 1e-12 * (1.0 + best))


def _batch_nearest(sites: SiteSet, ids: np.ndarray, pts: np.ndarray):
    """Distances and unit gradients of dist(., P_ids[m]) at pts[m]."""
    starts, dirs, mask = sites.padded
    S, D = starts[ids], dirs[ids]
    r = pts[:, None, :] - S
    l2 = (D * D).sum(-1)
    t = np.clip((r * D).sum(-1) / l2, 0.0, 1.0)
    q = S + t[..., None] * D
    dist = np.hypot(*(pts[:, None, :] - q).transpose(2, 0, 1))
    arg = dist.argmin(axis=1)
    rows = np.arange(len(ids))
    d = dist[rows, arg]
    qq = q[rows, arg]
    cross = D[..., 0] * r[..., 1] - D[..., 1] * r[..., 0]
    inside = np.all((cross >= 0) | ~mask[ids], axis=1)
    with np.errstate(invalid="ignore", divide="ignore"):
        g = (pts - qq) / d[:, None]
    d = np.where(inside, 0.0, d)
    return d, g, inside


def _batch_trisectors(sites: SiteSet, triples: np.ndarray, x0: np.ndarray, iters: int = 60):
    """Damped Newton for points equidistant from each triple of sites.

    Returns positions, distances (m, 3), gradients (m, 3, 2) and a success mask.
    """
    m = len(triples)
    x = x0.copy()

    def evaluate(x):
        ds, gs, bad = [], [], np.zeros(m, dtype=bool)
        for c in range(3):
            d, g, inside = _batch_nearest(sites, triples[:, c], x)
            ds.append(d)
            gs.append(g)
            bad |= inside | (d == 0)
        ds = np.stack(ds, 1)
        gs = np.stack(gs, 1)
        F = np.stack([ds[:, 0] - ds[:, 1], ds[:, 0] - ds[:, 2]], 1)
        nf = np.where(bad, np.inf, np.hypot(F[:, 0], F[:, 1]))
        return ds, gs, F, nf

    ds, gs, F, nf = evaluate(x)
    for _ in range(iters):
        active = nf > 1e-14 * (1.0 + ds[:, 0])
        if not active.any():
            break
        J1 = gs[:, 0] - gs[:, 1]
        J2 = gs[:, 0] - gs[:, 2]
        det = J1[:, 0] * J2[:, 1] - J1[:, 1] * J2[:, 0]
        with np.errstate(invalid="ignore", divide="ignore"):
            dx = (F[:, 0] * J2[:, 1] - F[:, 1] * J1[:, 1]) / det
            dy = (F[:, 1] * J1[:, 0] - F[:, 0] * J2[:, 0]) / det
        step = np.where(active & np.isfinite(dx) & np.isfinite(dy), 1.0, 0.0)
        pending = step > 0
        for _ in range(30):
            if not pending.any():
                break
            trial = x - (step * np.nan_to_num(np.stack([dx, dy], 1).T)).T
            tds, tgs, tF, tnf = evaluate(trial)
            better = pending & (tnf < nf)
            x[better], ds[better], gs[better] = trial[better], tds[better], tgs[better]
            F[better], nf[better] = tF[better], tnf[better]
            pending &= ~better
            step = np.where(pending, step * 0.5, step)
    ok = nf <= 1e-10 * (1.0 + ds[:, 0])
    return x, ds, gs, ok


def _kkt(g) -> bool:
    """0 lies in the convex hull of three unit vectors."""
    (ax, ay), (bx, by), (cx, cy) = g
    s = (ax * by - ay * bx, bx * cy - by * cx, cx * ay - cy * ax)
    return min(s) >= -1e-9 or max(s) <= 1e-9


def cech_triple_value(P1: ConvexPolygon, P2: ConvexPolygon, P3: ConvexPolygon):
    """Smallest alpha at which the alpha-offsets of three sites share a point.

    Returns ``(value, witness)``.
    """
    sites = SiteSet(tuple(P.with_id(i) for i, P in enumerate((P1, P2, P3))))
    pairs = {(0, 1): pair_info(P1, P2), (0, 2): pair_info(P1, P3),
             (1, 2): pair_info(P2, P3)}
    out = _triple_values(sites, [(0, 1, 2)], pairs)
    return out[0]


def _triple_values(sites: SiteSet, triples, pairs: dict):
    """(value, witness) for each triple; ``pairs`` maps sorted id pairs to
    PairInfo."""
    res: list = [None] * len(triples)
    hard = []
    for idx, (a, b, c) in enumerate(triples):
        cand = [((a, b), c), ((a, c), b), ((b, c), a)]
        (pa, other) = max(cand, key=lambda pc: pairs[pc[0]].value)
        info = pairs[pa]
        w = info.value
        # most triples are decided by the pair that is farthest apart
        mx, my = info.seg[0]
        if info.seg[0] == info.seg[1]:
            if nearest_point(sites[other], mx, my)[0] <= w + 1e-12 * (1.0 + w):
                res[idx] = (w, info.seg[0])
                continue
        else:
            p = _covered_part(info.seg, sites[other], w)
            if p is not None:
                res[idx] = (w, p)
                continue
        hard.append(idx)
    if hard:
        tri = np.array([triples[i] for i in hard], dtype=np.intp)
        seeds = np.array([_seed(pairs, t) for t in tri])
        x, ds, gs, ok = _batch_trisectors(sites, tri, seeds)
        for row, idx in enumerate(hard):
            if ok[row] and _kkt(gs[row]):
                res[idx] = (float(ds[row].mean()), Point(float(x[row, 0]), float(x[row, 1])))
            else:
                a, b, c = triples[idx]
                res[idx] = cech_triple_enumerate(sites[a], sites[b], sites[c])
    return res


def _seed(pairs, t):
    a, b, c = (int(v) for v in t)
    ms = [pairs[p].seg[0] for p in ((a, b), (a, c), (b, c))]
    return (sum(m.x for m in ms) / 3, sum(m.y for m in ms) / 3)


def unrestricted_nerve(sites: SiteSet) -> FilteredComplex:
    """Full nerve: every pair at half its distance, every triple at its
    min-max radius. Size n + C(n, 2) + C(n, 3)."""
    n = len(sites)
    fc = FilteredComplex()
    for i in range(n):
        fc.add((i,), 0.0)
    pairs = {(i, j): pair_info(sites[i], sites[j]) for i, j in combinations(range(n), 2)}
    for s in sorted(pairs):
        fc.add(s, pairs[s].value)
    triples = list(combinations(range(n), 3))
    vals = _triple_values(sites, triples, pairs)
    for t, (v, _) in zip(triples, vals):
        # a triple never enters before its pairs; clamp away rounding
        fc.add(t, max(v, pairs[t[:2]].value, pairs[(t[0], t[2])].value, pairs[t[1:]].value))
    return fc
