"""Independent brute-force oracles shared by the tests."""

from decimal import Decimal
from fractions import Fraction

import numpy as np

from offsetnerve.geom import GeometryError, convex_hull, validate_polygon


def random_convex(rng, cx, cy, size, k=6):
    """Convex hull of k random points in a box of side ``size`` around (cx, cy),
    with coordinates rounded to 6 decimals; retries until valid."""
    while True:
        pts = {(round(float(x), 6), round(float(y), 6))
               for x, y in rng.uniform(-size / 2, size / 2, size=(k, 2)) + (cx, cy)}
        hull = convex_hull(list(pts))
        try:
            return validate_polygon([(Fraction(Decimal(repr(x))), Fraction(Decimal(repr(y))))
                                     for x, y in hull])
        except GeometryError:
            continue


def distance_to_polygon(P, pts):
    """Brute-force distance from each row of pts to the closed polygon P."""
    pts = np.atleast_2d(np.asarray(pts, dtype=float))
    V = P.vertices
    W = np.roll(V, -1, axis=0)
    best = np.full(len(pts), np.inf)
    inside = np.ones(len(pts), dtype=bool)
    for a, b in zip(V, W):
        d = b - a
        t = np.clip(((pts - a) @ d) / (d @ d), 0.0, 1.0)
        best = np.minimum(best, np.hypot(*(pts - a - t[:, None] * d).T))
        inside &= (d[0] * (pts[:, 1] - a[1]) - d[1] * (pts[:, 0] - a[0])) >= 0
    return np.where(inside, 0.0, best)


def offset_boundary(P, alpha, step):
    """Points along the boundary of the alpha-offset of P, about ``step`` apart,
    in counterclockwise order: edges pushed outward joined by vertex arcs."""
    V = P.vertices
    k = len(V)
    out = []
    for m in range(k):
        a, b = V[m], V[(m + 1) % k]
        d = b - a
        n = np.array([d[1], -d[0]]) / np.hypot(*d)
        s = np.linspace(0, 1, max(2, int(np.hypot(*d) / step)), endpoint=False)
        out.append(a + alpha * n + s[:, None] * d)
        # arc around b from this edge normal to the next edge normal
        e = V[(m + 2) % k] - b
        n2 = np.array([e[1], -e[0]]) / np.hypot(*e)
        t0 = np.arctan2(n[1], n[0])
        t1 = t0 + (np.arctan2(n2[1], n2[0]) - t0) % (2 * np.pi)
        th = np.linspace(t0, t1, max(2, int(alpha * (t1 - t0) / step)), endpoint=False)
        out.append(b + alpha * np.column_stack([np.cos(th), np.sin(th)]))
    return np.vstack(out)


def count_crossings(P, Q, alpha, step):
    """Sign changes of dist(., Q) - alpha around the offset boundary of P."""
    pts = offset_boundary(P, alpha, step)
    s = np.sign(distance_to_polygon(Q, pts) - alpha)
    s = s[s != 0]
    return int(np.count_nonzero(s != np.roll(s, 1)))
