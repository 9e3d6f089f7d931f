"""Seeded random instances of disjoint convex polygons.

Each attempt picks a uniform center in a square of side 100, a rectangle
around it with side lengths uniform in [2, 10] (clipped to the square), and
takes the convex hull of 5 uniform points in that rectangle. The polygon is
kept if it is a valid site and misses every polygon accepted so far.
"""

from __future__ import annotations

from decimal import Decimal
from fractions import Fraction

import numpy as np

from .geom import (GeometryError, SiteSet, check_disjoint, convex_hull,
                   polygons_intersect, validate_polygon)

BOX = 100.0
MIN_SIDE, MAX_SIDE = 2.0, 10.0
POINTS_PER_POLYGON = 5
DECIMALS = 6
MAX_CONSECUTIVE_FAILURES = 100_000


class GeneratorFailure(RuntimeError):
    pass


def _round(v: float) -> Fraction:
    return Fraction(Decimal(f"{v:.{DECIMALS}f}"))


def _buckets(bbox):
    x0, y0, x1, y1 = (int(v // MAX_SIDE) for v in bbox)
    return [(i, j) for i in range(x0, x1 + 1) for j in range(y0, y1 + 1)]


def random_sites(n: int, seed: int = 0, box: float = BOX,
                 max_failures: int = MAX_CONSECUTIVE_FAILURES) -> SiteSet:
    """n pairwise disjoint random convex polygons (at most 5 vertices)."""
    if n < 0:
        raise ValueError("n must be non-negative")
    rng = np.random.default_rng(seed)
    polys = []
    grid: dict = {}  # bucket of side MAX_SIDE -> polygon indices
    fails = 0
    while len(polys) < n:
        if fails >= max_failures:
            raise GeneratorFailure(
                f"{fails} consecutive rejections after {len(polys)} polygons")
        cx, cy = rng.uniform(0.0, box, size=2)
        w, h = rng.uniform(MIN_SIDE, MAX_SIDE, size=2)
        x0, x1 = max(0.0, cx - w / 2), min(box, cx + w / 2)
        y0, y1 = max(0.0, cy - h / 2), min(box, cy + h / 2)
        xs = rng.uniform(x0, x1, size=POINTS_PER_POLYGON)
        ys = rng.uniform(y0, y1, size=POINTS_PER_POLYGON)
        pts = {(round(float(x), DECIMALS), round(float(y), DECIMALS)): (_round(x), _round(y))
               for x, y in zip(xs, ys)}
        hull = [pts[p] for p in convex_hull(list(pts))]
        try:
            P = validate_polygon(hull, len(polys))
        except GeometryError:
            fails += 1
            continue
        cells = _buckets(P.bbox)
        near = sorted({j for c in cells for j in grid.get(c, ())})
        if any(polygons_intersect(P, polys[j]) for j in near):
            fails += 1
            continue
        fails = 0
        for c in cells:
            grid.setdefault(c, []).append(len(polys))
        polys.append(P)
    check_disjoint(polys)
    return SiteSet(tuple(polys))
