"""Rasterized ground truth for tests.

Betti numbers of the offset union are read off a pixel grid: components of
the covered cells (4-connected) and bounded components of the uncovered
cells (8-connected). A nearest-site raster gives an independent check of
Voronoi face adjacency.
"""

from __future__ import annotations

import math
from itertools import combinations
from dataclasses import dataclass
from fractions import Fraction

import numpy as np
from scipy import ndimage
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components

from .geom import Point, SiteSet, pair_distance

FOUR = ndimage.generate_binary_structure(2, 1)
EIGHT = ndimage.generate_binary_structure(2, 2)
BACKGROUND = -1


class ResolutionTooCoarse(ValueError):
    pass


@dataclass(frozen=True)
class RasterGrid:
    """Cell (row r, column c) has center origin + step * (c + 0.5, r + 0.5)."""

    origin: Point
    step: float
    width: int
    height: int
    labels: np.ndarray  # (height, width) int, site id or BACKGROUND

    def centers(self):
        xs = self.origin.x + self.step * (np.arange(self.width) + 0.5)
        ys = self.origin.y + self.step * (np.arange(self.height) + 0.5)
        return np.meshgrid(xs, ys)

    def adjacency(self) -> set:
        """Pairs of site ids whose cells share a side somewhere in the grid."""
        L = self.labels
        pairs = set()
        for a, b in ((L[:, :-1], L[:, 1:]), (L[:-1, :], L[1:, :])):
            m = (a != b) & (a >= 0) & (b >= 0)
            for u, v in np.unique(np.sort(np.column_stack([a[m], b[m]]), axis=1), axis=0):
                pairs.add((int(u), int(v)))
        return pairs


def _polygon_distance(P, X, Y):
    """Euclidean distance from the points (X, Y) to the closed polygon P."""
    inside = np.ones(X.shape, dtype=bool)
    d2 = np.full(X.shape, np.inf)
    for ax, ay, dx, dy, l2, nx, ny in P.edge_data:
        px, py = X - ax, Y - ay
        inside &= px * nx + py * ny <= 0
        t = np.clip((px * dx + py * dy) / l2, 0.0, 1.0)
        ex, ey = px - t * dx, py - t * dy
        np.minimum(d2, ex * ex + ey * ey, out=d2)
    d = np.sqrt(d2)
    d[inside] = 0.0
    return d


def _grid_for(sites: SiteSet, reach: float, step: float):
    x0, y0, x1, y1 = sites.bounds()
    pad = reach + 3 * step
    ox = math.floor((x0 - pad) / step) * step
    oy = math.floor((y0 - pad) / step) * step
    w = int(math.ceil((x1 + pad - ox) / step))
    h = int(math.ceil((y1 + pad - oy) / step))
    return ox, oy, w, h


def _offset_rows(P, alpha: float, ys: np.ndarray):
    """Extent [left, right] of the alpha-offset of P along each line y = ys.

    The boundary of the offset consists of arcs of the vertex circles and
    of the edges pushed outward by alpha, so its extremes on a horizontal
    line are extremes over those pieces. Rows missing the offset get
    left = +inf, right = -inf.
    """
    left = np.full(len(ys), np.inf)
    right = np.full(len(ys), -np.inf)
    v = P.vertices
    for vx, vy in v:
        h2 = alpha * alpha - (ys - vy) ** 2
        ok = h2 >= 0
        r = np.sqrt(np.where(ok, h2, 0.0))
        np.minimum(left, np.where(ok, vx - r, np.inf), out=left)
        np.maximum(right, np.where(ok, vx + r, -np.inf), out=right)
    for ax, ay, dx, dy, _, nx, ny in P.edge_data:
        if dy == 0:
            continue  # its ends lie on vertex circles
        sx, sy = ax + alpha * nx, ay + alpha * ny
        t = (ys - sy) / dy
        ok = (t >= 0) & (t <= 1)
        x = sx + t * dx
        np.minimum(left, np.where(ok, x, np.inf), out=left)
        np.maximum(right, np.where(ok, x, -np.inf), out=right)
    return left, right


def _covered_runs(sites: SiteSet, alpha: float, step: float, grid):
    """Maximal horizontal runs of covered cells as arrays (row, first, last)."""
    ox, oy, w, h = grid
    R, A, B = [], [], []
    for P in sites:
        bx0, by0, bx1, by1 = P.bbox
        r0 = max(int(math.floor((by0 - alpha - oy) / step)) - 1, 0)
        r1 = min(int(math.ceil((by1 + alpha - oy) / step)) + 1, h)
        rows = np.arange(r0, r1)
        left, right = _offset_rows(P, alpha, oy + step * (rows + 0.5))
        # cell c is covered when left <= ox + step * (c + 0.5) <= right
        with np.errstate(invalid="ignore"):
            c0 = np.ceil((left - ox) / step - 0.5)
            c1 = np.floor((right - ox) / step - 0.5)
        keep = np.isfinite(c0) & np.isfinite(c1) & (c0 <= c1)
        R.append(rows[keep])
        A.append(np.clip(c0[keep], 0, w - 1).astype(np.int64))
        B.append(np.clip(c1[keep], 0, w - 1).astype(np.int64))
    if not R:
        return (np.zeros(0, dtype=np.int64),) * 3
    R, A, B = np.concatenate(R), np.concatenate(A), np.concatenate(B)
    # merge overlapping or abutting runs of the same row; rows are spaced
    # apart in a global coordinate so runs of different rows never merge
    span = w + 2
    g0, g1 = R * span + A, R * span + B
    order = np.lexsort((g1, g0))
    g0, g1 = g0[order], g1[order]
    reach = np.maximum.accumulate(g1)
    start = np.ones(len(g0), dtype=bool)
    start[1:] = g0[1:] > reach[:-1] + 1
    idx = np.flatnonzero(start)
    m0 = g0[idx]
    m1 = np.maximum.reduceat(g1, idx)
    return m0 // span, m0 % span, m1 % span


def _gap_runs(runs, w: int, h: int):
    """Runs of uncovered cells: the complement of ``runs`` in every row."""
    R, A, B = runs
    rows = np.arange(h)
    R = np.concatenate([R, rows, rows])
    A = np.concatenate([A, np.full(h, -1), np.full(h, w)])
    B = np.concatenate([B, np.full(h, -1), np.full(h, w)])
    order = np.lexsort((A, R))
    R, A, B = R[order], A[order], B[order]
    same = R[1:] == R[:-1]
    a, b = B[:-1] + 1, A[1:] - 1
    keep = same & (a <= b)
    return R[:-1][keep], a[keep], b[keep]


def _run_components(runs, slack: int):
    """Component label per run; runs in adjacent rows are linked when their
    column ranges overlap (slack 0, 4-connectivity) or touch diagonally
    (slack 1, 8-connectivity)."""
    R, A, B = runs
    n = len(R)
    if n == 0:
        return 0, np.zeros(0, dtype=np.int64)
    W = int(max(A.max(), B.max())) + 8
    ka = R * W + A + 2
    kb = R * W + B + 2
    lo = np.searchsorted(kb, (R + 1) * W + A - slack + 2, side="left")
    hi = np.searchsorted(ka, (R + 1) * W + B + slack + 2, side="right")
    cnt = np.maximum(hi - lo, 0)
    src = np.repeat(np.arange(n), cnt)
    dst = np.repeat(lo - np.cumsum(cnt) + cnt, cnt) + np.arange(cnt.sum())
    g = coo_matrix((np.ones(len(src), dtype=np.int8), (src, dst)), shape=(n, n))
    return connected_components(g, directed=False)


def offset_mask(sites: SiteSet, alpha: float, step: float):
    """Cells whose center is within alpha of some site.

    Returns (origin, mask) with mask of shape (height, width); the grid has
    a margin of at least three uncovered cells on every side.
    """
    grid = _grid_for(sites, alpha, step)
    ox, oy, w, h = grid
    mask = np.zeros((h, w), dtype=bool)
    for r, a, b in zip(*(x.tolist() for x in _covered_runs(sites, alpha, step, grid))):
        mask[r, a:b + 1] = True
    return Point(ox, oy), mask


def betti_of_mask(mask: np.ndarray) -> tuple:
    """(beta0, beta1) of a binary image: 4-connected foreground components
    and bounded 8-connected background components."""
    _, b0 = ndimage.label(mask, structure=FOUR)
    lab, nb = ndimage.label(~mask, structure=EIGHT)
    border = np.unique(np.concatenate([lab[0], lab[-1], lab[:, 0], lab[:, -1]]))
    return int(b0), int(nb - np.count_nonzero(border))


def _raster_betti_runs(sites: SiteSet, alpha: float, step: float) -> tuple:
    grid = _grid_for(sites, alpha, step)
    ox, oy, w, h = grid
    fg = _covered_runs(sites, alpha, step, grid)
    b0, _ = _run_components(fg, 0)
    bg = _gap_runs(fg, w, h)
    nb, lab = _run_components(bg, 1)
    R, A, B = bg
    outer = np.unique(lab[(R == 0) | (R == h - 1) | (A == 0) | (B == w - 1)])
    holes = 0
    for k in np.setdiff1d(np.arange(nb), outer):
        sel = np.flatnonzero(lab == k)
        rows = np.repeat(R[sel], B[sel] - A[sel] + 1)
        cols = np.concatenate([np.arange(a, b + 1) for a, b in zip(A[sel], B[sel])])
        x = ox + step * (cols + 0.5)
        y = oy + step * (rows + 0.5)
        d = np.min([_polygon_distance(P, x, y) for P in sites], axis=0)
        # a true hole holds a local maximum of the distance, at least five
        # steps above alpha; cells cut off by the grid where two offset
        # boundaries cross at a shallow angle stay within a step of alpha
        holes += bool(d.max() > alpha + 2 * step)
    return int(b0), holes


def check_resolution(alpha: float, step: float, filtration_values=None):
    if not step > 0:
        raise ValueError("step must be positive")
    if step > alpha / 10:
        raise ResolutionTooCoarse(f"step {step} exceeds alpha/10 = {alpha / 10}")
    if filtration_values is not None:
        v = np.asarray(list(filtration_values), dtype=float)
        v = v[np.isfinite(v)]
        if len(v) and np.min(np.abs(v - alpha)) < 5 * step:
            raise ResolutionTooCoarse(
                f"alpha {alpha} is within 5 steps of a filtration value")


def raster_betti_many(sites: SiteSet, alphas, step: float, filtration_values=None) -> list:
    """:func:`raster_betti` for several radii."""
    alphas = [float(a) for a in alphas]
    for a in alphas:
        check_resolution(a, step, filtration_values)
    if len(sites) == 0:
        return [(0, 0) for _ in alphas]
    return [_raster_betti_runs(sites, a, step) for a in alphas]


def raster_betti(sites: SiteSet, alpha: float, step: float, filtration_values=None) -> tuple:
    """(beta0, beta1) of the alpha-offset union on a grid of the given step.

    A bounded uncovered component counts as a hole only if some cell in it
    is more than two steps farther than alpha from every site. Raises
    ResolutionTooCoarse if step > alpha / 10, or if ``filtration_values``
    are given and alpha lies within 5 steps of one.
    """
    return raster_betti_many(sites, [alpha], step, filtration_values)[0]


def _exact_d2(P, x: Fraction, y: Fraction) -> Fraction:
    """Squared distance from a rational point to P, in rationals."""
    pts = P.exact
    k = len(pts)
    if all((b[0] - a[0]) * (y - a[1]) - (b[1] - a[1]) * (x - a[0]) >= 0
           for a, b in zip(pts, pts[1:] + pts[:1])):
        return Fraction(0)
    best = None
    for m in range(k):
        a, b = pts[m], pts[(m + 1) % k]
        dx, dy = b[0] - a[0], b[1] - a[1]
        t = ((x - a[0]) * dx + (y - a[1]) * dy) / (dx * dx + dy * dy)
        t = min(max(t, Fraction(0)), Fraction(1))
        ex, ey = x - a[0] - t * dx, y - a[1] - t * dy
        d2 = ex * ex + ey * ey
        if best is None or d2 < best:
            best = d2
    return best


def raster_nearest_site(sites: SiteSet, step: float, margin: float | None = None) -> RasterGrid:
    """Label each cell center with its nearest site (ties to the smaller id).

    The grid covers the bounding box of the sites inflated by ``margin``,
    by default the largest distance between two sites. Near-ties in floating
    point are settled with rational distances.
    """
    if not step > 0:
        raise ValueError("step must be positive")
    if len(sites) == 0:
        return RasterGrid(Point(0.0, 0.0), step, 0, 0, np.zeros((0, 0), dtype=int))
    x0, y0, x1, y1 = sites.bounds()
    if margin is None:
        margin = max((pair_distance(P, Q) for P, Q in combinations(sites, 2)), default=0.0)
        margin = max(margin, step)
    ox, oy, w, h = _grid_for(sites, margin, step)
    xs = ox + step * (np.arange(w) + 0.5)
    ys = oy + step * (np.arange(h) + 0.5)
    X, Y = np.meshgrid(xs, ys)
    D = np.stack([_polygon_distance(P, X, Y) for P in sites])
    ids = np.array([P.id for P in sites])
    order = np.argsort(ids, kind="stable")
    D, ids = D[order], ids[order]
    first = np.argmin(D, axis=0)
    labels = ids[first]
    if len(sites) > 1:
        part = np.partition(D, 1, axis=0)
        near = np.abs(part[1] - part[0]) <= 1e-9 * (1.0 + part[0])
        polys = [sites[i] for i in order]
        for r, c in zip(*np.nonzero(near)):
            x, y = Fraction(float(X[r, c])), Fraction(float(Y[r, c]))
            cand = np.flatnonzero(D[:, r, c] <= part[0][r, c] * (1 + 1e-8) + 1e-9)
            best = min(cand, key=lambda k: (_exact_d2(polys[k], x, y), ids[k]))
            labels[r, c] = ids[best]
    return RasterGrid(Point(ox, oy), float(step), w, h, labels)


def write_pgm(grid: RasterGrid, path) -> None:
    """Binary PGM with one gray level per site id; background is black."""
    L = grid.labels
    top = max(int(L.max()) + 1, 1) if L.size else 1
    img = np.where(L < 0, 0, 40 + (L % top) * 215 // max(top - 1, 1)).astype(np.uint8)
    with open(path, "wb") as fh:
        fh.write(b"P5\n%d %d\n255\n" % (grid.width, grid.height))
        # PGM rows run top to bottom
        fh.write(img[::-1].tobytes())
