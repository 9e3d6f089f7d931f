"""Point-sample approximation: grid sample, Delaunay triangulation, alpha
filtration.

Alpha values are radii (not squared radii) so the resulting barcodes live on
the same scale as the offset radius of the exact pipelines.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from fractions import Fraction

import numpy as np
from scipy.spatial import Delaunay, QhullError

from .geom import Point, SiteSet
from .nerve import FilteredComplex
from .predicates import dot_sign_many, incircle_many, orient_many

DEFAULT_MAX_POINTS = 10 ** 7


class SampleTooLarge(ValueError):
    pass


@dataclass(frozen=True)
class PointSample:
    points: np.ndarray  # (m, 2) cell centers, sorted by cell (column, then row)
    epsilon: float
    cell_side: float
    cells: np.ndarray  # (m, 2) integer cell indices
    origin: Point = Point(0.0, 0.0)

    def __len__(self):
        return len(self.points)

    @property
    def lattice(self) -> np.ndarray:
        """Cell centers in units of half a cell side: odd integers, exactly
        representable, so lattice cocircularity is detected exactly."""
        return (2 * self.cells + 1).astype(float)


def _cells_touching(P, s: float) -> np.ndarray:
    """Indices (i, j) of the cells [i s, (i+1) s) x [j s, (j+1) s) meeting P.

    Cells are half-open so that every point of the plane lies in exactly one
    of them; P itself is closed.
    """
    x0, y0, x1, y1 = P.bbox
    i = np.arange(math.floor(x0 / s) - 1, math.floor(x1 / s) + 2)
    j = np.arange(math.floor(y0 / s) - 1, math.floor(y1 / s) + 2)
    I, J = np.meshgrid(i, j, indexing="ij")
    I, J = I.ravel(), J.ravel()
    lx, hx = I * s, (I + 1) * s
    ly, hy = J * s, (J + 1) * s
    tol = 1e-12 * (1.0 + max(abs(x0), abs(y0), abs(x1), abs(y1)) + s)
    # signed slacks; the cell meets P iff all are > 0, or = 0 where allowed
    slacks = [(hx - x0, False), (x1 - lx, True), (hy - y0, False), (y1 - ly, True)]
    for ax, ay, _, _, _, nx, ny in P.edge_data:
        cx = lx if nx >= 0 else hx
        cy = ly if ny >= 0 else hy
        slacks.append((-((cx - ax) * nx + (cy - ay) * ny), nx >= 0 and ny >= 0))
    keep = np.ones(len(I), dtype=bool)
    unsure = np.zeros(len(I), dtype=bool)
    for g, _ in slacks:
        keep &= g >= -tol
        unsure |= np.abs(g) <= tol
    for m in np.flatnonzero(keep & unsure):
        keep[m] = _cell_meets_exact(P, float(lx[m]), float(ly[m]), float(hx[m]), float(hy[m]))
    return np.column_stack([I[keep], J[keep]])


def _cell_meets_exact(P, lx, ly, hx, hy) -> bool:
    """Separating-axis test of P against [lx, hx) x [ly, hy) in rationals.

    The half-open box is the limit of [lx, hx - d] x [ly, hy - d] as d -> 0,
    so a zero slack counts as contact only if it does not involve hx or hy.
    """
    lx, ly, hx, hy = (Fraction(v) for v in (lx, ly, hx, hy))
    pts = P.exact
    if not (min(p[0] for p in pts) < hx and max(p[0] for p in pts) >= lx):
        return False
    if not (min(p[1] for p in pts) < hy and max(p[1] for p in pts) >= ly):
        return False
    k = len(pts)
    for m in range(k):
        a, b = pts[m], pts[(m + 1) % k]
        nx, ny = b[1] - a[1], a[0] - b[0]
        cx = lx if nx >= 0 else hx
        cy = ly if ny >= 0 else hy
        g = (cx - a[0]) * nx + (cy - a[1]) * ny
        if g > 0 or (g == 0 and (nx < 0 or ny < 0)):
            return False
    return True


def grid_sample(sites: SiteSet, epsilon: float, cell_side: float | None = None,
                max_points: int = DEFAULT_MAX_POINTS) -> PointSample:
    """Centers of the grid cells (anchored at the origin) meeting some polygon.

    The cell side defaults to sqrt(2) * epsilon, so every point of the union
    is within epsilon of a sample point and vice versa. Raises
    SampleTooLarge if more than ``max_points`` cells would be produced.
    """
    if not epsilon > 0:
        raise ValueError("epsilon must be positive")
    s = float(cell_side) if cell_side is not None else math.sqrt(2.0) * epsilon
    estimate = 0
    for P in sites:
        x0, y0, x1, y1 = P.bbox
        estimate += (math.floor(x1 / s) - math.floor(x0 / s) + 2) * (
            math.floor(y1 / s) - math.floor(y0 / s) + 2)
        if estimate > 4 * max_points + 16:
            raise SampleTooLarge(f"more than {max_points} sample points at epsilon={epsilon}")
    cells = [_cells_touching(P, s) for P in sites]
    if cells:
        cells = np.unique(np.concatenate(cells), axis=0)
    else:
        cells = np.zeros((0, 2), dtype=np.int64)
    if len(cells) > max_points:
        raise SampleTooLarge(f"{len(cells)} sample points exceed the cap of {max_points}")
    pts = (cells + 0.5) * s
    return PointSample(pts.astype(float), float(epsilon), s, cells.astype(np.int64))


# --- Delaunay ---------------------------------------------------------------

@dataclass
class Triangulation:
    points: np.ndarray
    triangles: np.ndarray  # (t, 3) counterclockwise

    @property
    def edges(self) -> np.ndarray:
        """Sorted unique vertex pairs."""
        if len(self.triangles) == 0:
            return self._lower_edges()
        t = self.triangles
        e = np.concatenate([t[:, [0, 1]], t[:, [1, 2]], t[:, [2, 0]]])
        return np.unique(np.sort(e, axis=1), axis=0)

    def _lower_edges(self) -> np.ndarray:
        # collinear or tiny inputs: the path through the sorted points
        m = len(self.points)
        if m < 2:
            return np.zeros((0, 2), dtype=np.intp)
        order = np.lexsort((self.points[:, 1], self.points[:, 0]))
        e = np.column_stack([order[:-1], order[1:]])
        return np.unique(np.sort(e, axis=1), axis=0)


def _edge_table(tri: np.ndarray):
    """Per directed triangle edge: (u, v, triangle, opposite vertex)."""
    t = np.arange(len(tri))
    rows = []
    for a, b, c in ((0, 1, 2), (1, 2, 0), (2, 0, 1)):
        rows.append(np.column_stack([tri[:, a], tri[:, b], t, tri[:, c]]))
    return np.concatenate(rows)


def _interior_pairs(tri: np.ndarray):
    """Internal edges as rows (u, v, t1, o1, t2, o2) with u < v."""
    E = _edge_table(tri)
    key = np.sort(E[:, :2], axis=1)
    order = np.lexsort((key[:, 1], key[:, 0]))
    key, E = key[order], E[order]
    same = np.all(key[1:] == key[:-1], axis=1)
    i = np.flatnonzero(same)
    return np.column_stack([key[i], E[i, 2:4], E[i + 1, 2:4]])


def delaunay(points) -> Triangulation:
    """Delaunay triangulation with a deterministic choice among cocircular
    configurations: of the two diagonals of a cocircular quadrilateral, the
    one incident to its smallest point index is kept."""
    pts = np.asarray(points, dtype=float).reshape(-1, 2)
    if len(pts) < 3:
        return Triangulation(pts, np.zeros((0, 3), dtype=np.intp))
    try:
        tri = Delaunay(pts).simplices.astype(np.intp)
    except QhullError:
        return Triangulation(pts, np.zeros((0, 3), dtype=np.intp))
    # counterclockwise orientation (exact: slivers are common on grids)
    cw = orient_many(pts[tri[:, 0]], pts[tri[:, 1]], pts[tri[:, 2]]) < 0
    tri[cw] = tri[cw][:, [0, 2, 1]]
    for _ in range(len(tri) + 1):
        rows = _interior_pairs(tri)
        if len(rows) == 0:
            break
        u, v, t1, o1, t2, o2 = rows.T
        ta = tri[t1]
        s = incircle_many(pts[ta[:, 0]], pts[ta[:, 1]], pts[ta[:, 2]], pts[o2])
        lo = np.minimum(np.minimum(u, v), np.minimum(o1, o2))
        flip = (s == 0) & (np.minimum(u, v) != lo) | (s > 0)
        r = np.flatnonzero(flip)
        # only strictly convex quadrilaterals can be flipped
        convex = (orient_many(pts[o1[r]], pts[o2[r]], pts[u[r]])
                  * orient_many(pts[o1[r]], pts[o2[r]], pts[v[r]])) < 0
        r = r[convex]
        if len(r) == 0:
            break
        # a maximal set of flips with pairwise disjoint triangles
        used = set()
        pick = []
        for k, a, b in zip(r.tolist(), t1[r].tolist(), t2[r].tolist()):
            if a not in used and b not in used:
                used.update((a, b))
                pick.append(k)
        r = np.array(pick, dtype=np.intp)
        T1, T2, O1, O2 = t1[r], t2[r], o1[r], o2[r]
        # t1 is (uu, vv, o1) up to rotation; t2 is (vv, uu, o2)
        k = np.argmax(tri[T1] == O1[:, None], axis=1)
        uu = tri[T1, (k + 1) % 3]
        vv = tri[T1, (k + 2) % 3]
        tri[T1] = np.column_stack([uu, O2, O1])
        tri[T2] = np.column_stack([vv, O1, O2])
    if len(rows) and np.any(s > 0):
        # Qhull works in floating point; near-collinear input can leave a
        # triangulation that no flip sequence repairs
        warnings.warn(f"{int(np.count_nonzero(s > 0))} Delaunay violations remain "
                      "after flipping; the input is nearly degenerate", RuntimeWarning)
    return Triangulation(pts, tri)


def _circumradius(pts, tri):
    a, b, c = pts[tri[:, 0]], pts[tri[:, 1]], pts[tri[:, 2]]
    la = np.hypot(*(b - c).T)
    lb = np.hypot(*(a - c).T)
    lc = np.hypot(*(a - b).T)
    area2 = np.abs((b[:, 0] - a[:, 0]) * (c[:, 1] - a[:, 1])
                   - (b[:, 1] - a[:, 1]) * (c[:, 0] - a[:, 0]))
    with np.errstate(divide="ignore"):
        return la * lb * lc / (2 * area2)


def alpha_filtration(tri: Triangulation, scale: float = 1.0) -> FilteredComplex:
    """Alpha filtration with radius values, multiplied by ``scale``.

    Triangles enter at their circumradius; an edge enters at half its length
    if no point lies strictly inside its diametral circle (Gabriel edge),
    otherwise at the smallest circumradius of its triangles.
    """
    pts, T = tri.points, tri.triangles
    fc = FilteredComplex([(i,) for i in range(len(pts))], [0.0] * len(pts), planar=True)
    edges = tri.edges
    if len(edges) == 0:
        return fc
    half = np.hypot(*(pts[edges[:, 0]] - pts[edges[:, 1]]).T) / 2 * scale
    if len(T) == 0:
        for (u, v), h in zip(edges.tolist(), half.tolist()):
            fc.add((u, v), h)
        return fc
    R = _circumradius(pts, T) * scale
    E = _edge_table(T)
    key = np.sort(E[:, :2], axis=1)
    pos = np.searchsorted(edges[:, 0] * len(pts) + edges[:, 1], key[:, 0] * len(pts) + key[:, 1])
    # obtuse angle at the opposite vertex <=> it lies inside the diametral circle
    inside = dot_sign_many(pts[E[:, 3]], pts[E[:, 0]], pts[E[:, 1]]) < 0
    blocked = np.zeros(len(edges), dtype=bool)
    np.logical_or.at(blocked, pos, inside)
    minR = np.full(len(edges), np.inf)
    np.minimum.at(minR, pos, R[E[:, 2]])
    evals = np.where(blocked, minR, half)
    # triangles never enter before their edges
    tv = np.maximum(R, evals[pos.reshape(3, -1)].max(axis=0))
    fc.simplices += list(map(tuple, edges.tolist()))
    fc.values += evals.tolist()
    fc.simplices += list(map(tuple, np.sort(T, axis=1).tolist()))
    fc.values += tv.tolist()
    return fc


def sample_filtration(sample: PointSample) -> FilteredComplex:
    """Alpha filtration of a grid sample, triangulated on its exact lattice."""
    tri = delaunay(sample.lattice)
    return alpha_filtration(tri, scale=sample.cell_side / 2)
