"""Persistence barcodes over Z/2 and the bottleneck distance.

Three routes compute the same pairing of a filtered complex:

* ``homology``: boundary matrix column reduction with clearing (columns of
  simplices that already appeared as pivots are skipped);
* ``cohomology``: the same reduction on the coboundary matrix, processed in
  reverse filtration order, which is much cheaper when triangles vastly
  outnumber edges;
* ``planar``: union-find for components, and union-find on the dual graph
  (triangles plus the outer face, in reverse order) for one-cycles. Only
  valid for complexes that grow into a full triangulation of a planar
  point set, such as alpha complexes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import maximum_bipartite_matching
from scipy.spatial import cKDTree

INF = math.inf


class UnsortableFiltration(ValueError):
    """A face is missing or enters after one of its cofaces."""


@dataclass
class Barcode:
    """Intervals [birth, death) per dimension; death may be infinite."""

    bars: dict = field(default_factory=lambda: {0: [], 1: []})

    def intervals(self, dim: int, show_zero: bool = False) -> list:
        out = self.bars.get(dim, [])
        if not show_zero:
            out = [b for b in out if b[1] > b[0]]
        return sorted(out)

    def essential(self, dim: int) -> list:
        return [b for b in self.bars.get(dim, []) if b[1] == INF]

    def betti(self, dim: int, alpha: float) -> int:
        return sum(1 for b, d in self.bars.get(dim, []) if b <= alpha < d)

    def __len__(self):
        return sum(len(v) for v in self.bars.values())


def _indexed(fc):
    """Sort a filtered complex by (value, dim, ids).

    Returns (dims, vals, bnd) in that order, where row k of the (m, 3) array
    ``bnd`` holds the sorted positions of the faces of simplex k (-1 pads).
    Raises UnsortableFiltration on duplicates, missing faces, or a face
    entering after one of its cofaces.
    """
    m = len(fc.simplices)
    if m == 0:
        return np.zeros(0, dtype=np.int64), np.zeros(0), np.zeros((0, 3), dtype=np.int64)
    vals = np.asarray(fc.values, dtype=float)
    dims = np.fromiter((len(t) - 1 for t in fc.simplices), dtype=np.int64, count=m)
    if dims.min() < 0 or dims.max() > 2:
        raise UnsortableFiltration("only simplices of dimension 0 to 2 are supported")
    ids = np.full((m, 3), -1, dtype=np.int64)
    for d in range(3):
        sel = np.flatnonzero(dims == d)
        if len(sel):
            ids[sel, :d + 1] = np.sort(
                np.array([fc.simplices[k] for k in sel], dtype=np.int64), axis=1)
    order = np.lexsort((ids[:, 2], ids[:, 1], ids[:, 0], dims, vals))
    vals, dims, ids = vals[order], dims[order], ids[order]
    N = int(ids.max()) + 2
    pos = np.arange(m)
    tri = ids[dims == 2]
    if len(tri) > 1 and len(np.unique(tri, axis=0)) < len(tri):
        raise UnsortableFiltration("duplicate simplices")
    # vertex and edge lookup tables: sorted key -> position
    tables = []
    for d in (0, 1):
        sel = np.flatnonzero(dims == d)
        key = ids[sel, 0] if d == 0 else ids[sel, 0] * N + ids[sel, 1]
        o = np.argsort(key, kind="stable")
        key, where = key[o], pos[sel][o]
        if len(key) > 1 and np.any(key[1:] == key[:-1]):
            raise UnsortableFiltration("duplicate simplices")
        tables.append((key, where))
    bnd = np.full((m, 3), -1, dtype=np.int64)
    for d, faces in ((1, ((0,), (1,))), (2, ((0, 1), (0, 2), (1, 2)))):
        sel = np.flatnonzero(dims == d)
        if len(sel) == 0:
            continue
        key_t, where_t = tables[d - 1]
        for c, f in enumerate(faces):
            key = ids[sel, f[0]] if d == 1 else ids[sel, f[0]] * N + ids[sel, f[1]]
            at = np.minimum(np.searchsorted(key_t, key), max(len(key_t) - 1, 0))
            ok = key_t[at] == key if len(key_t) else np.zeros(len(key), dtype=bool)
            if not ok.all():
                k = sel[np.flatnonzero(~ok)[0]]
                raise UnsortableFiltration(f"a face of {_as_tuple(ids[k])} is missing")
            fpos = where_t[at]
            late = np.flatnonzero(fpos > sel)
            if len(late):
                k = late[0]
                raise UnsortableFiltration(
                    f"a face of {_as_tuple(ids[sel[k]])} (value {vals[fpos[k]]}) "
                    f"enters after it (value {vals[sel[k]]})")
            bnd[sel, c] = fpos
    return dims, vals, bnd


def _as_tuple(row):
    return tuple(int(x) for x in row if x >= 0)


def _collect(dims, vals, pairs):
    bars = {0: [], 1: []}
    paired = np.zeros(len(dims), dtype=bool)
    if pairs:
        P = np.asarray(pairs, dtype=np.int64)
        paired[P.ravel()] = True
        for d in (0, 1):
            sel = P[dims[P[:, 0]] == d]
            bars[d] = list(zip(vals[sel[:, 0]].tolist(), vals[sel[:, 1]].tolist()))
    for d in (0, 1):
        k = np.flatnonzero(~paired & (dims == d))
        bars[d] += [(v, INF) for v in vals[k].tolist()]
        bars[d].sort()
    return Barcode(bars)


def _columns(bnd):
    return [tuple(x for x in r if x >= 0) for r in bnd.tolist()]


def _reduce_homology(dims, bnd, clearing=True):
    cols_in = _columns(bnd)
    dims = dims.tolist()
    pivot_of = {}
    cols = {}
    pairs = []
    cleared = set()
    for dim in sorted({d for d in dims if d > 0}, reverse=True):
        for j, d in enumerate(dims):
            if d != dim or j in cleared:
                continue
            col = set(cols_in[j])
            while col:
                low = max(col)
                k = pivot_of.get(low)
                if k is None:
                    break
                col ^= cols[k]
            if col:
                low = max(col)
                pivot_of[low] = j
                cols[j] = col
                pairs.append((low, j))
                if clearing:
                    cleared.add(low)
    return pairs


def _reduce_cohomology(dims, bnd):
    n = len(dims)
    cob = [[] for _ in range(n)]
    for j, faces in enumerate(_columns(bnd)):
        for f in faces:
            cob[f].append(j)
    dims = dims.tolist()
    pivot_of = {}
    cols = {}
    pairs = []
    cleared = set()
    for dim in range(max(dims, default=0)):
        for i in range(n - 1, -1, -1):
            if dims[i] != dim or i in cleared:
                continue
            col = set(cob[i])
            while col:
                low = min(col)
                k = pivot_of.get(low)
                if k is None:
                    break
                col ^= cols[k]
            if col:
                low = min(col)
                pivot_of[low] = i
                cols[i] = col
                pairs.append((i, low))
                cleared.add(low)
    return pairs


def _find(parent, x):
    root = x
    while parent[root] != root:
        root = parent[root]
    while parent[x] != root:
        parent[x], x = root, parent[x]
    return root


def _planar_pairs(dims, bnd):
    m = len(dims)
    pairs = []
    edges = np.flatnonzero(dims == 1)
    # components: nodes are vertex positions, so a root's position is its
    # birth order and the younger root dies at the edge
    parent = list(range(m))
    for k, a, b in zip(edges.tolist(), bnd[edges, 0].tolist(), bnd[edges, 1].tolist()):
        ra, rb = _find(parent, a), _find(parent, b)
        if ra == rb:
            continue
        if ra > rb:
            ra, rb = rb, ra
        pairs.append((rb, k))
        parent[rb] = ra
    # cycles: the dual graph has the triangles plus the outer face (node m,
    # older than everything) as nodes; processed in reverse order, the
    # younger dual component's earliest triangle fills the cycle
    tris = np.flatnonzero(dims == 2)
    side = bnd[tris].ravel()
    owner = np.repeat(tris, 3)
    o = np.argsort(side, kind="stable")
    side, owner = side[o], owner[o]
    first = np.full(m, m, dtype=np.int64)
    second = np.full(m, m, dtype=np.int64)
    start = np.ones(len(side), dtype=bool)
    start[1:] = side[1:] != side[:-1]
    first[side[start]] = owner[start]
    second[side[~start]] = owner[~start]
    if len(side) > 2 and np.any(side[2:] == side[:-2]):
        raise ValueError("complex is not a planar triangulation")
    parent = list(range(m + 1))
    rev = edges[::-1]
    for k, a, b in zip(rev.tolist(), first[rev].tolist(), second[rev].tolist()):
        ra, rb = _find(parent, a), _find(parent, b)
        if ra == rb:
            continue
        # keep the older root, which is the larger position (m is oldest)
        if ra < rb:
            ra, rb = rb, ra
        pairs.append((k, rb))
        parent[rb] = ra
    return pairs


def compute_barcode(fc, method: str = "auto") -> Barcode:
    """Persistence barcode (dimensions 0 and 1) of a filtered complex.

    ``method`` is one of "auto", "homology", "plain", "cohomology", "planar";
    "plain" is column reduction without clearing. Raises
    UnsortableFiltration if a face enters after a coface or is missing.
    """
    dims, vals, bnd = _indexed(fc)
    if method == "auto":
        if getattr(fc, "planar", False):
            method = "planar"
        else:
            n_tri = int(np.count_nonzero(dims == 2))
            n_edge = int(np.count_nonzero(dims == 1))
            method = "cohomology" if n_tri > 4 * max(n_edge, 1) else "homology"
    if method == "homology":
        pairs = _reduce_homology(dims, bnd)
    elif method == "plain":
        pairs = _reduce_homology(dims, bnd, clearing=False)
    elif method == "cohomology":
        pairs = _reduce_cohomology(dims, bnd)
    elif method == "planar":
        pairs = _planar_pairs(dims, bnd)
    else:
        raise ValueError(f"unknown method {method!r}")
    return _collect(dims, vals, pairs)


# --- comparison ---------------------------------------------------------------

def bottleneck_distance(B1: Barcode, B2: Barcode, dim: int) -> float:
    """Bottleneck distance between the dimension-``dim`` bars of two barcodes.

    Bars may be matched to each other at their L-infinity distance or to the
    diagonal at half their length; essential bars only match essential bars
    (their births are compared), so differing essential counts give infinity.
    """
    e1 = sorted(b for b, d in B1.bars.get(dim, []) if d == INF)
    e2 = sorted(b for b, d in B2.bars.get(dim, []) if d == INF)
    if len(e1) != len(e2):
        return INF
    ess = max((abs(a - b) for a, b in zip(e1, e2)), default=0.0)
    X = np.array([(b, d) for b, d in B1.bars.get(dim, []) if d != INF]).reshape(-1, 2)
    Y = np.array([(b, d) for b, d in B2.bars.get(dim, []) if d != INF]).reshape(-1, 2)
    return max(ess, _finite_bottleneck(X, Y))


def _candidate_pairs(X, Y, hx, hy):
    """Index pairs (i, j) with L-infinity distance below max(hx[i], hy[j]).

    Other pairs are never needed: at a threshold admitting them, both bars
    may be matched to the diagonal instead.
    """
    pairs = set()
    if len(X) and len(Y):
        ty, tx = cKDTree(Y), cKDTree(X)
        for i, js in enumerate(ty.query_ball_point(X, r=hx, p=np.inf)):
            pairs.update((i, j) for j in js)
        for j, is_ in enumerate(tx.query_ball_point(Y, r=hy, p=np.inf)):
            pairs.update((i, j) for i in is_)
    if not pairs:
        return np.zeros(0, dtype=np.intp), np.zeros(0, dtype=np.intp)
    P = np.array(sorted(pairs), dtype=np.intp)
    return P[:, 0], P[:, 1]


def _covers(rows_needed, rows, cols, n_rows, n_cols) -> bool:
    """Whether a matching of the bipartite graph saturates ``rows_needed``."""
    need = np.flatnonzero(rows_needed)
    if len(need) == 0:
        return True
    remap = np.full(n_rows, -1)
    remap[need] = np.arange(len(need))
    keep = remap[rows] >= 0
    m = csr_matrix((np.ones(int(keep.sum()), dtype=np.int8), (remap[rows[keep]], cols[keep])),
                   shape=(len(need), n_cols))
    match = maximum_bipartite_matching(m, perm_type="column")
    return bool((match >= 0).all())


def _finite_bottleneck(X: np.ndarray, Y: np.ndarray) -> float:
    nx, ny = len(X), len(Y)
    if nx == 0 and ny == 0:
        return 0.0
    hx = (X[:, 1] - X[:, 0]) / 2 if nx else np.zeros(0)
    hy = (Y[:, 1] - Y[:, 0]) / 2 if ny else np.zeros(0)
    I, J = _candidate_pairs(X, Y, hx, hy)
    cross = np.maximum(np.abs(X[I, 0] - Y[J, 0]), np.abs(X[I, 1] - Y[J, 1])) if len(I) else np.zeros(0)
    cands = np.unique(np.concatenate([cross, hx, hy, [0.0]]))

    def feasible(delta):
        # every bar longer than 2 delta needs a partner within delta; a
        # matching covering both long sides exists iff one exists per side
        e = cross <= delta
        return (_covers(hx > delta, I[e], J[e], nx, ny)
                and _covers(hy > delta, J[e], I[e], ny, nx))

    lo, hi = 0, len(cands) - 1
    while lo < hi:
        mid = (lo + hi) // 2
        if feasible(cands[mid]):
            hi = mid
        else:
            lo = mid + 1
    return float(cands[lo])
