"""Exact orientation and in-circle predicates.

Both predicates first evaluate the determinant in double precision and
accept the sign when it clears a forward error bound; otherwise the
determinant is recomputed with :class:`fractions.Fraction`, which is exact
for every finite float and every rational input.
"""

from fractions import Fraction

import numpy as np

_EPS = np.finfo(float).eps / 2
_CCW_BOUND = (3.0 + 16.0 * _EPS) * _EPS
_ICC_BOUND = (10.0 + 96.0 * _EPS) * _EPS


def _sign(v):
    return int(v > 0) - int(v < 0)


def _orient_exact(a, b, c):
    ax, ay = Fraction(a[0]), Fraction(a[1])
    bx, by = Fraction(b[0]), Fraction(b[1])
    cx, cy = Fraction(c[0]), Fraction(c[1])
    return _sign((bx - ax) * (cy - ay) - (by - ay) * (cx - ax))


def orient2d(a, b, c) -> int:
    """Sign of the turn a -> b -> c: +1 left, -1 right, 0 collinear."""
    if any(isinstance(v, Fraction) for p in (a, b, c) for v in p):
        # rounding rationals to floats moves each coordinate by at most
        # eps*|v|, so the determinant moves by well under 1e-14 * M²
        fa, fb, fc = ((float(p[0]), float(p[1])) for p in (a, b, c))
        m = max(abs(v) for p in (fa, fb, fc) for v in p)
        det = ((fa[0] - fc[0]) * (fb[1] - fc[1])
               - (fa[1] - fc[1]) * (fb[0] - fc[0]))
        if abs(det) > 1e-12 * m * m:
            return _sign(det)
        return _orient_exact(a, b, c)
    detleft = (a[0] - c[0]) * (b[1] - c[1])
    detright = (a[1] - c[1]) * (b[0] - c[0])
    det = detleft - detright
    bound = _CCW_BOUND * (abs(detleft) + abs(detright))
    if det > bound or -det > bound:
        return _sign(det)
    return _orient_exact(a, b, c)


def _incircle_exact(a, b, c, d):
    dx, dy = Fraction(d[0]), Fraction(d[1])
    rows = []
    for p in (a, b, c):
        px, py = Fraction(p[0]) - dx, Fraction(p[1]) - dy
        rows.append((px, py, px * px + py * py))
    (ax, ay, al), (bx, by, bl), (cx, cy, cl) = rows
    det = (al * (bx * cy - cx * by) + bl * (cx * ay - ax * cy)
           + cl * (ax * by - bx * ay))
    return _sign(det)


def incircle(a, b, c, d) -> int:
    """+1 if d lies strictly inside the circle through ccw a, b, c; 0 on it."""
    if any(isinstance(v, Fraction) for p in (a, b, c, d) for v in p):
        return _incircle_exact(a, b, c, d)
    adx, ady = a[0] - d[0], a[1] - d[1]
    bdx, bdy = b[0] - d[0], b[1] - d[1]
    cdx, cdy = c[0] - d[0], c[1] - d[1]
    bc = bdx * cdy - cdx * bdy
    ca = cdx * ady - adx * cdy
    ab = adx * bdy - bdx * ady
    al = adx * adx + ady * ady
    bl = bdx * bdx + bdy * bdy
    cl = cdx * cdx + cdy * cdy
    det = al * bc + bl * ca + cl * ab
    permanent = (al * (abs(bdx * cdy) + abs(cdx * bdy))
                 + bl * (abs(cdx * ady) + abs(adx * cdy))
                 + cl * (abs(adx * bdy) + abs(bdx * ady)))
    bound = _ICC_BOUND * permanent
    if det > bound or -det > bound:
        return _sign(det)
    return _incircle_exact(a, b, c, d)


def incircle_many(pa, pb, pc, pd) -> np.ndarray:
    """Vectorised :func:`incircle` over rows of four (m, 2) float arrays."""
    pa, pb, pc, pd = (np.asarray(p, dtype=float) for p in (pa, pb, pc, pd))
    adx, ady = (pa - pd).T
    bdx, bdy = (pb - pd).T
    cdx, cdy = (pc - pd).T
    al = adx * adx + ady * ady
    bl = bdx * bdx + bdy * bdy
    cl = cdx * cdx + cdy * cdy
    det = (al * (bdx * cdy - cdx * bdy) + bl * (cdx * ady - adx * cdy)
           + cl * (adx * bdy - bdx * ady))
    permanent = (al * (np.abs(bdx * cdy) + np.abs(cdx * bdy))
                 + bl * (np.abs(cdx * ady) + np.abs(adx * cdy))
                 + cl * (np.abs(adx * bdy) + np.abs(bdx * ady)))
    out = np.sign(det).astype(int)
    # small integer differences keep every intermediate an exact integer
    # below 2**53, so the floating-point determinant is already exact
    small = np.max(np.abs(np.column_stack([adx, ady, bdx, bdy, cdx, cdy])), axis=1) <= 4096
    integral = np.all(np.column_stack([pa, pb, pc, pd]) % 1 == 0, axis=1)
    unsure = np.flatnonzero((np.abs(det) <= _ICC_BOUND * permanent) & ~(small & integral))
    if len(unsure):
        a, b, c, d = _as_integers(pa[unsure], pb[unsure], pc[unsure], pd[unsure])
        adx, ady = a[:, 0] - d[:, 0], a[:, 1] - d[:, 1]
        bdx, bdy = b[:, 0] - d[:, 0], b[:, 1] - d[:, 1]
        cdx, cdy = c[:, 0] - d[:, 0], c[:, 1] - d[:, 1]
        exact = ((adx * adx + ady * ady) * (bdx * cdy - cdx * bdy)
                 + (bdx * bdx + bdy * bdy) * (cdx * ady - adx * cdy)
                 + (cdx * cdx + cdy * cdy) * (adx * bdy - bdx * ady))
        out[unsure] = [_sign(v) for v in exact]
    return out


def dot_sign_many(po, pa, pb) -> np.ndarray:
    """Exact sign of (a - o) . (b - o) per row; negative means the angle at
    o is obtuse, so o lies strictly inside the circle with diameter ab."""
    po, pa, pb = (np.asarray(p, dtype=float) for p in (po, pa, pb))
    ax, ay = (pa - po).T
    bx, by = (pb - po).T
    det = ax * bx + ay * by
    out = np.sign(det).astype(int)
    # rounding in the differences scales with the coordinates themselves
    mo = np.abs(po).max(1)
    scale = (np.abs(pa).max(1) + mo) * (np.abs(pb).max(1) + mo)
    unsure = np.flatnonzero(np.abs(det) <= 1e-12 * scale)
    if len(unsure):
        o, a, b = _as_integers(po[unsure], pa[unsure], pb[unsure])
        exact = (a[:, 0] - o[:, 0]) * (b[:, 0] - o[:, 0]) + (a[:, 1] - o[:, 1]) * (b[:, 1] - o[:, 1])
        out[unsure] = [_sign(v) for v in exact]
    return out


def _as_integers(*arrays):
    """Scale float arrays by a common power of two into exact Python ints
    (object arrays); predicate signs are unchanged by the scaling."""
    allv = np.concatenate([np.ravel(x) for x in arrays])
    if not np.all(np.isfinite(allv)):
        raise ValueError("non-finite coordinate")
    mant, expo = np.frexp(allv)
    mant = (mant * 2.0 ** 53).astype(np.int64)
    expo = expo.astype(np.int64) - 53
    nonzero = mant != 0
    base = int(expo[nonzero].min()) if nonzero.any() else 0
    expo = np.where(nonzero, expo, base)
    ints = np.array([int(m) << int(k) for m, k in zip(mant, expo - base)], dtype=object)
    out, pos = [], 0
    for x in arrays:
        n = np.size(x)
        out.append(ints[pos:pos + n].reshape(np.shape(x)))
        pos += n
    return out


def orient_many(pa, pb, pc) -> np.ndarray:
    """Vectorised :func:`orient2d` over rows of three (m, 2) float arrays."""
    pa, pb, pc = (np.asarray(p, dtype=float) for p in (pa, pb, pc))
    detleft = (pa[:, 0] - pc[:, 0]) * (pb[:, 1] - pc[:, 1])
    detright = (pa[:, 1] - pc[:, 1]) * (pb[:, 0] - pc[:, 0])
    det = detleft - detright
    out = np.sign(det).astype(int)
    unsure = np.flatnonzero(
        np.abs(det) <= _CCW_BOUND * (np.abs(detleft) + np.abs(detright)))
    for m in unsure:
        out[m] = _orient_exact(pa[m], pb[m], pc[m])
    return out
