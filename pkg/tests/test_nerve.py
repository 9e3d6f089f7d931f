import math
from itertools import combinations, permutations

import numpy as np
import pytest
from scipy.optimize import minimize

from offsetnerve.generate import random_sites
from offsetnerve.geom import TAU, dist_polygon_polygon, make_sites
from offsetnerve.nerve import (cech_triple_enumerate, cech_triple_value, restricted_nerve,
                               unrestricted_nerve)
from offsetnerve.oracle import raster_betti
from offsetnerve.persistence import compute_barcode
from offsetnerve.voronoi import build_voronoi
from helpers import distance_to_polygon
from conftest import box


def brute_triple(polys, step=1e-3):
    """min over the plane of the max distance to three polygons: coarse grid,
    then a fine grid at ``step`` around the best cell, then Nelder-Mead."""
    f = lambda p: max(distance_to_polygon(P, [p])[0] for P in polys)
    V = np.vstack([P.vertices for P in polys])
    lo, hi = V.min(axis=0), V.max(axis=0)
    X, Y = np.meshgrid(np.linspace(lo[0], hi[0], 201), np.linspace(lo[1], hi[1], 201))
    pts = np.column_stack([X.ravel(), Y.ravel()])
    F = np.max([distance_to_polygon(P, pts) for P in polys], axis=0)
    c = pts[F.argmin()]
    h = (hi - lo).max() / 200
    X, Y = np.meshgrid(np.arange(c[0] - h, c[0] + h, step), np.arange(c[1] - h, c[1] + h, step))
    pts = np.column_stack([X.ravel(), Y.ravel()])
    F = np.max([distance_to_polygon(P, pts) for P in polys], axis=0)
    res = minimize(f, pts[F.argmin()], method="Nelder-Mead",
                   options={"xatol": 1e-11, "fatol": 1e-12, "maxiter": 4000})
    return min(res.fun, F.min())


def test_two_squares(two_squares):
    fc = restricted_nerve(build_voronoi(two_squares))
    assert fc.as_dict() == {(0,): 0.0, (1,): 0.0, (0, 1): 0.5}
    assert unrestricted_nerve(two_squares).as_dict() == fc.as_dict()


def test_single_site():
    S = make_sites([box(0, 0, 1, 1)])
    assert restricted_nerve(build_voronoi(S)).as_dict() == {(0,): 0.0}
    assert len(unrestricted_nerve(S)) == 1


def test_ring(ring):
    vals = restricted_nerve(build_voronoi(ring)).as_dict()
    assert [vals[(i,)] for i in range(4)] == [0.0] * 4
    assert vals[(0, 1)] == pytest.approx(0.995, abs=1e-12)
    assert vals[(0, 3)] == vals[(1, 2)] == vals[(2, 3)] == 1.0
    assert set(vals) == {(0,), (1,), (2,), (3,), (0, 1), (0, 3), (1, 2), (2, 3), (0, 2),
                         (0, 1, 2), (0, 2, 3)}
    for s in [(0, 2), (0, 1, 2), (0, 2, 3)]:
        assert abs(vals[s] - math.sqrt(2)) < 0.01
    B = compute_barcode(restricted_nerve(build_voronoi(ring)))
    for alpha, expected in [(0.9, (4, 0)), (1.2, (1, 1)), (1.5, (1, 0))]:
        assert (B.betti(0, alpha), B.betti(1, alpha)) == expected
        assert raster_betti(ring, alpha, 0.01, vals.values()) == expected


@pytest.mark.parametrize("n, size", [(1, 1), (4, 14), (10, 175)])
def test_unrestricted_size(n, size):
    assert len(unrestricted_nerve(random_sites(n, seed=3))) == size


def test_collinear_triple():
    S = make_sites([box(0, 0, 1, 1), box(2, 0, 3, 1), box(4, 0, 5, 1)])
    value, witness = cech_triple_value(*S)
    assert value == pytest.approx(1.5, abs=1e-12)
    assert witness == pytest.approx((2.5, 0.0), abs=1e-9)


def test_triple_squares_against_brute_force(triple_squares):
    value, _ = cech_triple_value(*triple_squares)
    assert value == pytest.approx(brute_triple(list(triple_squares)), abs=1e-6)
    assert value == pytest.approx(1.5625, abs=1e-9)


@pytest.mark.parametrize("seed", range(4))
def test_random_triples_against_brute_force(seed):
    S = random_sites(3, seed=100 + seed, box=20.0)
    assert cech_triple_value(*S)[0] == pytest.approx(brute_triple(list(S)), abs=1e-6)


@pytest.mark.parametrize("seed", range(5))
def test_batch_triples_match_enumeration(seed):
    S = random_sites(7, seed=seed, box=30.0)
    vals = unrestricted_nerve(S).as_dict()
    for t in combinations(range(7), 3):
        assert vals[t] == pytest.approx(cech_triple_enumerate(*(S[i] for i in t))[0], abs=1e-9)


@pytest.mark.parametrize("seed", range(6))
def test_triple_value_symmetric_and_bounded(seed):
    S = random_sites(3, seed=200 + seed, box=25.0)
    vals = [cech_triple_value(*(S[i] for i in p))[0] for p in permutations(range(3))]
    assert max(vals) - min(vals) <= 1e-9
    pairs = max(dist_polygon_polygon(S[i], S[j])[0] / 2 for i, j in combinations(range(3), 2))
    assert vals[0] >= pairs - 1e-9


@pytest.mark.parametrize("seed", range(8))
def test_nerves_are_filtrations(seed):
    S = random_sites(4 + seed, seed=seed)
    R = restricted_nerve(build_voronoi(S))
    U = unrestricted_nerve(S)
    R.check()
    U.check()
    n = len(S)
    assert len(U) == n + math.comb(n, 2) + math.comb(n, 3)
    u = U.as_dict()
    for s, v in R.items():
        assert u[s] <= v + TAU
        if len(s) == 2:
            assert v >= u[s] - TAU


@pytest.mark.parametrize("seed", range(8))
def test_restricted_size(seed):
    S = random_sites(6 + seed, seed=seed)
    D = build_voronoi(S)
    R = restricted_nerve(D)
    pairs = {e.sites for e in D.edges}
    triples = {v.sites for v in D.vertices}
    assert len(R) == len(S) + len(pairs) + len(triples) <= len(S) + len(D.edges) + len(D.vertices)
