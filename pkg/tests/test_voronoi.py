import math

import numpy as np
import pytest

from offsetnerve.generate import random_sites
from offsetnerve.geom import TAU, Point, dist_polygon_polygon, make_sites
from offsetnerve.oracle import raster_nearest_site
from offsetnerve.voronoi import (VoronoiVertex, build_voronoi, dump_diagram,
                                 edge_critical_value, vertex_value)
from helpers import distance_to_polygon
from conftest import box

SEEDS = range(12)


def arc_samples(arc, k, rng):
    lo = arc.t0 if math.isfinite(arc.t0) else arc.t1 - 30.0
    hi = arc.t1 if math.isfinite(arc.t1) else lo + 30.0
    return np.array([arc.point(t) for t in rng.uniform(lo, hi, size=k)])


def edge_samples(edge, k, rng):
    return np.vstack([arc_samples(a, max(2, k // len(edge.arcs)), rng) for a in edge.arcs])


def all_distances(sites, pts):
    return np.column_stack([distance_to_polygon(P, pts) for P in sites])


@pytest.fixture(scope="module")
def diagrams():
    return [build_voronoi(random_sites(n, seed=s)) for s, n in zip(SEEDS, [3, 5, 8, 12] * 3)]


def test_two_squares(two_squares):
    D = build_voronoi(two_squares)
    assert len(D.vertices) == 0 and len(D.edges) == 1 and len(D.faces) == 2
    value, witness = edge_critical_value(D.edges[0], two_squares)
    assert value == 0.5 and witness == (1.5, 0.0)


def test_corner_squares(corner_squares):
    D = build_voronoi(corner_squares)
    value, witness = edge_critical_value(D.edges[0], corner_squares)
    assert value == pytest.approx(math.sqrt(2) / 2, abs=1e-12)
    assert witness == pytest.approx((1.5, 1.5), abs=1e-12)


def test_one_site():
    D = build_voronoi(make_sites([box(0, 0, 1, 1)]))
    assert (len(D.faces), len(D.edges), len(D.vertices)) == (1, 0, 0)


def test_triple_squares(triple_squares):
    D = build_voronoi(triple_squares)
    assert len(D.vertices) == 1 and len(D.edges) == 3
    assert D.euler_characteristic() == 2
    v = D.vertices[0]
    # the vertex (2, 15/16) is 25/16 from the corners (0.5, 0.5), (3.5, 0.5), (2, 2.5)
    assert v.position == pytest.approx((2.0, 0.9375), abs=1e-9)
    assert vertex_value(v, triple_squares) == pytest.approx(1.5625, abs=1e-9)
    grid = raster_nearest_site(triple_squares, 0.05)
    assert grid.adjacency() == {e.sites for e in D.edges}


def test_triple_square_edges_by_sampling(triple_squares):
    D = build_voronoi(triple_squares)
    rng = np.random.default_rng(0)
    for e in D.edges:
        i, j = e.sites
        half = dist_polygon_polygon(triple_squares[i], triple_squares[j])[0] / 2
        pts = edge_samples(e, 20000, rng)
        sampled = distance_to_polygon(triple_squares[i], pts).min()
        assert e.critical >= half - TAU
        assert e.critical <= sampled + 1e-12
        assert sampled - e.critical < 1e-3


def test_vertex_value_averages():
    r = 1.3
    v = VoronoiVertex(Point(0, 0), (0, 1, 2), r, (r, r + TAU / 2, r - TAU / 2))
    assert vertex_value(v) == pytest.approx(r, abs=1e-15)


def test_dump_format(triple_squares):
    lines = dump_diagram(build_voronoi(triple_squares)).splitlines()
    assert lines[0].split()[0] == "V" and len(lines[0].split()) == 4
    assert [ln.split()[0] for ln in lines[1:]] == ["E"] * 3
    assert all(len(ln.split()) == 7 for ln in lines[1:])


def test_diagram_structure(diagrams):
    for D in diagrams:
        n = len(D.sites)
        assert D.euler_characteristic() == 2
        assert len(D.faces) == n and all(D.faces[i] for i in range(n) if n > 1)
        degree = np.zeros(len(D.vertices), dtype=int)
        for e in D.edges:
            for k in e.vertices:
                degree[k] += 1
        assert (degree == 3).all()


def test_edges_are_equidistant(diagrams):
    rng = np.random.default_rng(1)
    for D in diagrams:
        for e in D.edges:
            i, j = e.sites
            d = all_distances(D.sites, edge_samples(e, 100, rng))
            assert np.abs(d[:, i] - d[:, j]).max() <= 10 * TAU
            assert (d[:, i] <= d.min(axis=1) + 10 * TAU).all()


def test_vertices_are_equidistant(diagrams):
    for D in diagrams:
        for v in D.vertices:
            d = all_distances(D.sites, [v.position])[0]
            assert np.ptp(d[list(v.sites)]) <= 10 * TAU
            assert d[list(v.sites)].max() <= d.min() + 10 * TAU


def test_critical_values(diagrams):
    rng = np.random.default_rng(2)
    for D in diagrams:
        for e in D.edges:
            i, j = e.sites
            half = dist_polygon_polygon(D.sites[i], D.sites[j])[0] / 2
            assert e.critical >= half - TAU
            sampled = distance_to_polygon(D.sites[i], edge_samples(e, 2000, rng)).min()
            assert e.critical <= sampled + 1e-9
            for k in e.vertices:
                assert D.vertices[k].value >= e.critical - TAU


def test_some_edge_attains_half_distance(diagrams):
    for D in diagrams:
        pairs = {}
        for e in D.edges:
            pairs.setdefault(e.sites, []).append(e.critical)
        attained = [min(v) == pytest.approx(dist_polygon_polygon(*(D.sites[k] for k in p))[0] / 2,
                                            abs=1e-9) for p, v in pairs.items()]
        # the closest pair of sites always has an edge through its midpoint
        assert any(attained)


def test_raster_adjacency(diagrams):
    for D in diagrams[:6]:
        x0, y0, x1, y1 = D.sites.bounds()
        reach = max([10.0] + [max(x0 - v.position.x, v.position.x - x1, y0 - v.position.y,
                                  v.position.y - y1) + 10.0 for v in D.vertices])
        grid = raster_nearest_site(D.sites, 0.25, margin=reach)
        assert grid.adjacency() == {e.sites for e in D.edges}
