import numpy as np
import pytest

from offsetnerve.geom import make_sites
from offsetnerve.oracle import (ResolutionTooCoarse, betti_of_mask, offset_mask, raster_betti,
                                raster_betti_many, raster_nearest_site, write_pgm)
from conftest import box


def test_single_square():
    S = make_sites([box(0, 0, 1, 1)])
    for alpha in (0.2, 1.0, 3.0):
        assert raster_betti(S, alpha, alpha / 20) == (1, 0)


def test_two_squares(two_squares):
    assert raster_betti(two_squares, 0.3, 0.03, [0.0, 0.5]) == (2, 0)
    assert raster_betti(two_squares, 0.7, 0.02, [0.0, 0.5]) == (1, 0)


def test_ring(ring):
    assert raster_betti(ring, 1.2, 0.01) == (1, 1)
    assert raster_betti_many(ring, [0.9, 1.5], 0.01) == [(4, 0), (1, 0)]


def test_two_rings():
    frame = [box(0, 0, 1, 1), box(3, 0, 4, 1), box(3, 3, 4, 4), box(0, 3, 1, 4)]
    far = [[(x + 20, y) for x, y in P] for P in frame]
    S = make_sites(frame + far)
    assert raster_betti(S, 1.2, 0.02) == (2, 2)
    assert raster_betti(S, 0.5, 0.02) == (8, 0)


def test_resolution_checks(two_squares):
    with pytest.raises(ResolutionTooCoarse):
        raster_betti(two_squares, 0.3, 0.05)
    with pytest.raises(ResolutionTooCoarse):
        raster_betti(two_squares, 0.45, 0.02, [0.0, 0.5])


def test_mask_betti_fixtures():
    ring = np.zeros((7, 7), dtype=bool)
    ring[1:6, 1:6] = True
    ring[2:5, 2:5] = False
    assert betti_of_mask(ring) == (1, 1)
    # diagonal neighbours are not connected in the set and leak the background
    diag = np.zeros((5, 5), dtype=bool)
    diag[1, 1] = diag[2, 2] = True
    assert betti_of_mask(diag) == (2, 0)
    cross = ring.copy()
    cross[3, 1] = False
    assert betti_of_mask(cross) == (1, 0)


def test_mask_matches_betti_off_criticality(ring):
    _, mask = offset_mask(ring, 1.2, 0.01)
    assert betti_of_mask(mask) == (1, 1)


def test_nearest_site_two_squares(two_squares):
    grid = raster_nearest_site(two_squares, 0.1)
    x = grid.origin.x + grid.step * (np.arange(grid.width) + 0.5)
    left = x < 1.5
    assert (grid.labels[:, left] == 0).all() and (grid.labels[:, ~left] == 1).all()
    assert grid.adjacency() == {(0, 1)}


def test_nearest_site_single():
    grid = raster_nearest_site(make_sites([box(0, 0, 1, 1)]), 0.1)
    assert (grid.labels == 0).all()


def test_nearest_site_ties_go_to_smaller_id():
    S = make_sites([box(0, 0, 1, 1), box(2, 0, 3, 1)])
    grid = raster_nearest_site(S, 1.0, margin=1.0)
    x = grid.origin.x + grid.step * (np.arange(grid.width) + 0.5)
    assert 1.5 in x.tolist()
    assert (grid.labels[:, x.tolist().index(1.5)] == 0).all()


def test_write_pgm(tmp_path, two_squares):
    grid = raster_nearest_site(two_squares, 0.25)
    write_pgm(grid, tmp_path / "g.pgm")
    data = (tmp_path / "g.pgm").read_bytes()
    header = f"P5\n{grid.width} {grid.height}\n255\n".encode()
    assert data.startswith(header) and len(data) == len(header) + grid.width * grid.height
