from fractions import Fraction

import numpy as np
from hypothesis import given, strategies as st

from offsetnerve.predicates import (dot_sign_many, incircle, incircle_many, orient2d,
                                    orient_many)

coord = st.floats(min_value=-1e6, max_value=1e6, allow_nan=False, allow_infinity=False)
point = st.tuples(coord, coord)


def exact_orient(a, b, c):
    a, b, c = [(Fraction(x), Fraction(y)) for x, y in (a, b, c)]
    d = (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])
    return (d > 0) - (d < 0)


def exact_incircle(a, b, c, d):
    rows = []
    for p in (a, b, c):
        x, y = Fraction(p[0]) - Fraction(d[0]), Fraction(p[1]) - Fraction(d[1])
        rows.append((x, y, x * x + y * y))
    (a1, a2, a3), (b1, b2, b3), (c1, c2, c3) = rows
    det = (a1 * (b2 * c3 - b3 * c2) - a2 * (b1 * c3 - b3 * c1) + a3 * (b1 * c2 - b2 * c1))
    return (det > 0) - (det < 0)


def test_orient_basic():
    assert orient2d((0, 0), (1, 0), (0, 1)) == 1
    assert orient2d((0, 0), (0, 1), (1, 0)) == -1
    assert orient2d((0, 0), (1, 1), (2, 2)) == 0


def test_orient_near_collinear_float():
    # the rounded determinant of these is 0 or the wrong sign
    a, b = (0.5, 0.5), (12.0, 12.0)
    c = (24.0, 24.0 + 2.0 ** -48)
    assert orient2d(a, b, c) == exact_orient(a, b, c) == 1


@given(point, point, point)
def test_orient_matches_rationals(a, b, c):
    assert orient2d(a, b, c) == exact_orient(a, b, c)


@given(point, point, st.floats(0, 1), st.integers(-3, 3))
def test_orient_on_nearly_collinear_points(a, b, t, ulps):
    # points pushed a few ulps off the segment ab stress the float filter
    c = (a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1]))
    c = (c[0], float(np.nextafter(c[1], np.inf if ulps > 0 else -np.inf)) if ulps else c[1])
    assert orient2d(a, b, c) == exact_orient(a, b, c)


@given(st.lists(st.tuples(point, point, point), min_size=1, max_size=20))
def test_orient_many_matches_scalar(rows):
    pa, pb, pc = (np.array([r[k] for r in rows]) for k in range(3))
    assert orient_many(pa, pb, pc).tolist() == [exact_orient(*r) for r in rows]


def test_incircle_cocircular_square():
    assert incircle((0, 0), (1, 0), (1, 1), (0, 1)) == 0
    assert incircle((0, 0), (1, 0), (0, 1), (0.5, 0.5)) == 1
    assert incircle((0, 0), (1, 0), (0, 1), (2, 2)) == -1


small = st.integers(-50, 50).map(float)


@given(st.lists(st.tuples(*[st.tuples(small, small)] * 4), min_size=1, max_size=30))
def test_incircle_many_on_lattice(rows):
    arrs = [np.array([r[k] for r in rows]) for k in range(4)]
    assert incircle_many(*arrs).tolist() == [exact_incircle(*r) for r in rows]


@given(st.lists(st.tuples(point, point, point, point), min_size=1, max_size=10))
def test_incircle_many_on_floats(rows):
    arrs = [np.array([r[k] for r in rows]) for k in range(4)]
    assert incircle_many(*arrs).tolist() == [exact_incircle(*r) for r in rows]
    assert [incircle(*r) for r in rows] == [exact_incircle(*r) for r in rows]


@given(st.lists(st.tuples(point, point, point), min_size=1, max_size=20))
def test_dot_sign_many(rows):
    po, pa, pb = (np.array([r[k] for r in rows]) for k in range(3))
    want = []
    for o, a, b in rows:
        o, a, b = [(Fraction(x), Fraction(y)) for x, y in (o, a, b)]
        d = (a[0] - o[0]) * (b[0] - o[0]) + (a[1] - o[1]) * (b[1] - o[1])
        want.append((d > 0) - (d < 0))
    assert dot_sign_many(po, pa, pb).tolist() == want


def test_dot_sign_right_angle():
    o, a, b = np.array([[0.1, 0.3]]), np.array([[1.1, 0.3]]), np.array([[0.1, 7.3]])
    assert dot_sign_many(o, a, b).tolist() == [0]
