from fractions import Fraction

import pytest
from hypothesis import HealthCheck, settings

from offsetnerve.geom import make_sites

settings.register_profile("default", deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


def box(x0, y0, x1, y1):
    return [(x0, y0), (x1, y0), (x1, y1), (x0, y1)]


def unit_square_at(cx, cy):
    h = Fraction(1, 2)
    return box(cx - h, cy - h, cx + h, cy + h)


@pytest.fixture
def two_squares():
    return make_sites([box(0, 0, 1, 1), box(2, 0, 3, 1)])


@pytest.fixture
def corner_squares():
    return make_sites([box(0, 0, 1, 1), box(2, 2, 3, 3)])


@pytest.fixture
def triple_squares():
    return make_sites([unit_square_at(0, 0), unit_square_at(4, 0), unit_square_at(2, 3)])


@pytest.fixture
def ring():
    """Four unit squares on the corners of a 4x4 frame, the first nudged right."""
    return make_sites([box(Fraction("0.01"), 0, Fraction("1.01"), 1), box(3, 0, 4, 1),
                       box(3, 3, 4, 4), box(0, 3, 1, 4)])


# one summary line per acceptance criterion, printed after the test run
ACCEPTANCE: dict = {}


def record(name: str, ok: bool, detail: str = "") -> bool:
    ACCEPTANCE[name] = (ok, detail)
    return ok


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for name in sorted(ACCEPTANCE, key=lambda s: (len(s.split()[0]), s)):
        ok, detail = ACCEPTANCE[name]
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'}  {name}  {detail}")
