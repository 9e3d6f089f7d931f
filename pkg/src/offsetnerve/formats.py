"""File formats: instance JSON, barcode JSON and SVG barcode plots.

Instance files hold decimal literals that are read exactly, so coordinates
reach the predicates as rationals. The canonical writer emits one polygon per
line with the shortest exact decimal for every coordinate; reading and writing
a canonical file reproduces it byte for byte.
"""

from __future__ import annotations

import json
import math
from decimal import Decimal
from fractions import Fraction

from .geom import GeometryError, SiteSet, make_sites
from .persistence import INF, Barcode


class InstanceError(GeometryError):
    """Instance file that cannot be read into a valid site set."""


class MalformedBarcode(ValueError):
    pass


# --- instances ---------------------------------------------------------------

def _reject_constant(name):
    raise ValueError(f"non-finite literal {name}")


def _coordinate(v, where: str) -> Fraction:
    if isinstance(v, bool) or not isinstance(v, (int, Decimal)):
        raise InstanceError(f"{where}: coordinate {v!r} is not a number")
    if isinstance(v, Decimal) and not v.is_finite():
        raise InstanceError(f"{where}: coordinate {v} is not finite")
    return Fraction(v)


def parse_instance(text: str) -> SiteSet:
    """Parse and validate an instance document.

    Errors name the offending polygon index and the reason.
    """
    try:
        doc = json.loads(text, parse_float=Decimal, parse_constant=_reject_constant)
    except ValueError as exc:
        raise InstanceError(f"not valid JSON: {exc}") from None
    if not isinstance(doc, dict) or not isinstance(doc.get("polygons"), list):
        raise InstanceError('expected an object with a "polygons" list')
    polys = []
    for i, poly in enumerate(doc["polygons"]):
        if not isinstance(poly, list):
            raise InstanceError(f"polygon {i}: expected a list of [x, y] pairs")
        pts = []
        for m, p in enumerate(poly):
            if not isinstance(p, list) or len(p) != 2:
                raise InstanceError(f"polygon {i}: vertex {m} is not an [x, y] pair")
            where = f"polygon {i}, vertex {m}"
            pts.append((_coordinate(p[0], where), _coordinate(p[1], where)))
        polys.append(pts)
    return make_sites(polys)


def read_instance(path) -> SiteSet:
    with open(path, encoding="utf-8") as fh:
        return parse_instance(fh.read())


def format_decimal(v: Fraction) -> str:
    """Shortest exact decimal literal of a terminating rational."""
    v = Fraction(v)
    if v.denominator == 1:
        return str(v.numerator)
    den, k2, k5 = v.denominator, 0, 0
    while den % 2 == 0:
        den //= 2
        k2 += 1
    while den % 5 == 0:
        den //= 5
        k5 += 1
    if den != 1:
        raise ValueError(f"{v} has no finite decimal expansion")
    k = max(k2, k5)
    digits = str(abs(v.numerator) * 10 ** k // v.denominator).rjust(k + 1, "0")
    text = f"{digits[:-k]}.{digits[-k:]}".rstrip("0")
    return ("-" if v < 0 else "") + text


def serialize_instance(sites: SiteSet) -> str:
    rows = ["[" + ", ".join(f"[{format_decimal(x)}, {format_decimal(y)}]"
                            for x, y in P.exact) + "]" for P in sites]
    if not rows:
        return '{"polygons": []}\n'
    return '{"polygons": [\n  ' + ",\n  ".join(rows) + "\n]}\n"


# --- barcodes ----------------------------------------------------------------

def _sort_key(bar):
    return (bar[0], bar[1])


def serialize_barcode(barcode: Barcode, meta: dict, show_zero: bool = False) -> str:
    lines = []
    for dim in (0, 1):
        bars = sorted(barcode.intervals(dim, show_zero=show_zero), key=_sort_key)
        enc = [[b, "inf" if d == INF else d] for b, d in bars]
        lines.append(f'  "dim{dim}": {json.dumps(enc)}')
    lines.append(f'  "meta": {json.dumps(meta)}')
    return "{\n" + ",\n".join(lines) + "\n}\n"


def _number(v, where: str) -> float:
    if isinstance(v, bool) or not isinstance(v, (int, float)) or not math.isfinite(v):
        raise MalformedBarcode(f"{where}: {v!r} is not a finite number")
    return float(v)


def parse_barcode(text: str) -> tuple:
    """Return (Barcode, meta) from a barcode document."""
    try:
        doc = json.loads(text, parse_constant=_reject_constant)
    except ValueError as exc:
        raise MalformedBarcode(f"not valid JSON: {exc}") from None
    if not isinstance(doc, dict):
        raise MalformedBarcode("expected a JSON object")
    bars = {}
    for dim in (0, 1):
        key = f"dim{dim}"
        rows = doc.get(key)
        if not isinstance(rows, list):
            raise MalformedBarcode(f'missing or non-list "{key}"')
        out = []
        for k, row in enumerate(rows):
            where = f"{key}[{k}]"
            if not isinstance(row, list) or len(row) != 2:
                raise MalformedBarcode(f"{where}: expected [birth, death]")
            b = _number(row[0], where)
            d = INF if row[1] == "inf" else _number(row[1], where)
            if d < b:
                raise MalformedBarcode(f"{where}: death {d} before birth {b}")
            out.append((b, d))
        bars[dim] = out
    meta = doc.get("meta", {})
    if not isinstance(meta, dict):
        raise MalformedBarcode('"meta" must be an object')
    return Barcode(bars), meta


def read_barcode(path) -> tuple:
    try:
        with open(path, encoding="utf-8") as fh:
            return parse_barcode(fh.read())
    except OSError as exc:
        raise MalformedBarcode(f"cannot read {path}: {exc.strerror}") from None


# --- plots -------------------------------------------------------------------

COLORS = {0: "red", 1: "blue"}
WIDTH, MARGIN, ROW = 640, 40, 6


def _nice_ticks(hi: float) -> list:
    raw = hi / 5
    mag = 10 ** math.floor(math.log10(raw))
    step = next(m * mag for m in (1, 2, 5, 10) if m * mag >= raw)
    return [k * step for k in range(int(hi / step + 1e-9) + 1)]


def barcode_svg(barcode: Barcode, show_zero: bool = False) -> str:
    """Horizontal bar plot: dim-0 bars red above dim-1 bars blue.

    Essential bars run to the right end of the axis and end in an arrowhead.
    """
    bars = [(dim, b, d) for dim in (0, 1)
            for b, d in sorted(barcode.intervals(dim, show_zero=show_zero), key=_sort_key)]
    finite = [v for _, b, d in bars for v in (b, d) if v != INF]
    hi = max(finite, default=0.0)
    hi = hi * 1.1 if hi > 0 else 1.0
    plot_w = WIDTH - 2 * MARGIN
    height = 2 * MARGIN + ROW * max(len(bars), 1) + 10

    def x(v):
        return MARGIN + plot_w * min(v, hi) / hi

    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{height}" '
           f'viewBox="0 0 {WIDTH} {height}">',
           '<defs><marker id="arrow" markerWidth="6" markerHeight="6" refX="5" refY="3" '
           'orient="auto"><path d="M0,0 L6,3 L0,6 z" fill="context-stroke"/></marker></defs>',
           '<rect width="100%" height="100%" fill="white"/>']
    for k, (dim, b, d) in enumerate(bars):
        y = MARGIN + ROW * k + ROW / 2
        arrow = ' marker-end="url(#arrow)"' if d == INF else ""
        out.append(f'<line class="dim{dim}" x1="{x(b):.2f}" y1="{y:.1f}" x2="{x(d):.2f}" '
                   f'y2="{y:.1f}" stroke="{COLORS[dim]}" stroke-width="{ROW - 2}"{arrow}/>')
    axis_y = height - MARGIN
    out.append(f'<line class="axis" x1="{MARGIN}" y1="{axis_y}" x2="{WIDTH - MARGIN}" '
               f'y2="{axis_y}" stroke="black"/>')
    for t in _nice_ticks(hi):
        out.append(f'<line x1="{x(t):.2f}" y1="{axis_y}" x2="{x(t):.2f}" y2="{axis_y + 4}" '
                   f'stroke="black"/>')
        out.append(f'<text x="{x(t):.2f}" y="{axis_y + 16}" font-size="10" '
                   f'text-anchor="middle">{t:g}</text>')
    out.append(f'<text x="{WIDTH / 2:.0f}" y="{axis_y + 32}" font-size="11" '
               'text-anchor="middle">offset radius</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"
