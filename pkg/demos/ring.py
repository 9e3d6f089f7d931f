"""Four squares around an empty center: one hole that opens and closes.

Builds the restricted nerve and the full nerve of a small ring of squares,
prints both filtrations and their barcodes, and checks the Betti numbers at a
few radii against a pixel rendering of the offsets.
"""

from fractions import Fraction

from offsetnerve import (build_voronoi, compute_barcode, make_sites, restricted_nerve,
                         unrestricted_nerve)
from offsetnerve.oracle import raster_betti


def box(x0, y0, x1, y1):
    return [(x0, y0), (x1, y0), (x1, y1), (x0, y1)]


# nudging the first square breaks the fourfold tie at the center
sites = make_sites([box(Fraction("0.01"), 0, Fraction("1.01"), 1), box(3, 0, 4, 1),
                    box(3, 3, 4, 4), box(0, 3, 1, 4)])

restricted = restricted_nerve(build_voronoi(sites))
full = unrestricted_nerve(sites)
print(f"restricted nerve: {len(restricted)} simplices, full nerve: {len(full)}")
for simplex, value in sorted(restricted.items(), key=lambda t: (t[1], len(t[0]))):
    print(f"  {simplex!s:12} {value:.6f}")

barcode = compute_barcode(restricted)
print("dim 0 bars:", barcode.intervals(0))
print("dim 1 bars:", barcode.intervals(1))
assert barcode.intervals(1) == compute_barcode(full).intervals(1)

# offsets at a few radii, counted on a grid with 0.01 pixels
for alpha in (0.9, 1.2, 1.5):
    pixels = raster_betti(sites, alpha, 0.01, restricted.values)
    bars = (barcode.betti(0, alpha), barcode.betti(1, alpha))
    print(f"alpha={alpha}: barcode {bars}, raster {pixels}")
