"""Persistence barcodes of offsets of disjoint convex polygons.

Three routes to the same 0- and 1-dimensional barcodes: the linear-size
restricted nerve built from the Voronoi diagram of the polygons, the full
nerve of all pairs and triples, and an alpha filtration of a grid sample.
"""

from .generate import GeneratorFailure, random_sites
from .geom import ConvexPolygon, GeometryError, SiteSet, make_sites
from .nerve import FilteredComplex, restricted_nerve, unrestricted_nerve
from .oracle import raster_betti
from .persistence import Barcode, UnsortableFiltration, bottleneck_distance, compute_barcode
from .pipelines import run_pipeline
from .sampling import SampleTooLarge, grid_sample, sample_filtration
from .voronoi import DegeneratePosition, build_voronoi

__all__ = [
    "Barcode", "ConvexPolygon", "DegeneratePosition", "FilteredComplex",
    "GeneratorFailure", "GeometryError", "SampleTooLarge", "SiteSet",
    "UnsortableFiltration", "bottleneck_distance", "build_voronoi",
    "compute_barcode", "grid_sample", "make_sites", "random_sites",
    "raster_betti", "restricted_nerve", "run_pipeline", "sample_filtration",
    "unrestricted_nerve",
]
