"""The three barcode pipelines with per-stage timings."""

from __future__ import annotations

import time
from dataclasses import dataclass

from .geom import SiteSet
from .nerve import FilteredComplex, restricted_nerve, unrestricted_nerve
from .persistence import Barcode, compute_barcode
from .sampling import PointSample, grid_sample, sample_filtration
from .voronoi import build_voronoi

PIPELINES = ("restricted", "cech", "sample")


@dataclass
class PipelineResult:
    pipeline: str
    complex: FilteredComplex
    barcode: Barcode
    filtration_time: float
    persistence_time: float
    epsilon: float | None = None
    sample: PointSample | None = None

    @property
    def total_time(self) -> float:
        return self.filtration_time + self.persistence_time

    @property
    def filtration_size(self) -> int:
        return len(self.complex)


def build_complex(sites: SiteSet, pipeline: str, epsilon: float | None = None):
    """Return (complex, sample-or-None) for one pipeline."""
    if pipeline == "restricted":
        return restricted_nerve(build_voronoi(sites)), None
    if pipeline == "cech":
        return unrestricted_nerve(sites), None
    if pipeline == "sample":
        if epsilon is None or not epsilon > 0:
            raise ValueError("the sample pipeline needs epsilon > 0")
        sample = grid_sample(sites, epsilon)
        return sample_filtration(sample), sample
    raise ValueError(f"unknown pipeline {pipeline!r}")


def run_pipeline(sites: SiteSet, pipeline: str, epsilon: float | None = None) -> PipelineResult:
    t0 = time.perf_counter()
    fc, sample = build_complex(sites, pipeline, epsilon)
    t1 = time.perf_counter()
    barcode = compute_barcode(fc)
    t2 = time.perf_counter()
    return PipelineResult(pipeline, fc, barcode, t1 - t0, t2 - t1,
                          epsilon if pipeline == "sample" else None, sample)
