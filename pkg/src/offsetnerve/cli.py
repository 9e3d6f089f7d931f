"""Command-line interface: generate instances, compute and compare barcodes.

Every command writes its artifact to stdout or to ``--out``; diagnostics go
to stderr. Exit codes: 2 invalid input or usage, 3 degenerate position,
4 instance above the cech cap, 5 sample too large, 6 malformed barcode file,
7 generator failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import sys

import numpy as np

from .formats import (InstanceError, MalformedBarcode, barcode_svg, read_barcode,
                      read_instance, serialize_barcode, serialize_instance)
from .generate import GeneratorFailure, random_sites
from .geom import GeometryError
from .persistence import INF, bottleneck_distance
from .pipelines import run_pipeline
from .sampling import SampleTooLarge
from .voronoi import DegeneratePosition

EXIT_INVALID = 2
EXIT_DEGENERATE = 3
EXIT_CECH_CAP = 4
EXIT_SAMPLE = 5
EXIT_BARCODE = 6
EXIT_GENERATOR = 7

DEFAULT_CECH_CAP = 400
DEFAULT_EPSILONS = (1.0, 0.5, 0.1)
BENCH_COLUMNS = ("pipeline", "n_vertices", "filtration_size", "filtration_time_s",
                 "persistence_time_s", "total_s")


class CliError(Exception):
    def __init__(self, message: str, code: int):
        super().__init__(message)
        self.code = code


def _positive_int(text: str) -> int:
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text}")
    return v


def _positive_float(text: str) -> float:
    v = float(text)
    if not v > 0 or v == INF:
        raise argparse.ArgumentTypeError(f"expected a positive number, got {text}")
    return v


def _emit(text: str, out) -> None:
    if out is None or out == "-":
        sys.stdout.write(text)
        sys.stdout.flush()
    else:
        with open(out, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)


def _load_sites(path):
    try:
        return read_instance(path)
    except OSError as exc:
        raise CliError(f"cannot read {path}: {exc.strerror}", EXIT_INVALID) from None
    except (InstanceError, GeometryError) as exc:
        raise CliError(f"invalid instance {path}: {exc}", EXIT_INVALID) from None


def _barcode_command(args, pipeline: str, epsilon=None) -> None:
    sites = _load_sites(args.instance)
    if pipeline == "cech" and len(sites) > args.cech_cap:
        raise CliError(f"{len(sites)} sites exceed the cech cap of {args.cech_cap}",
                       EXIT_CECH_CAP)
    try:
        result = run_pipeline(sites, pipeline, epsilon)
    except DegeneratePosition as exc:
        raise CliError(f"degenerate position: {exc}", EXIT_DEGENERATE) from None
    except SampleTooLarge as exc:
        raise CliError(str(exc), EXIT_SAMPLE) from None
    meta = {"pipeline": pipeline}
    if epsilon is not None:
        meta["epsilon"] = epsilon
    meta.update(n_sites=len(sites), filtration_size=result.filtration_size,
                elapsed_seconds=round(result.total_time, 6) if args.timing else None)
    if args.points and result.sample is not None:
        _emit("".join(f"{x!r} {y!r}\n" for x, y in result.sample.points.tolist()),
              args.points)
    _emit(serialize_barcode(result.barcode, meta, show_zero=args.show_zero_bars), args.out)
    print(f"{pipeline}: {len(sites)} sites, {result.filtration_size} simplices, "
          f"{result.total_time:.3f} s", file=sys.stderr)


def cmd_gen(args) -> None:
    try:
        sites = random_sites(args.n, seed=args.seed)
    except GeneratorFailure as exc:
        raise CliError(f"generator failed: {exc}", EXIT_GENERATOR) from None
    _emit(serialize_instance(sites), args.out)
    print(f"generated {len(sites)} polygons with {sites.n_vertices} vertices",
          file=sys.stderr)


def cmd_exact(args) -> None:
    _barcode_command(args, "restricted")


def cmd_cech(args) -> None:
    _barcode_command(args, "cech")


def cmd_sample(args) -> None:
    _barcode_command(args, "sample", args.eps)


def _load_barcode(path):
    try:
        return read_barcode(path)
    except MalformedBarcode as exc:
        raise CliError(f"malformed barcode {path}: {exc}", EXIT_BARCODE) from None


def compare_report(A, B, short: float | None = None) -> str:
    lines = []
    for dim in (0, 1):
        d = bottleneck_distance(A, B, dim)
        na, nb = len(A.intervals(dim, True)), len(B.intervals(dim, True))
        lines.append(f"dim{dim} bottleneck {'inf' if d == INF else repr(d)} "
                     f"bars {na} {nb} diff {nb - na}")
        if short is not None:
            sa = sum(1 for b, e in A.intervals(dim) if e - b < short)
            sb = sum(1 for b, e in B.intervals(dim) if e - b < short)
            lines.append(f"dim{dim} visible bars shorter than {short:g}: {sa} {sb}")
    return "\n".join(lines) + "\n"


def cmd_compare(args) -> None:
    A, _ = _load_barcode(args.first)
    B, _ = _load_barcode(args.second)
    _emit(compare_report(A, B, args.short), args.out)


def cmd_plot(args) -> None:
    barcode, _ = _load_barcode(args.barcode)
    _emit(barcode_svg(barcode, show_zero=args.show_zero_bars), args.out)


def _bench_rows(sizes, seeds, epsilons, cech_cap):
    runs = [("restricted", None)] + [("cech", None)] + [("sample", e) for e in epsilons]
    rows = []
    for n in sizes:
        instances = [random_sites(n, seed=s) for s in seeds]
        n_vert = float(np.mean([S.n_vertices for S in instances]))
        for pipeline, eps in runs:
            label = pipeline if eps is None else f"sample(eps={eps:g})"
            if pipeline == "cech" and n > cech_cap:
                rows.append([label, f"{n_vert:g}", "-", "-", "-", "-"])
                continue
            res = [run_pipeline(S, pipeline, eps) for S in instances]
            print(f"bench n={n} {label} done", file=sys.stderr)
            rows.append([label, f"{n_vert:g}",
                         f"{np.mean([r.filtration_size for r in res]):g}",
                         f"{np.mean([r.filtration_time for r in res]):.4f}",
                         f"{np.mean([r.persistence_time for r in res]):.4f}",
                         f"{np.mean([r.total_time for r in res]):.4f}"])
    return rows


def cmd_bench(args) -> None:
    try:
        rows = _bench_rows(args.sizes, args.seeds, args.eps, args.cech_cap)
    except GeneratorFailure as exc:
        raise CliError(f"generator failed: {exc}", EXIT_GENERATOR) from None
    except DegeneratePosition as exc:
        raise CliError(f"degenerate position: {exc}", EXIT_DEGENERATE) from None
    except SampleTooLarge as exc:
        raise CliError(str(exc), EXIT_SAMPLE) from None
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(BENCH_COLUMNS)
    writer.writerows(rows)
    _emit(buf.getvalue(), args.out)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="offsetnerve",
        description="Persistence barcodes of offsets of disjoint convex polygons.")
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, func, help):
        p = sub.add_parser(name, help=help)
        p.set_defaults(func=func)
        p.add_argument("--out", help="output file (default: stdout)")
        return p

    p = add("gen", cmd_gen, "generate a random instance of disjoint convex polygons")
    p.add_argument("n", type=_positive_int, help="number of polygons")
    p.add_argument("--seed", type=int, default=0)

    for name, func, help in (("exact", cmd_exact, "barcode from the restricted nerve"),
                             ("cech", cmd_cech, "barcode from the unrestricted nerve"),
                             ("sample", cmd_sample, "barcode from a grid point sample")):
        p = add(name, func, help)
        p.add_argument("instance", help="instance JSON file")
        p.add_argument("--show-zero-bars", action="store_true",
                       help="keep zero-length bars in the output")
        p.add_argument("--timing", action="store_true",
                       help="record elapsed_seconds (otherwise null, for reproducible files)")
        p.add_argument("--cech-cap", type=_positive_int, default=DEFAULT_CECH_CAP,
                       help="largest number of sites accepted by cech")
        p.add_argument("--points", help="sample command: also write the sample as 'x y' lines")
        if name == "sample":
            p.add_argument("--eps", type=_positive_float, required=True,
                           help="sampling density epsilon > 0")

    p = add("compare", cmd_compare, "bottleneck distances between two barcode files")
    p.add_argument("first")
    p.add_argument("second")
    p.add_argument("--short", type=_positive_float,
                   help="also count visible bars shorter than this length")

    p = add("plot", cmd_plot, "SVG plot of a barcode file")
    p.add_argument("barcode")
    p.add_argument("--show-zero-bars", action="store_true")

    p = add("bench", cmd_bench, "timing and size table over random instances")
    p.add_argument("--sizes", type=_positive_int, nargs="+", required=True)
    p.add_argument("--seeds", type=int, nargs="+", required=True)
    p.add_argument("--eps", type=_positive_float, nargs="+", default=list(DEFAULT_EPSILONS))
    p.add_argument("--cech-cap", type=_positive_int, default=DEFAULT_CECH_CAP)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        args.func(args)
    except CliError as exc:
        print(f"offsetnerve {args.command}: {exc}", file=sys.stderr)
        return exc.code
    return 0


if __name__ == "__main__":
    sys.exit(main())
