"""Command line front end: render figures from convergence/trajectory CSVs.

Exit codes mirror the simulation CLI: 0 success, 2 bad usage or schema
mismatch, 3 I/O failure.
"""
from __future__ import annotations

import argparse
import sys
from typing import Optional, Sequence

from .render import FigureKind, FigureSpec, SchemaError, plot_loglog, plot_paths

EXIT_OK = 0
EXIT_SCHEMA = 2
EXIT_IO = 3


def _add_common(sub: argparse.ArgumentParser) -> None:
    sub.add_argument("--out", required=True, help="output image path (.svg or .png)")
    sub.add_argument("--title", default="", help="figure title")
    sub.add_argument("--xlabel", default="", help="x axis label override")
    sub.add_argument("--ylabel", default="", help="y axis label override")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="plotview",
        description="Render strong-error and sample-path figures from fixed-schema CSVs",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_log = sub.add_parser("loglog", help="log2-log2 error plot with a slope-1 reference")
    p_log.add_argument("inputs", nargs=1, metavar="CONVERGENCE_CSV")
    _add_common(p_log)

    p_paths = sub.add_parser("paths", help="sample-path overlay with domain bounds")
    p_paths.add_argument("inputs", nargs="+", metavar="TRAJECTORY_CSV")
    p_paths.add_argument("--cap-n", type=float, required=True, help="population size N")
    p_paths.add_argument(
        "--threshold", type=float, default=None, help="draw a line at this prevalence"
    )
    _add_common(p_paths)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    kind = FigureKind.LOGLOG_ERROR if args.command == "loglog" else FigureKind.SAMPLE_PATHS
    spec = FigureSpec(
        kind=kind,
        inputs=tuple(args.inputs),
        out=args.out,
        title=args.title,
        xlabel=args.xlabel,
        ylabel=args.ylabel,
        cap_n=getattr(args, "cap_n", None),
        threshold=getattr(args, "threshold", None),
    )
    try:
        if kind is FigureKind.LOGLOG_ERROR:
            slope = plot_loglog(spec)
            print(f"wrote {spec.out} (fitted slope {slope:.4f})")
        else:
            count = plot_paths(spec)
            print(f"wrote {spec.out} ({count} paths)")
    except SchemaError as exc:
        print(f"plotview: {exc}", file=sys.stderr)
        return EXIT_SCHEMA
    except OSError as exc:
        print(f"plotview: {exc}", file=sys.stderr)
        return EXIT_IO
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
