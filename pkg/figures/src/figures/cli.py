"""Command-line entry points for figure rendering."""

from __future__ import annotations

import argparse
import sys

from .metrics_table import render_metrics_table
from .render import render_boundary, render_partitions


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="punn-figures",
        description="Render exported grid CSVs and metrics JSONL into figures.")
    sub = parser.add_subparsers(dest="verb", required=True)

    p = sub.add_parser("boundary", help="h_1 background with 0.5 contour")
    p.add_argument("--grid", required=True, help="grid CSV path")
    p.add_argument("--out", required=True, help="output image (png/pdf)")
    p.add_argument("--title", default=None)

    p = sub.add_parser("partitions", help="per-partition heatmap panels")
    p.add_argument("--grid", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--title", default=None)

    p = sub.add_parser("table", help="metrics JSONL -> markdown table")
    p.add_argument("metrics", nargs="+", help="metrics JSONL path(s)")
    p.add_argument("--out", default=None, help="write markdown here (default stdout)")
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.verb == "boundary":
            render_boundary(args.grid, args.out, title=args.title)
        elif args.verb == "partitions":
            render_partitions(args.grid, args.out, title=args.title)
        else:
            table = render_metrics_table(args.metrics)
            if args.out:
                with open(args.out, "w", encoding="utf-8") as fh:
                    fh.write(table)
            else:
                sys.stdout.write(table)
    except (OSError, ValueError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
