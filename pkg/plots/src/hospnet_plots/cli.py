"""Batch figure renderer for hospnet report files."""

from __future__ import annotations

import argparse
import sys
from typing import List, Optional

from .figures import FIGURE_KINDS, FigureSpec, SchemaError, render


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="hospnet-plots",
        description="Render figures from hospnet JSON/CSV reports",
    )
    parser.add_argument("kind", choices=FIGURE_KINDS)
    parser.add_argument(
        "--input",
        action="append",
        required=True,
        help="report file; repeat for two-series duration overlays",
    )
    parser.add_argument("--out", required=True, help="output image path")
    parser.add_argument(
        "--label",
        action="append",
        default=[],
        help="series label, in input order",
    )
    parser.add_argument("--title", default=None)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    spec = FigureSpec(
        kind=args.kind,
        inputs=args.input,
        output=args.out,
        labels=args.label,
        title=args.title,
    )
    try:
        render(spec)
    except (SchemaError, FileNotFoundError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    print(f"{args.kind}: wrote {args.out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
