"""CLI: render a figure from experiment CSVs.

    render --kind fit1d --in out/fit.csv out/loss_curve.csv --out fig.svg
"""

from __future__ import annotations

import argparse
import sys

from .render import FIGURE_KINDS, FigureSpec, SchemaError, render


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="render", description="Render a figure from pulseqnn CSV artifacts."
    )
    parser.add_argument("--kind", required=True, choices=FIGURE_KINDS)
    parser.add_argument(
        "--in", dest="inputs", nargs="+", required=True, help="input CSV file(s)"
    )
    parser.add_argument("--out", required=True, help="output image path (.svg or .png)")
    parser.add_argument("--title", default="")
    parser.add_argument("--xlabel", default="")
    parser.add_argument("--ylabel", default="")
    args = parser.parse_args(argv)

    spec = FigureSpec(
        kind=args.kind,
        inputs=args.inputs,
        output=args.out,
        title=args.title,
        xlabel=args.xlabel,
        ylabel=args.ylabel,
    )
    try:
        render(spec)
    except SchemaError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    print(args.out)
    return 0


if __name__ == "__main__":
    sys.exit(main())
