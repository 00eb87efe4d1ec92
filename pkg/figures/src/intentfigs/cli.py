"""Command line entry point: one subcommand per figure kind."""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .data import SchemaError
from .render import FIGURE_KINDS, PlotSpec, render

EXIT_OK = 0
EXIT_ERROR = 2

_INPUT_FLAGS = {
    "trajectory": ("track", "measurements", "truth"),
    "timeline": ("track", "truth"),
    "jumps": ("track", "truth"),
    "region": ("queries",),
}


def _limits(text: str) -> tuple[float, float]:
    parts = text.split(",")
    if len(parts) != 2:
        raise argparse.ArgumentTypeError(f"expected lo,hi, got {text!r}")
    try:
        lo, hi = float(parts[0]), float(parts[1])
    except ValueError:
        raise argparse.ArgumentTypeError(f"non-numeric limits {text!r}") from None
    return lo, hi


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="intentfigs",
        description="Render intenttrack outputs as deterministic PNG or SVG figures.",
    )
    commands = parser.add_subparsers(dest="kind", required=True)
    for kind in FIGURE_KINDS:
        sub = commands.add_parser(kind, help=f"draw a {kind} figure")
        for flag in _INPUT_FLAGS[kind]:
            sub.add_argument(f"--{flag}", type=Path, help=f"{flag} file from intenttrack")
        sub.add_argument("--out", type=Path, required=True, help="image path (.png or .svg)")
        sub.add_argument("--stride", type=int, default=5, help="keep every Nth step")
        sub.add_argument("--xlim", type=_limits, default=None, help="x-axis limits lo,hi")
        sub.add_argument("--ylim", type=_limits, default=None, help="y-axis limits lo,hi")
    return parser


def main(argv: "list[str] | None" = None) -> int:
    args = build_parser().parse_args(argv)
    fields = {flag: getattr(args, flag, None) for flag in _INPUT_FLAGS[args.kind]}
    try:
        spec = PlotSpec(
            kind=args.kind, out=args.out, stride=args.stride,
            xlim=args.xlim, ylim=args.ylim, **fields,
        )
        out = render(spec)
    except SchemaError as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_ERROR
    except OSError as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_ERROR
    print(out)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
