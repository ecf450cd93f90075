"""Entry point: `plot <figure-spec.json> [...]` renders each spec."""

from __future__ import annotations

import argparse
import sys

from .figures import FigureSpec, render_figure
from .io import SchemaError


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="plot", description="Render figures from sppbif CLI outputs.")
    parser.add_argument("specs", nargs="+", help="figure spec JSON files")
    args = parser.parse_args(argv)
    for spec_path in args.specs:
        try:
            spec = FigureSpec.load(spec_path)
            out = render_figure(spec)
        except SchemaError as exc:
            print(f"error: {exc}", file=sys.stderr)
            return 2
        print(out)
    return 0


if __name__ == "__main__":
    sys.exit(main())
