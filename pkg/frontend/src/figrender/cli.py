"""figrender command line: render figures from a results directory."""

from __future__ import annotations

import argparse
import sys

from .recipes import RECIPES
from .render import RenderError, render


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="figrender", description="Render polarauth result CSVs to images"
    )
    sub = parser.add_subparsers(dest="command", required=True)
    ren = sub.add_parser("render", help="render one or more figures")
    ren.add_argument("--figures", required=True,
                     help="comma-separated figure ids, or 'all'")
    ren.add_argument("--in", dest="input_dir", required=True,
                     help="directory holding <experiment>.csv files")
    ren.add_argument("--out", dest="output_dir", required=True,
                     help="directory for the rendered images")
    sub.add_parser("list", help="list available figures")

    args = parser.parse_args(argv)
    if args.command == "list":
        for fid, recipe in sorted(RECIPES.items()):
            exps = ", ".join(recipe.experiments)
            print(f"{fid:8s} {recipe.description}  [inputs: {exps}]")
        return 0
    wanted = sorted(RECIPES) if args.figures == "all" else args.figures.split(",")
    try:
        paths = render([f.strip() for f in wanted], args.input_dir, args.output_dir)
    except RenderError as err:
        print(f"error: {err}", file=sys.stderr)
        return 1
    for path in paths:
        print(f"wrote {path}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
