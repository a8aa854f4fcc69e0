"""Command-line entry point: figpipe render --spec PATH [--out DIR]."""
from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .render import render
from .spec import FigureSpec, SpecError


def cmd_render(args) -> int:
    for spec_path in args.spec:
        spec = FigureSpec.from_yaml(spec_path)
        out = render(spec, out_dir=args.out)
        print(out)
    return 0


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="figpipe")
    sub = parser.add_subparsers(dest="command", required=True)

    p_render = sub.add_parser("render", help="render figures from YAML specs")
    p_render.add_argument("--spec", type=Path, action="append", required=True,
                          help="spec file; repeatable")
    p_render.add_argument("--out", type=Path, default=None,
                          help="output directory (default: next to the spec)")
    p_render.set_defaults(func=cmd_render)

    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (SpecError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
