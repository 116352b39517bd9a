"""CLI for rendering driftbench figures.

``plots render --spec <json>`` draws one figure from an explicit spec;
``plots preset <name> --in <dir> --out <dir>`` renders every panel of a
canned figure.  Exit codes: 0 success, 2 spec/schema error, 3 I/O error.
"""

from __future__ import annotations

import argparse
import json
import sys
from typing import List, Optional

from .figures import SchemaError, render, spec_from_dict
from .presets import preset_names, run_preset


def _cmd_render(args: argparse.Namespace) -> int:
    try:
        with open(args.spec, "r", encoding="utf-8") as fh:
            raw = json.load(fh)
    except json.JSONDecodeError as exc:
        raise SchemaError(f"spec {args.spec!r} is not valid JSON: {exc}") from exc
    out = render(spec_from_dict(raw))
    if not args.quiet:
        print(f"wrote {out}")
    return 0


def _cmd_preset(args: argparse.Namespace) -> int:
    written = run_preset(args.name, args.in_dir, args.out_dir)
    if not args.quiet:
        for path in written:
            print(f"wrote {path}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="plots", description="Render figures from driftbench CSV outputs."
    )
    sub = parser.add_subparsers(dest="command", required=True)

    rend = sub.add_parser("render", help="render one figure from a JSON spec")
    rend.add_argument("--spec", type=str, required=True)
    rend.add_argument("--quiet", action="store_true")
    rend.set_defaults(func=_cmd_render)

    pre = sub.add_parser(
        "preset", help=f"render a canned figure ({', '.join(preset_names())})"
    )
    pre.add_argument("name", type=str)
    pre.add_argument("--in", dest="in_dir", type=str, required=True)
    pre.add_argument("--out", dest="out_dir", type=str, required=True)
    pre.add_argument("--quiet", action="store_true")
    pre.set_defaults(func=_cmd_preset)

    return parser


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except SchemaError as exc:
        print(f"schema error: {exc}", file=sys.stderr)
        return 2
    except (FileNotFoundError, OSError) as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
