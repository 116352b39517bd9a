"""Command-line entry point.

Subcommands: ``generate`` (emit a stream CSV), ``run`` (execute an
experiment config or preset), ``bound`` (print reference-bound values), and
``presets`` (list or run the canned figure configurations).  Exit codes:
0 success, 2 configuration error, 3 I/O error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from typing import List, Optional

from . import datagen, harness, presets
from .datagen import ShiftSpec, StreamSpec
from .harness import ConfigError


def _parse_starts(text: str) -> tuple:
    try:
        return tuple(int(tok) for tok in text.replace(",", " ").split())
    except ValueError as exc:
        raise ConfigError(f"bad --starts value {text!r}: {exc}") from exc


def _cmd_generate(args: argparse.Namespace) -> int:
    shift = ShiftSpec(
        kind=args.shift,
        alpha=args.alpha,
        starts=_parse_starts(args.starts) if args.starts else (),
    )
    if shift.kind == "hard" and not shift.starts:
        raise ConfigError("hard shifts need --starts")
    spec = StreamSpec(
        n=args.n, d=args.d, sigma=args.sigma, input_mode=args.input_mode,
        seed=args.seed,
    )
    if shift.kind == "soft":
        path = datagen.gen_soft_shifts(args.n, args.d, shift.alpha, args.seed)
    else:
        path = datagen.gen_hard_shifts(args.n, args.d, shift.starts, args.seed)
    stream = datagen.gen_stream(path, spec)
    datagen.write_stream_csv(stream, args.out)
    if not args.quiet:
        print(f"wrote {stream.n} rounds to {args.out}")
    return 0


def _run_one(config: harness.ExperimentConfig, out_dir: str, quiet: bool) -> None:
    result = harness.run_experiment(config)
    written = harness.write_results(result, out_dir)
    if not quiet:
        for path in written:
            print(f"wrote {path}")


def _cmd_run(args: argparse.Namespace) -> int:
    if bool(args.config) == bool(args.preset):
        raise ConfigError("run needs exactly one of --config or --preset")
    out_dir = args.out or "driftbench-out"
    if args.config:
        try:
            with open(args.config, "r", encoding="utf-8") as fh:
                raw = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config {args.config!r} is not valid JSON: {exc}") from exc
        config = harness.parse_experiment_config(raw)
        if args.seed is not None:
            config.seed = args.seed
        if args.runs is not None:
            config.runs = args.runs
        if args.bound_constant is not None:
            config.bound_constant = args.bound_constant
        _run_one(config, out_dir, args.quiet)
        return 0
    return _run_preset(
        args.preset, out_dir, args.seed, args.runs, args.bound_constant, args.quiet
    )


def _run_preset(
    name: str,
    out_dir: str,
    seed: Optional[int],
    runs: Optional[int],
    bound_constant: Optional[float],
    quiet: bool,
) -> int:
    try:
        panels = presets.build_preset(
            name,
            seed=seed if seed is not None else presets.DEFAULT_SEED,
            runs=runs if runs is not None else presets.DEFAULT_RUNS,
        )
    except KeyError:
        raise ConfigError(
            f"unknown preset {name!r}; available: {', '.join(presets.preset_names())}"
        ) from None
    for panel, config in panels:
        if bound_constant is not None:
            config.bound_constant = bound_constant
        _run_one(config, os.path.join(out_dir, f"{name}-{panel}"), quiet)
    return 0


def _cmd_bound(args: argparse.Namespace) -> int:
    for t in args.t:
        print(harness.bound_curve(t, args.d, args.tv, args.bound_constant))
    return 0


def _cmd_presets(args: argparse.Namespace) -> int:
    if args.run:
        out_dir = args.out or "driftbench-out"
        return _run_preset(
            args.run, out_dir, args.seed, args.runs, args.bound_constant, args.quiet
        )
    for name in presets.preset_names():
        panels = ", ".join(panel for panel, _ in presets.PRESETS[name])
        print(f"{name}: {panels}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="driftbench",
        description="Benchmark harness for non-stationary online regression.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("generate", help="emit a synthetic stream CSV")
    gen.add_argument("--n", type=int, required=True)
    gen.add_argument("--d", type=int, default=1)
    gen.add_argument("--sigma", type=float, default=1.0)
    gen.add_argument("--input-mode", choices=datagen.INPUT_MODES,
                     default="uniform-cube")
    gen.add_argument("--shift", choices=("soft", "hard"), default="soft")
    gen.add_argument("--alpha", type=float, default=0.3)
    gen.add_argument("--starts", type=str, default="",
                     help="comma/space separated hard-shift start rounds")
    gen.add_argument("--seed", type=int, default=0)
    gen.add_argument("--out", type=str, required=True)
    gen.add_argument("--quiet", action="store_true")
    gen.set_defaults(func=_cmd_generate)

    run = sub.add_parser("run", help="execute an experiment config or preset")
    run.add_argument("--config", type=str, help="path to a JSON experiment config")
    run.add_argument("--preset", type=str, help="preset name (see 'presets')")
    run.add_argument("--seed", type=int, default=None)
    run.add_argument("--runs", type=int, default=None)
    run.add_argument("--out", type=str, default=None)
    run.add_argument("--bound-constant", type=float, default=None)
    run.add_argument("--quiet", action="store_true")
    run.set_defaults(func=_cmd_run)

    bound = sub.add_parser("bound", help="print reference bound values")
    bound.add_argument("--t", type=int, nargs="+", required=True)
    bound.add_argument("--d", type=int, required=True)
    bound.add_argument("--tv", type=float, required=True)
    bound.add_argument("--bound-constant", type=float, default=1.0)
    bound.set_defaults(func=_cmd_bound)

    pre = sub.add_parser("presets", help="list or run the figure presets")
    pre.add_argument("--run", type=str, default=None, help="preset name to execute")
    pre.add_argument("--seed", type=int, default=None)
    pre.add_argument("--runs", type=int, default=None)
    pre.add_argument("--out", type=str, default=None)
    pre.add_argument("--bound-constant", type=float, default=None)
    pre.add_argument("--quiet", action="store_true")
    pre.set_defaults(func=_cmd_presets)

    return parser


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ValueError as exc:  # ConfigError and invalid spec/argument values
        print(f"configuration error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
