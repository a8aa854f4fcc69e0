"""Command-line entry point.

Subcommands:
  run           one scheme from a YAML config (or pure defaults)
  preset        a named experiment preset over several seeds
  list-presets  show available presets

One CSV per scheme/label per seed; the schema is documented in runner.py.
"""
from __future__ import annotations

import argparse
import sys
from pathlib import Path

from . import presets as presets_mod
from . import runner
from .config import SCHEMES, RunConfig

SCHEME_ALIASES = {"alg3": "full", "alg4": "flexible"}


def _apply_overrides(cfg: RunConfig, args) -> RunConfig:
    import dataclasses
    changes = {}
    if args.scheme:
        changes["scheme"] = SCHEME_ALIASES.get(args.scheme, args.scheme)
    if args.seed is not None:
        changes["seed"] = args.seed
    if args.trials is not None:
        changes["trials"] = args.trials
    return dataclasses.replace(cfg, **changes) if changes else cfg


def _emit(cfg: RunConfig, seed: int, out_dir: Path, label: str) -> Path:
    result = runner.run(cfg, seed=seed)
    path = out_dir / f"{label}_seed{seed}.csv"
    runner.write_csv(path, result.rows)
    return path


def cmd_run(args) -> int:
    cfg = RunConfig.from_yaml(args.config) if args.config else RunConfig()
    cfg = _apply_overrides(cfg, args)
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    for trial in range(cfg.trials):
        seed = cfg.seed + trial
        path = _emit(cfg, seed, out_dir, cfg.scheme)
        print(path)
    return 0


def cmd_preset(args) -> int:
    jobs = presets_mod.preset(args.name)
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    trials = args.trials if args.trials is not None else 10
    base_seed = args.seed if args.seed is not None else 0
    for label, cfg in jobs:
        for trial in range(trials):
            seed = base_seed + trial
            path = _emit(cfg, seed, out_dir, f"{args.name}_{label}")
            print(path)
    return 0


def cmd_list_presets(_args) -> int:
    for name in sorted(presets_mod.PRESETS):
        labels = ", ".join(label for label, _ in presets_mod.preset(name))
        print(f"{name}: {labels}")
    return 0


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="fogfl")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run one configuration")
    p_run.add_argument("--config", type=Path, default=None, help="YAML config path")
    p_run.add_argument("--scheme", choices=sorted(set(SCHEMES) | set(SCHEME_ALIASES)))
    p_run.add_argument("--seed", type=int, default=None)
    p_run.add_argument("--trials", type=int, default=None)
    p_run.add_argument("--out", default="results")
    p_run.set_defaults(func=cmd_run)

    p_pre = sub.add_parser("preset", help="run a named preset")
    p_pre.add_argument("name")
    p_pre.add_argument("--seed", type=int, default=None)
    p_pre.add_argument("--trials", type=int, default=None)
    p_pre.add_argument("--out", default="results")
    p_pre.set_defaults(func=cmd_preset)

    p_list = sub.add_parser("list-presets", help="list available presets")
    p_list.set_defaults(func=cmd_list_presets)

    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, KeyError, RuntimeError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
