"""Command-line entry point.

Subcommands: generate, train, baseline, eval, export-figures.
Exit codes: 0 success, 2 configuration error, 3 numeric abort.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .config import ConfigError, RunConfig, load_run_config, world_from_dict
from .harness import evaluate, export_figures, run_baseline, train
from .learn import NumericAbort
from .scenario import generate_scenario, load_scenario, save_scenario


def _load_config(path: str | None) -> RunConfig:
    if path is None:
        cfg = RunConfig()
        cfg.validate()
        return cfg
    return load_run_config(path)


def _cmd_generate(args) -> int:
    cfg = _load_config(args.config)
    world = cfg.world
    if args.seed is not None:
        world.seed = args.seed
    scenario = generate_scenario(world)
    save_scenario(scenario, args.out)
    print(f"wrote scenario with {scenario.config.num_users} users "
          f"({scenario.num_uav_users} fleet-tier) to {args.out}")
    return 0


def _cmd_train(args) -> int:
    cfg = _load_config(args.config)
    if args.scenario:
        cfg.scenario_path = args.scenario
    if args.episodes:
        cfg.episodes = args.episodes
    if args.seeds:
        cfg.seeds = tuple(int(s) for s in args.seeds.split(","))
    cfg.validate()
    if not cfg.scenario_path:
        raise ConfigError("run.scenario_path (or --scenario) is required")
    runs = train(cfg, args.out, resume=args.resume)
    for seed, run_dir in runs.items():
        print(f"seed {seed}: {run_dir}")
    return 0


def _cmd_baseline(args) -> int:
    cfg = _load_config(args.config)
    scenario = load_scenario(args.scenario)
    run_dir = run_baseline(args.method, scenario, cfg,
                           episodes=args.episodes, out_dir=args.out,
                           seed=args.seed)
    print(f"baseline {args.method}: {run_dir}")
    return 0


def _cmd_eval(args) -> int:
    cfg = _load_config(args.config)
    scenario = load_scenario(args.scenario)
    result = evaluate(args.checkpoint, scenario, cfg, episodes=args.episodes,
                      eval_seed=args.eval_seed)
    text = json.dumps(result, indent=2, sort_keys=True)
    print(text)
    if args.out:
        Path(args.out).write_text(text + "\n", encoding="utf-8")
    return 0


def _cmd_export(args) -> int:
    paths = export_figures(args.runs, args.out)
    for key, path in paths.items():
        print(f"{key}: {path}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="orchid",
        description="Two-stage multi-UAV coverage orchestration lab")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate", help="generate and persist a scenario")
    p.add_argument("--config", default=None)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_generate)

    p = sub.add_parser("train", help="train the fleet policy")
    p.add_argument("--config", default=None)
    p.add_argument("--scenario", default=None)
    p.add_argument("--episodes", type=int, default=None)
    p.add_argument("--seeds", default=None, help="comma-separated run seeds")
    p.add_argument("--out", required=True)
    p.add_argument("--resume", action="store_true")
    p.set_defaults(func=_cmd_train)

    p = sub.add_parser("baseline", help="run a static deployment baseline")
    p.add_argument("--method", required=True,
                   choices=("static_random", "static_kmeans"))
    p.add_argument("--scenario", required=True)
    p.add_argument("--config", default=None)
    p.add_argument("--episodes", type=int, default=20)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_baseline)

    p = sub.add_parser("eval", help="deterministic evaluation of a checkpoint")
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--scenario", required=True)
    p.add_argument("--config", default=None)
    p.add_argument("--episodes", type=int, default=20)
    p.add_argument("--eval-seed", type=int, default=777)
    p.add_argument("--out", default=None)
    p.set_defaults(func=_cmd_eval)

    p = sub.add_parser("export-figures",
                       help="flatten run logs into tidy CSVs for plotting")
    p.add_argument("--runs", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_export)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except NumericAbort as exc:
        print(f"numeric abort: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
