"""CLI: orchid-figures --runs <dir> --fig all|convergence|tradeoff|ablation|strategy --out <dir>."""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .plots import plot_ablation, plot_convergence, plot_strategy, plot_tradeoff

CONVERGENCE_METRICS = ("total_reward", "nee", "jfi_load", "jfi_rate")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="orchid-figures")
    parser.add_argument("--runs", required=True,
                        help="directory containing runs_tidy.csv / runs_meta.csv")
    parser.add_argument("--fig", default="all",
                        choices=("all", "convergence", "tradeoff", "ablation",
                                 "strategy"))
    parser.add_argument("--out", required=True)
    parser.add_argument("--png", action="store_true",
                        help="also write PNG next to each SVG")
    parser.add_argument("--last", type=int, default=100,
                        help="window for last-episode averages")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    runs = Path(args.runs)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    written = []
    try:
        if args.fig in ("all", "convergence"):
            res = plot_convergence(runs, CONVERGENCE_METRICS, out, png=args.png)
            written += res["files"]
        if args.fig in ("all", "tradeoff"):
            for y in ("jfi_load", "jfi_rate"):
                res = plot_tradeoff(runs, "nee", y, out / f"tradeoff_{y}.svg",
                                    last=args.last, png=args.png)
                written += res["files"]
        if args.fig in ("all", "ablation"):
            res = plot_ablation(runs, out / "ablation_panels.svg", png=args.png)
            written += res["files"]
        if args.fig in ("all", "strategy"):
            res = plot_strategy(runs, out / "strategy_mmf_vs_pf.svg",
                                last=args.last, png=args.png)
            written += res["files"]
    except (ValueError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    for path in written:
        print(path)
    return 0


if __name__ == "__main__":
    sys.exit(main())
