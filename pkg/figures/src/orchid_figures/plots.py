"""Figure builders.

Every builder returns the plotted numbers (so tests can check band edges and
point coordinates against fixtures) and writes SVG, optionally PNG. Output
is byte-stable: fixed svg hash salt, no embedded dates.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import matplotlib
import numpy as np
import pandas as pd

matplotlib.use("Agg")
matplotlib.rcParams["svg.hashsalt"] = "orchid-figures"
import matplotlib.pyplot as plt  # noqa: E402

from .io import MissingColumnError, load_meta, load_tidy  # noqa: E402

_COLORS = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"]

METRIC_LABELS = {
    "total_reward": "Total reward",
    "nee": "Normalized energy efficiency",
    "jfi_load": "Fleet load fairness index",
    "jfi_rate": "User rate fairness index",
    "coverage_pct": "Coverage rate (%)",
}


@dataclass
class Band:
    method: str
    episodes: np.ndarray
    mean: np.ndarray
    lower: np.ndarray
    upper: np.ndarray


@dataclass
class TradeoffPoint:
    method: str
    seed: int
    x: float
    y: float


def _save(fig, out_path: Path, png: bool) -> list[Path]:
    out_path = Path(out_path)
    out_path.parent.mkdir(parents=True, exist_ok=True)
    written = [out_path]
    fig.savefig(out_path, format="svg", metadata={"Date": None})
    if png:
        png_path = out_path.with_suffix(".png")
        fig.savefig(png_path, format="png", dpi=150)
        written.append(png_path)
    plt.close(fig)
    return written


def _require_metric(df: pd.DataFrame, metric: str) -> pd.DataFrame:
    sub = df[df["metric"] == metric]
    if sub.empty:
        raise MissingColumnError(metric)
    return sub


def compute_bands(df: pd.DataFrame, metric: str) -> list[Band]:
    """Cross-seed mean and +-1 std (population) per episode, per method."""
    sub = _require_metric(df, metric)
    bands = []
    for method, grp in sub.groupby("method", sort=True):
        wide = grp.pivot(index="episode", columns="seed", values="value")
        wide = wide.sort_index()
        mean = wide.mean(axis=1).to_numpy()
        std = wide.std(axis=1, ddof=0).fillna(0.0).to_numpy()
        bands.append(Band(method=method,
                          episodes=wide.index.to_numpy(),
                          mean=mean, lower=mean - std, upper=mean + std))
    return bands


def _trigger_lines(meta: pd.DataFrame | None, methods) -> dict:
    if meta is None or "trigger_episode" not in meta.columns:
        return {}
    out = {}
    for method in methods:
        trig = meta.loc[meta["method"] == method, "trigger_episode"].dropna()
        if len(trig):
            out[method] = float(trig.mean())
    return out


def plot_convergence(csv_in, metrics, out_dir, png: bool = False,
                     meta_in=None) -> dict:
    """Per-metric convergence curves with shaded +-1 std bands and a vertical
    marker at the stabilization trigger when one is recorded."""
    df = load_tidy(csv_in)
    meta = load_meta(meta_in if meta_in is not None else csv_in)
    out_dir = Path(out_dir)
    result = {"bands": {}, "files": []}
    for metric in metrics:
        bands = compute_bands(df, metric)
        fig, ax = plt.subplots(figsize=(6.4, 4.2))
        triggers = _trigger_lines(meta, [b.method for b in bands])
        for i, band in enumerate(bands):
            color = _COLORS[i % len(_COLORS)]
            ax.plot(band.episodes, band.mean, color=color, lw=1.6,
                    label=band.method)
            ax.fill_between(band.episodes, band.lower, band.upper,
                            color=color, alpha=0.2, linewidth=0)
            if band.method in triggers:
                ax.axvline(triggers[band.method], color=color, ls="--",
                           lw=1.0, alpha=0.7)
        ax.set_xlabel("Episode")
        ax.set_ylabel(METRIC_LABELS.get(metric, metric))
        ax.legend(loc="best", fontsize=8)
        ax.grid(alpha=0.3)
        fig.tight_layout()
        result["files"] += _save(fig, out_dir / f"convergence_{metric}.svg", png)
        result["bands"][metric] = bands
    return result


def last_window_means(df: pd.DataFrame, metric: str, last: int = 100) -> pd.DataFrame:
    """Mean of the final `last` episodes per (method, seed)."""
    sub = _require_metric(df, metric)
    rows = []
    for (method, seed), grp in sub.groupby(["method", "seed"], sort=True):
        grp = grp.sort_values("episode")
        if len(grp) < last:
            raise ValueError(
                f"run ({method}, seed {seed}) has {len(grp)} episodes, "
                f"needs >= {last}")
        rows.append({"method": method, "seed": seed,
                     "value": float(grp["value"].tail(last).mean())})
    return pd.DataFrame(rows)


def plot_tradeoff(csv_in, x_metric, y_metric, out_path, last: int = 100,
                  png: bool = False) -> dict:
    """Efficiency-fairness frontier: one point per (method, seed)."""
    df = load_tidy(csv_in)
    xs = last_window_means(df, x_metric, last)
    ys = last_window_means(df, y_metric, last)
    merged = xs.merge(ys, on=["method", "seed"], suffixes=("_x", "_y"))
    points = [TradeoffPoint(r["method"], int(r["seed"]),
                            float(r["value_x"]), float(r["value_y"]))
              for _, r in merged.iterrows()]

    fig, ax = plt.subplots(figsize=(5.6, 4.4))
    for i, (method, grp) in enumerate(merged.groupby("method", sort=True)):
        ax.scatter(grp["value_x"], grp["value_y"],
                   color=_COLORS[i % len(_COLORS)], label=method, s=42,
                   edgecolor="black", linewidth=0.5)
    ax.set_xlabel(METRIC_LABELS.get(x_metric, x_metric))
    ax.set_ylabel(METRIC_LABELS.get(y_metric, y_metric))
    ax.legend(loc="best", fontsize=8)
    ax.grid(alpha=0.3)
    fig.tight_layout()
    files = _save(fig, Path(out_path), png)
    return {"points": points, "files": files}


def plot_ablation(csv_in, out_path, metrics=("total_reward", "nee",
                                             "jfi_load", "jfi_rate"),
                  png: bool = False, meta_in=None) -> dict:
    """2x2 panel of convergence bands for the ablation comparison."""
    df = load_tidy(csv_in)
    meta = load_meta(meta_in if meta_in is not None else csv_in)
    fig, axes = plt.subplots(2, 2, figsize=(11.0, 7.6))
    bands_out = {}
    for ax, metric in zip(axes.ravel(), metrics):
        bands = compute_bands(df, metric)
        triggers = _trigger_lines(meta, [b.method for b in bands])
        for i, band in enumerate(bands):
            color = _COLORS[i % len(_COLORS)]
            ax.plot(band.episodes, band.mean, color=color, lw=1.4,
                    label=band.method)
            ax.fill_between(band.episodes, band.lower, band.upper,
                            color=color, alpha=0.18, linewidth=0)
            if band.method in triggers:
                ax.axvline(triggers[band.method], color=color, ls="--",
                           lw=0.9, alpha=0.7)
        ax.set_xlabel("Episode")
        ax.set_ylabel(METRIC_LABELS.get(metric, metric))
        ax.grid(alpha=0.3)
        bands_out[metric] = bands
    axes[0, 0].legend(loc="best", fontsize=8)
    fig.tight_layout()
    files = _save(fig, Path(out_path), png)
    return {"bands": bands_out, "files": files}


def plot_strategy(csv_in, out_path, metric: str = "jfi_rate",
                  x_metric: str = "nee", last: int = 100,
                  png: bool = False) -> dict:
    """Objective comparison: per-method box plot of the fairness metric plus
    the efficiency-fairness scatter, one point per (method, seed)."""
    df = load_tidy(csv_in)
    fair = last_window_means(df, metric, last)
    eff = last_window_means(df, x_metric, last)
    merged = eff.merge(fair, on=["method", "seed"], suffixes=("_x", "_y"))
    methods = sorted(fair["method"].unique())

    fig, (ax_box, ax_sc) = plt.subplots(1, 2, figsize=(10.4, 4.4))
    data = [fair.loc[fair["method"] == m, "value"].to_numpy() for m in methods]
    box = ax_box.boxplot(data, tick_labels=methods, showmeans=True,
                         meanprops={"marker": "D", "markerfacecolor": "white",
                                    "markeredgecolor": "black"})
    ax_box.set_ylabel(METRIC_LABELS.get(metric, metric))
    ax_box.grid(alpha=0.3)

    points = []
    for i, m in enumerate(methods):
        grp = merged[merged["method"] == m]
        ax_sc.scatter(grp["value_x"], grp["value_y"],
                      color=_COLORS[i % len(_COLORS)], label=m, s=42,
                      edgecolor="black", linewidth=0.5)
        points += [TradeoffPoint(m, int(r["seed"]), float(r["value_x"]),
                                 float(r["value_y"]))
                   for _, r in grp.iterrows()]
    ax_sc.set_xlabel(METRIC_LABELS.get(x_metric, x_metric))
    ax_sc.set_ylabel(METRIC_LABELS.get(metric, metric))
    ax_sc.legend(loc="best", fontsize=8)
    ax_sc.grid(alpha=0.3)
    fig.tight_layout()
    files = _save(fig, Path(out_path), png)
    means = {m: float(np.mean(d)) for m, d in zip(methods, data)}
    return {"means": means, "points": points, "files": files, "box": box}
