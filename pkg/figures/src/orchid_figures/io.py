"""Tidy CSV loading and validation."""

from __future__ import annotations

from pathlib import Path

import pandas as pd

TIDY_COLUMNS = ["method", "seed", "episode", "metric", "value"]


class MissingColumnError(ValueError):
    def __init__(self, name: str):
        super().__init__(f"required column missing: {name!r}")
        self.column = name


def load_tidy(path) -> pd.DataFrame:
    """Long-format run table: (method, seed, episode, metric) -> value."""
    path = Path(path)
    if path.is_dir():
        path = path / "runs_tidy.csv"
    df = pd.read_csv(path)
    for col in TIDY_COLUMNS:
        if col not in df.columns:
            raise MissingColumnError(col)
    df["seed"] = df["seed"].astype(int)
    df["episode"] = df["episode"].astype(int)
    df["value"] = df["value"].astype(float)
    dup = df.duplicated(subset=["method", "seed", "episode", "metric"])
    if dup.any():
        first = df[dup].iloc[0]
        raise ValueError(
            "duplicate tidy key: "
            f"({first['method']}, {first['seed']}, {first['episode']}, "
            f"{first['metric']})")
    return df


def load_meta(path) -> pd.DataFrame | None:
    """Optional per-run metadata (trigger episodes)."""
    path = Path(path)
    if path.is_dir():
        path = path / "runs_meta.csv"
    if not path.exists():
        return None
    meta = pd.read_csv(path)
    if "trigger_episode" in meta.columns:
        meta["trigger_episode"] = pd.to_numeric(meta["trigger_episode"],
                                                errors="coerce")
    return meta
