"""Fairness and efficiency metrics: Jain's index, coverage rate, and
normalized energy efficiency aggregates."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass
class EpisodeMetrics:
    """Per-episode aggregate row used by the run logs."""

    mean_coverage: float
    nee: float
    jfi_load_avg: float
    jfi_rate_avg: float
    mean_reward: float
    rnf_triggered: bool = False


def jain_index(values) -> float:
    """Jain's fairness index (sum x)^2 / (n * sum x^2), in [1/n, 1].

    Raises ValueError on an empty or all-zero input; training-side callers
    use :func:`jain_index_or` which maps that case to a chosen default.
    """
    x = np.asarray(values, dtype=float)
    if x.size == 0:
        raise ValueError("jain_index undefined for empty input")
    if np.any(x < 0):
        raise ValueError("jain_index requires non-negative values")
    sq_sum = float(np.sum(x * x))
    if sq_sum == 0.0:
        raise ValueError("jain_index undefined for all-zero input")
    total = float(np.sum(x))
    return total * total / (x.size * sq_sum)


def jain_index_or(values, default: float = 0.0) -> float:
    """Jain's index with the degenerate (empty/all-zero) case mapped to
    ``default``; early random policies can serve nobody."""
    try:
        return jain_index(values)
    except ValueError:
        return default


def nee(episode_ee_series, random_baseline_mean_ee: float) -> float:
    """Time-averaged system EE normalized by the static-random baseline."""
    if random_baseline_mean_ee <= 0:
        raise ValueError("baseline mean EE must be positive")
    series = np.asarray(episode_ee_series, dtype=float)
    if series.size == 0:
        raise ValueError("empty EE series")
    return float(np.mean(series)) / random_baseline_mean_ee


def coverage_rate(masks) -> float:
    """Time-averaged covered fraction over an episode, in percent."""
    masks = np.asarray(masks, dtype=float)
    if masks.size == 0:
        raise ValueError("coverage_rate needs at least one step")
    if masks.ndim == 1:
        masks = masks[None, :]
    return float(np.mean(masks)) * 100.0
