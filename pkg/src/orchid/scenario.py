"""Reproducible world instances: clustered user drops, hotspot centers, and
the GBS/UAV user partition.

Users follow a two-stage clustered point pattern: hotspot centers placed
uniformly (with an edge margin of two scatter sigmas so hotspots are not
half-truncated), then Gaussian-scattered users around each center with
out-of-area draws re-sampled to preserve the Gaussian shape near edges.
Cluster populations are deterministic near-equal shares of the fixed user
count.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .config import ConfigError, WorldConfig

SCENARIO_FORMAT_VERSION = 1


@dataclass(frozen=True)
class Scenario:
    """Immutable world description shared by every run on it."""

    config: WorldConfig
    users: np.ndarray           # (M, 2) meters
    cluster_centers: np.ndarray  # (K_p, 2) meters
    gbs_users: np.ndarray       # indices served by the terrestrial tier
    uav_users: np.ndarray       # indices targeted by the fleet
    seed: int

    @property
    def gbs_position(self) -> np.ndarray:
        return np.asarray(self.config.gbs_position_m, dtype=float)

    @property
    def num_uav_users(self) -> int:
        return int(self.uav_users.size)


def _cluster_sizes(num_users: int, num_clusters: int) -> np.ndarray:
    base, extra = divmod(num_users, num_clusters)
    sizes = np.full(num_clusters, base, dtype=int)
    sizes[:extra] += 1
    return sizes


def generate_scenario(config: WorldConfig) -> Scenario:
    """Draw a world instance; bit-for-bit reproducible for a fixed seed."""
    config.validate()
    rng = np.random.default_rng(config.seed)
    d = config.area_side_m
    sigma = config.scatter_sigma_m

    margin = min(2.0 * sigma, 0.45 * d)
    centers = rng.uniform(margin, d - margin,
                          size=(config.num_clusters, 2))

    sizes = _cluster_sizes(config.num_users, config.num_clusters)
    users = np.empty((config.num_users, 2), dtype=float)
    row = 0
    for k, size in enumerate(sizes):
        remaining = size
        while remaining > 0:
            draws = centers[k] + rng.normal(0.0, sigma, size=(remaining, 2))
            inside = draws[
                (draws[:, 0] >= 0.0) & (draws[:, 0] <= d)
                & (draws[:, 1] >= 0.0) & (draws[:, 1] <= d)
            ]
            take = inside[:remaining]
            users[row:row + take.shape[0]] = take
            row += take.shape[0]
            remaining -= take.shape[0]

    gbs_idx, uav_idx = partition_users(
        users, centers, np.asarray(config.gbs_position_m, dtype=float))
    return Scenario(
        config=config,
        users=users,
        cluster_centers=centers,
        gbs_users=gbs_idx,
        uav_users=uav_idx,
        seed=config.seed,
    )


def partition_users(users, cluster_centers, gbs_position):
    """Split user indices into (gbs_users, uav_users).

    Membership is a nearest-center scan in the horizontal plane; the whole
    cluster whose center is nearest to the GBS goes to the terrestrial tier.
    All ties resolve to the lowest index.
    """
    users = np.asarray(users, dtype=float)
    centers = np.asarray(cluster_centers, dtype=float)
    if centers.shape[0] < 1:
        raise ValueError("at least one cluster center is required")
    gbs_xy = np.asarray(gbs_position, dtype=float)[:2]

    center_dist = np.linalg.norm(centers - gbs_xy[None, :], axis=1)
    gbs_cluster = int(np.argmin(center_dist))

    membership = np.argmin(
        np.linalg.norm(users[:, None, :] - centers[None, :, :], axis=2),
        axis=1,
    )
    idx = np.arange(users.shape[0])
    gbs_users = idx[membership == gbs_cluster]
    uav_users = idx[membership != gbs_cluster]
    return gbs_users, uav_users


def save_scenario(scenario: Scenario, path: str | Path) -> None:
    payload = {
        "version": SCENARIO_FORMAT_VERSION,
        "seed": int(scenario.seed),
        "config": {
            "area_side_m": scenario.config.area_side_m,
            "num_users": scenario.config.num_users,
            "num_uavs": scenario.config.num_uavs,
            "num_clusters": scenario.config.num_clusters,
            "scatter_sigma_m": scenario.config.scatter_sigma_m,
            "gbs_position_m": list(scenario.config.gbs_position_m),
            "gbs_power_mw": scenario.config.gbs_power_mw,
            "seed": int(scenario.config.seed),
        },
        # json repr keeps full double precision (>= 9 significant digits)
        "users": scenario.users.tolist(),
        "centers": scenario.cluster_centers.tolist(),
        "gbs_users": scenario.gbs_users.tolist(),
        "uav_users": scenario.uav_users.tolist(),
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, separators=(",", ":"))
        fh.write("\n")


def load_scenario(path: str | Path) -> Scenario:
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"scenario file not found: {path}")
    with open(path, "r", encoding="utf-8") as fh:
        payload = json.load(fh)
    if payload.get("version") != SCENARIO_FORMAT_VERSION:
        raise ConfigError(
            f"unsupported scenario version {payload.get('version')}")
    cfg_raw = dict(payload["config"])
    cfg_raw["gbs_position_m"] = tuple(cfg_raw["gbs_position_m"])
    config = WorldConfig(**cfg_raw)
    config.validate()
    return Scenario(
        config=config,
        users=np.asarray(payload["users"], dtype=float).reshape(-1, 2),
        cluster_centers=np.asarray(payload["centers"], dtype=float).reshape(-1, 2),
        gbs_users=np.asarray(payload["gbs_users"], dtype=int),
        uav_users=np.asarray(payload["uav_users"], dtype=int),
        seed=int(payload["seed"]),
    )
