"""GBS-aware heterogeneous initialization.

Partitions all ground users into N+1 clusters (k-means++ seeding, Lloyd
refinement), discards the centroid nearest to the GBS as the terrestrially
served zone, and lifts the remaining N centroids to the cruising altitude
as initial UAV poses.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np


@dataclass
class ClusteringResult:
    centroids: np.ndarray     # (k, 2)
    assignments: np.ndarray   # (M,) cluster index per point
    wcss: float               # within-cluster sum of squared distances
    discarded_index: Optional[int] = None
    wcss_history: Optional[list] = None


def _sq_dists_to_nearest(points, centroids):
    d2 = np.sum((points[:, None, :] - centroids[None, :, :]) ** 2, axis=2)
    return np.min(d2, axis=1)


def kmeanspp_seed(points, k: int, rng: np.random.Generator) -> np.ndarray:
    """k-means++ seeding: first centroid uniform, then proportional to the
    squared distance to the nearest chosen centroid."""
    points = np.asarray(points, dtype=float)
    distinct = np.unique(points, axis=0).shape[0]
    if k > distinct:
        raise ValueError(f"k={k} exceeds {distinct} distinct points")
    chosen = np.empty((k, 2), dtype=float)
    first = rng.integers(points.shape[0])
    chosen[0] = points[first]
    for i in range(1, k):
        d2 = _sq_dists_to_nearest(points, chosen[:i])
        total = d2.sum()
        if total == 0.0:
            raise ValueError("ran out of distinct seeding candidates")
        probs = d2 / total
        chosen[i] = points[rng.choice(points.shape[0], p=probs)]
    return chosen


def lloyd_refine(points, init_centroids, max_iters: int = 300,
                 tol: float = 1e-6) -> ClusteringResult:
    """Alternating assignment/mean refinement. WCSS never increases between
    iterations; empty clusters are re-seeded to the point farthest from
    their current centroid."""
    points = np.asarray(points, dtype=float)
    centroids = np.array(init_centroids, dtype=float, copy=True)
    if not np.all(np.isfinite(centroids)):
        raise ValueError("initial centroids must be finite")
    k = centroids.shape[0]
    wcss_history = []
    assignments = np.zeros(points.shape[0], dtype=int)

    for _ in range(max_iters):
        d2 = np.sum((points[:, None, :] - centroids[None, :, :]) ** 2, axis=2)
        assignments = np.argmin(d2, axis=1)
        wcss_history.append(float(d2[np.arange(points.shape[0]), assignments].sum()))

        new_centroids = centroids.copy()
        for c in range(k):
            members = points[assignments == c]
            if members.shape[0] > 0:
                new_centroids[c] = members.mean(axis=0)
            else:
                far = np.argmax(np.sum((points - centroids[c]) ** 2, axis=1))
                new_centroids[c] = points[far]
        shift = float(np.max(np.linalg.norm(new_centroids - centroids, axis=1)))
        centroids = new_centroids
        if shift < tol:
            break

    d2 = np.sum((points[:, None, :] - centroids[None, :, :]) ** 2, axis=2)
    assignments = np.argmin(d2, axis=1)
    wcss = float(d2[np.arange(points.shape[0]), assignments].sum())
    wcss_history.append(wcss)
    return ClusteringResult(centroids=centroids, assignments=assignments,
                            wcss=wcss, wcss_history=wcss_history)


def gbs_filter_assign(result: ClusteringResult, gbs_pos, h_init: float) -> np.ndarray:
    """Discard the centroid nearest to the GBS (horizontal distance, ties to
    the lowest index); lift the remaining centroids to h_init as UAV poses,
    paired by ascending centroid index."""
    gbs_xy = np.asarray(gbs_pos, dtype=float)[:2]
    dist = np.linalg.norm(result.centroids - gbs_xy[None, :], axis=1)
    drop = int(np.argmin(dist))
    result.discarded_index = drop
    keep = np.delete(result.centroids, drop, axis=0)
    poses = np.column_stack([keep, np.full(keep.shape[0], float(h_init))])
    return poses


def initial_poses(users, n_uavs: int, gbs_pos, h_init: float,
                  rng: np.random.Generator, restarts: int = 5,
                  max_iters: int = 300, tol: float = 1e-6):
    """Best-of-R clustering by WCSS, then GBS filtering. Returns (poses,
    ClusteringResult) for the winning restart."""
    users = np.asarray(users, dtype=float)
    best = None
    for _ in range(max(1, restarts)):
        seeds = kmeanspp_seed(users, n_uavs + 1, rng)
        result = lloyd_refine(users, seeds, max_iters=max_iters, tol=tol)
        if best is None or result.wcss < best.wcss:
            best = result
    poses = gbs_filter_assign(best, gbs_pos, h_init)
    return poses, best


def random_feasible_poses(n_uavs: int, area_side: float, alt_min: float,
                          alt_max: float, rng: np.random.Generator) -> np.ndarray:
    """Uniform random poses inside the mission volume (ablation / baseline)."""
    xy = rng.uniform(0.0, area_side, size=(n_uavs, 2))
    z = rng.uniform(alt_min, alt_max, size=(n_uavs, 1))
    return np.hstack([xy, z])
