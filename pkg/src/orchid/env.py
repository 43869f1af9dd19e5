"""Multi-UAV coverage environment.

Continuous-action kinematics and power control under hard feasibility:
attempted exits are clamped back into the mission volume and flagged as
boundary violations, so the fleet state never leaves the feasible set while
the penalty term still fires on the attempt. Team reward components
(coverage, energy efficiency, load fairness, rate fairness) are shared
across agents; penalties are per-agent.

One step = one time slot: move, adjust power, re-associate, re-price rates,
score.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import _core
from .channel import dbm_to_watt, mw_to_dbm
from .config import ChannelParams, EnvParams
from .metrics import jain_index_or
from .scenario import Scenario

OBS_FIELDS = 14  # pose(3) power(1) min-user-dist(1) load(1) margins(4) violations(3) backhaul(1)


class RunningMinMax:
    """Running min-max scaler over a whole training run; maps the latest
    value into [0, 1] (0.5 while the range is degenerate)."""

    def __init__(self, lo: float = np.inf, hi: float = -np.inf):
        self.lo = lo
        self.hi = hi

    def normalize_update(self, value: float) -> float:
        self.lo = min(self.lo, value)
        self.hi = max(self.hi, value)
        span = self.hi - self.lo
        if span <= 0.0:
            return 0.5
        return float(np.clip((value - self.lo) / span, 0.0, 1.0))

    def state(self) -> tuple:
        return (self.lo, self.hi)

    def load_state(self, state) -> None:
        self.lo, self.hi = float(state[0]), float(state[1])


@dataclass
class FleetState:
    positions: np.ndarray        # (N, 3) meters
    powers_mw: np.ndarray        # (N,)
    t: int
    violations: np.ndarray       # (N, 3) step counts: collision, boundary, backhaul


@dataclass
class RewardBreakdown:
    """Weighted reward decomposition; totals recombine exactly."""

    coverage: float
    energy: float
    load: float
    rate: float
    penalties: np.ndarray        # (N,)
    weights: tuple               # (w1, w2, w3, w4, w5)
    totals: np.ndarray = field(default=None)

    def recombine(self) -> np.ndarray:
        w1, w2, w3, w4, w5 = self.weights
        shared = w1 * self.coverage + w2 * self.energy + w3 * self.load + w4 * self.rate
        return shared - w5 * self.penalties


def assemble_reward(coverage: float, energy: float, load: float, rate: float,
                    penalties, weights, objective: str = "mmf",
                    pf_term: float = 0.0, w_log_rate: float = 1.0) -> RewardBreakdown:
    """Combine components into per-agent scalars.

    MMF keeps the four metric terms; PF swaps the two fairness terms for the
    normalized sum of logarithmic rates (weighted by w_log_rate).
    """
    penalties = np.asarray(penalties, dtype=float)
    if objective == "mmf":
        bd = RewardBreakdown(coverage, energy, load, rate, penalties,
                             tuple(float(w) for w in weights))
    elif objective == "pf":
        w1, w2, _, _, w5 = weights
        bd = RewardBreakdown(coverage, energy, 0.0, pf_term, penalties,
                             (float(w1), float(w2), 0.0, float(w_log_rate), float(w5)))
    else:
        raise ValueError(f"unknown objective {objective!r}")
    bd.totals = bd.recombine()
    return bd


def compute_penalty(positions, clamped, backhaul_snr_db, params: EnvParams) -> np.ndarray:
    """Per-agent penalty: collision pair counts, boundary-clamp indicator,
    weak-backhaul indicator."""
    positions = np.asarray(positions, dtype=float)
    diff = positions[:, None, :] - positions[None, :, :]
    dist = np.sqrt(np.sum(diff * diff, axis=2))
    close = dist < params.min_separation_m
    np.fill_diagonal(close, False)
    collisions = close.sum(axis=1).astype(float)
    weak_bh = (np.asarray(backhaul_snr_db, dtype=float)
               < params.backhaul_threshold_db).astype(float)
    return (params.pen_collision * collisions
            + params.pen_boundary * np.asarray(clamped, dtype=float)
            + params.pen_backhaul * weak_bh)


class FleetEnv:
    """Episodic fleet environment over a fixed scenario.

    The running min-max normalizers for the EE and PF reward terms live for
    the whole training run (not per episode); their state is checkpointed by
    the harness.
    """

    def __init__(self, scenario: Scenario, initial_poses, channel: ChannelParams,
                 params: EnvParams, objective: str = "mmf"):
        if objective not in ("mmf", "pf"):
            raise ValueError(f"unknown objective {objective!r}")
        self.scenario = scenario
        self.channel = channel
        self.params = params
        self.objective = objective
        self.n = int(scenario.config.num_uavs)
        self.initial_poses = np.asarray(initial_poses, dtype=float).reshape(self.n, 3)
        self._check_poses(self.initial_poses)

        self.fleet_users = scenario.users[scenario.uav_users]
        self.m_uav = self.fleet_users.shape[0]
        self.gbs_pos = scenario.gbs_position
        self.const = _core.radio_constants(
            channel, params.bandwidth_hz, params.snr_threshold_db,
            params.min_separation_m)

        d = scenario.config.area_side_m
        g = params.hist_grid
        hist, _, _ = np.histogram2d(
            scenario.users[:, 0], scenario.users[:, 1],
            bins=g, range=[[0.0, d], [0.0, d]])
        self.user_hist = (hist / hist.sum()).ravel()

        self.obs_dim = OBS_FIELDS
        self.state_dim = self.n * OBS_FIELDS + g * g + 1
        self.ee_norm = RunningMinMax()
        self.pf_norm = RunningMinMax()

        self._mid_power = 0.5 * (params.power_min_mw + params.power_max_mw)
        self._diag = d * np.sqrt(2.0)
        self.positions = None
        self.powers_mw = None
        self.t = 0
        self.violations = None
        self.gbs_shadow_db = None

    def _check_poses(self, poses: np.ndarray) -> None:
        d = self.scenario.config.area_side_m
        p = self.params
        if np.any(poses[:, 0] < 0) or np.any(poses[:, 0] > d) \
                or np.any(poses[:, 1] < 0) or np.any(poses[:, 1] > d):
            raise ValueError("initial poses outside mission area")
        if np.any(poses[:, 2] < p.alt_min_m) or np.any(poses[:, 2] > p.alt_max_m):
            raise ValueError("initial poses outside altitude corridor")

    @property
    def state(self) -> FleetState:
        return FleetState(self.positions.copy(), self.powers_mw.copy(),
                          self.t, self.violations.copy())

    def set_initial_poses(self, poses) -> None:
        poses = np.asarray(poses, dtype=float).reshape(self.n, 3)
        self._check_poses(poses)
        self.initial_poses = poses

    def reset(self, episode_seed: int = 0):
        p = self.params
        self.positions = self.initial_poses.copy()
        self.powers_mw = np.full(self.n, self._mid_power)
        self.t = 0
        self.violations = np.zeros((self.n, 3), dtype=np.int64)
        # shadow fading frozen per (link, episode) for the terrestrial tier
        rng = np.random.default_rng([int(self.scenario.seed), int(episode_seed)])
        self.gbs_shadow_db = rng.normal(
            0.0, self.channel.shadow_sigma_db, size=self.scenario.gbs_users.size)
        snap = self._snapshot()
        obs = self._observations(snap)
        return obs, self._global_state(obs, snap)

    def _snapshot(self):
        return _core.radio_snapshot(
            np.ascontiguousarray(self.positions),
            np.ascontiguousarray(mw_to_dbm(self.powers_mw)),
            self.fleet_users, self.gbs_pos, self.const)

    def _observations(self, snap) -> np.ndarray:
        (_, _, _, _, loads, _, min_dist, _, bh_snr) = snap
        p = self.params
        d = self.scenario.config.area_side_m
        obs = np.empty((self.n, OBS_FIELDS))
        obs[:, 0] = self.positions[:, 0] / d
        obs[:, 1] = self.positions[:, 1] / d
        obs[:, 2] = (self.positions[:, 2] - p.alt_min_m) / (p.alt_max_m - p.alt_min_m)
        obs[:, 3] = ((self.powers_mw - p.power_min_mw)
                     / (p.power_max_mw - p.power_min_mw))
        obs[:, 4] = np.clip(np.where(np.isfinite(min_dist), min_dist, self._diag)
                            / self._diag, 0.0, 1.0)
        obs[:, 5] = loads / max(self.m_uav, 1)
        obs[:, 6] = self.positions[:, 0] / d
        obs[:, 7] = (d - self.positions[:, 0]) / d
        obs[:, 8] = self.positions[:, 1] / d
        obs[:, 9] = (d - self.positions[:, 1]) / d
        steps = max(self.t, 1)
        obs[:, 10:13] = np.clip(self.violations / steps, 0.0, 1.0)
        obs[:, 13] = np.clip(
            (bh_snr - p.backhaul_threshold_db) / p.backhaul_norm_span_db, 0.0, 1.0)
        return obs

    def _global_state(self, obs: np.ndarray, snap) -> np.ndarray:
        rates = snap[2]
        jfi = jain_index_or(rates[rates > 0.0], 0.0)
        return np.concatenate([obs.ravel(), self.user_hist, [jfi]])

    def _score(self, snap, clamped):
        """Reward components and raw metric values for one slot."""
        (_, _, rates, covered, _, served, _, collisions, bh_snr) = snap
        p = self.params
        cov = float(served.sum()) / max(self.m_uav, 1)
        power_w = float(np.sum(dbm_to_watt(mw_to_dbm(self.powers_mw))))
        ee_raw = float(np.sum(rates[covered])) / (power_w + p.ee_epsilon_w)
        jfi_load = jain_index_or(served.astype(float), 0.0)
        pos_rates = rates[rates > 0.0]
        jfi_rate = jain_index_or(pos_rates, 0.0)

        r_ee = self.ee_norm.normalize_update(ee_raw)
        pf_term = 0.0
        if self.objective == "pf":
            pf_raw = float(np.sum(np.log1p(rates)))
            pf_term = self.pf_norm.normalize_update(pf_raw)

        penalties = (p.pen_collision * collisions.astype(float)
                     + p.pen_boundary * clamped.astype(float)
                     + p.pen_backhaul * (bh_snr < p.backhaul_threshold_db).astype(float))
        weights = (p.w_coverage, p.w_energy, p.w_load, p.w_rate, p.w_penalty)
        breakdown = assemble_reward(cov, r_ee, jfi_load, jfi_rate, penalties,
                                    weights, objective=self.objective,
                                    pf_term=pf_term, w_log_rate=p.w_log_rate)
        info = {
            "ee_sys": ee_raw,
            "coverage_frac": cov,
            "jfi_load": jfi_load,
            "jfi_rate": jfi_rate,
            "rates": rates,
            "covered": covered,
            "served": served,
            "loads": snap[4],
            "backhaul_snr_db": bh_snr,
            "collisions": collisions,
            "clamped": clamped,
        }
        return breakdown, info

    def step(self, actions):
        """Apply one joint action; returns (obs, gstate, breakdown, done, info)."""
        if self.t >= self.params.episode_steps:
            raise RuntimeError("episode is over; call reset()")
        actions = np.asarray(actions, dtype=float).reshape(self.n, 4)
        if not np.all(np.isfinite(actions)):
            raise ValueError("non-finite action")
        actions = np.clip(actions, -1.0, 1.0)
        p = self.params
        d = self.scenario.config.area_side_m

        step_xy = p.max_speed_mps * p.slot_duration_s
        step_z = p.vertical_speed_frac * step_xy
        delta_xy = actions[:, 0:2] * step_xy
        hnorm = np.linalg.norm(delta_xy, axis=1)
        over = hnorm > step_xy
        if np.any(over):
            delta_xy[over] *= (step_xy / hnorm[over])[:, None]
        delta_z = actions[:, 2] * step_z

        raw = self.positions.copy()
        raw[:, 0:2] += delta_xy
        raw[:, 2] += delta_z
        clipped = np.clip(raw, [0.0, 0.0, p.alt_min_m], [d, d, p.alt_max_m])
        clamped = np.any(clipped != raw, axis=1)
        self.positions = clipped
        self.powers_mw = np.clip(self.powers_mw + p.power_step_mw * actions[:, 3],
                                 p.power_min_mw, p.power_max_mw)

        snap = self._snapshot()
        breakdown, info = self._score(snap, clamped)

        self.violations[:, 0] += (snap[7] > 0).astype(np.int64)
        self.violations[:, 1] += clamped.astype(np.int64)
        self.violations[:, 2] += (snap[8] < p.backhaul_threshold_db).astype(np.int64)

        self.t += 1
        done = self.t >= p.episode_steps
        obs = self._observations(snap)
        gstate = self._global_state(obs, snap)
        return obs, gstate, breakdown, done, info
