"""Configuration dataclasses and TOML/JSON run-config loading.

Defaults follow the standard simulation setup: 1x1 km area, 50 users in 5
hotspots, 6 UAVs in the [80, 120] m corridor, 2.4 GHz sub-bands of 10 MHz,
asymmetric Adam learning rates (1e-4 actor / 1e-3 critic) and a one-shot
reset-and-finetune controller with window 50 and decay 0.1.
"""

from __future__ import annotations

import dataclasses
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence

try:
    import tomllib  # py311+
except ModuleNotFoundError:  # pragma: no cover
    import tomli as tomllib


class ConfigError(ValueError):
    """Invalid or inconsistent run configuration (CLI exit code 2)."""


OBJECTIVES = ("mmf", "pf")
ABLATIONS = ("none", "no_phase1", "no_rnf")
BASELINES = ("static_random", "static_kmeans")


@dataclass
class WorldConfig:
    """Scenario geometry: area, user population, hotspot process, GBS pose."""

    area_side_m: float = 1000.0
    num_users: int = 50
    num_uavs: int = 6
    num_clusters: int = 5
    scatter_sigma_m: float = 50.0
    gbs_position_m: tuple[float, float, float] = (500.0, 500.0, 30.0)
    gbs_power_mw: float = 1000.0
    seed: int = 42

    def validate(self) -> None:
        for name in ("area_side_m", "scatter_sigma_m", "gbs_power_mw"):
            v = getattr(self, name)
            if not math.isfinite(v):
                raise ConfigError(f"world.{name} must be finite, got {v}")
        if self.area_side_m <= 0:
            raise ConfigError("world.area_side_m must be positive")
        if self.scatter_sigma_m <= 0:
            raise ConfigError("world.scatter_sigma_m must be positive")
        if self.num_clusters < 1:
            raise ConfigError("world.num_clusters must be >= 1")
        if self.num_users < self.num_clusters:
            raise ConfigError("world.num_users must be >= num_clusters")
        if self.num_uavs < 1:
            raise ConfigError("world.num_uavs must be >= 1")
        if len(self.gbs_position_m) != 3 or not all(
            math.isfinite(c) for c in self.gbs_position_m
        ):
            raise ConfigError("world.gbs_position_m must be a finite 3-vector")


@dataclass
class ChannelParams:
    """Air-to-ground probabilistic channel plus terrestrial log-distance model.

    S-curve and excess-loss defaults are the common urban set (9.61, 0.16,
    1 dB, 20 dB); the terrestrial exponent defaults to 3.5 with 8 dB
    log-normal shadowing.
    """

    s_curve_a: float = 9.61
    s_curve_b: float = 0.16
    excess_loss_los_db: float = 1.0
    excess_loss_nlos_db: float = 20.0
    carrier_hz: float = 2.4e9
    lightspeed_mps: float = 299792458.0
    pathloss_exponent: float = 3.5
    shadow_sigma_db: float = 8.0
    tx_gain_db: float = 0.0
    rx_gain_db: float = 0.0
    noise_density_dbm_hz: float = -174.0

    def validate(self) -> None:
        if self.s_curve_b <= 0:
            raise ConfigError("channel.s_curve_b must be positive")
        if not (0.0 <= self.excess_loss_los_db <= self.excess_loss_nlos_db):
            raise ConfigError(
                "channel excess losses must satisfy 0 <= los <= nlos")
        if self.carrier_hz <= 0:
            raise ConfigError("channel.carrier_hz must be positive")
        if not (3.0 <= self.pathloss_exponent <= 4.5):
            raise ConfigError("channel.pathloss_exponent outside [3.0, 4.5]")


@dataclass
class EnvParams:
    """Fleet kinematics, radio resource constants, and reward weights."""

    alt_min_m: float = 80.0
    alt_max_m: float = 120.0
    alt_init_m: float = 100.0
    max_speed_mps: float = 5.0
    slot_duration_s: float = 1.0
    episode_steps: int = 100
    vertical_speed_frac: float = 0.2
    power_min_mw: float = 100.0
    power_max_mw: float = 200.0
    power_step_mw: float = 10.0
    min_separation_m: float = 50.0
    bandwidth_hz: float = 10e6
    snr_threshold_db: float = 0.0
    backhaul_threshold_db: float = 0.0
    backhaul_norm_span_db: float = 60.0
    w_coverage: float = 1.0
    w_energy: float = 1.0
    w_load: float = 0.5
    w_rate: float = 1.0
    w_penalty: float = 1.0
    w_log_rate: float = 1.0
    pen_collision: float = 1.0
    pen_boundary: float = 0.5
    pen_backhaul: float = 0.5
    ee_epsilon_w: float = 1e-9
    hist_grid: int = 4

    def validate(self) -> None:
        if not (0 < self.alt_min_m <= self.alt_init_m <= self.alt_max_m):
            raise ConfigError("env altitude corridor must satisfy "
                              "0 < alt_min <= alt_init <= alt_max")
        if self.max_speed_mps <= 0 or self.slot_duration_s <= 0:
            raise ConfigError("env speed and slot duration must be positive")
        if self.episode_steps < 1:
            raise ConfigError("env.episode_steps must be >= 1")
        if not (0 < self.power_min_mw <= self.power_max_mw):
            raise ConfigError("env power range invalid")
        if self.bandwidth_hz <= 0:
            raise ConfigError("env.bandwidth_hz must be positive")
        for name in ("w_coverage", "w_energy", "w_load", "w_rate",
                     "w_penalty", "w_log_rate"):
            if getattr(self, name) < 0:
                raise ConfigError(f"env.{name} must be non-negative")
        if self.hist_grid < 1:
            raise ConfigError("env.hist_grid must be >= 1")


@dataclass
class LearnParams:
    """MAPPO hyperparameters: network widths, Adam, GAE, clipping."""

    hidden_sizes: tuple[int, ...] = (256, 256, 256)
    actor_lr: float = 1e-4
    critic_lr: float = 1e-3
    discount: float = 0.99
    gae_lambda: float = 0.95
    clip_eps: float = 0.2
    entropy_coef: float = 0.01
    epochs: int = 4
    minibatch_size: int = 128
    buffer_episodes: int = 8
    log_std_init: float = -0.5
    log_std_min: float = -5.0
    log_std_max: float = 2.0
    adam_beta1: float = 0.9
    adam_beta2: float = 0.999
    adam_eps: float = 1e-8

    def validate(self) -> None:
        if not (0.0 <= self.discount < 1.0):
            raise ConfigError("learn.discount must be in [0, 1)")
        if not (0.0 <= self.gae_lambda <= 1.0):
            raise ConfigError("learn.gae_lambda must be in [0, 1]")
        if self.clip_eps <= 0:
            raise ConfigError("learn.clip_eps must be positive")
        if self.actor_lr <= 0 or self.critic_lr <= 0:
            raise ConfigError("learn rates must be positive")
        if min(self.epochs, self.minibatch_size, self.buffer_episodes) < 1:
            raise ConfigError("learn epochs/minibatch/buffer must be >= 1")
        if not (self.log_std_min <= self.log_std_init <= self.log_std_max):
            raise ConfigError("learn.log_std_init outside its bounds")


@dataclass
class RnfParams:
    """Reset-and-finetune controller: plateau window, tolerance, decay."""

    window: int = 50
    tolerance: float = 0.02
    decay: float = 0.1
    min_episode: int = 100
    force_trigger_at: Optional[int] = None

    def validate(self) -> None:
        if self.window < 1:
            raise ConfigError("rnf.window must be >= 1")
        if not (0.0 < self.decay < 1.0):
            raise ConfigError("rnf.decay must be in (0, 1)")
        if self.tolerance < 0:
            raise ConfigError("rnf.tolerance must be non-negative")


@dataclass
class RunConfig:
    """Top-level experiment description consumed by the training harness."""

    scenario_path: str = ""
    objective: str = "mmf"
    ablation: str = "none"
    episodes: int = 700
    seeds: tuple[int, ...] = (0, 1, 2, 3, 4)
    checkpoint_every: int = 100
    kmeans_restarts: int = 5
    baseline_ref_episodes: int = 20
    trace_steps: bool = False
    world: WorldConfig = field(default_factory=WorldConfig)
    channel: ChannelParams = field(default_factory=ChannelParams)
    env: EnvParams = field(default_factory=EnvParams)
    learn: LearnParams = field(default_factory=LearnParams)
    rnf: RnfParams = field(default_factory=RnfParams)

    def validate(self) -> None:
        if self.objective not in OBJECTIVES:
            raise ConfigError(f"run.objective must be one of {OBJECTIVES}")
        if self.ablation not in ABLATIONS:
            raise ConfigError(f"run.ablation must be one of {ABLATIONS}")
        if self.episodes < 1:
            raise ConfigError("run.episodes must be >= 1")
        if len(self.seeds) == 0:
            raise ConfigError("run.seeds must be non-empty")
        self.world.validate()
        self.channel.validate()
        self.env.validate()
        self.learn.validate()
        self.rnf.validate()


_SECTION_TYPES = {
    "world": WorldConfig,
    "channel": ChannelParams,
    "env": EnvParams,
    "learn": LearnParams,
    "rnf": RnfParams,
}

_TUPLE_FIELDS = {"gbs_position_m", "hidden_sizes", "seeds"}


def _build_section(cls, data: dict):
    known = {f.name for f in dataclasses.fields(cls)}
    unknown = set(data) - known
    if unknown:
        raise ConfigError(
            f"unknown {cls.__name__} keys: {sorted(unknown)}")
    kwargs = {
        k: tuple(v) if k in _TUPLE_FIELDS and isinstance(v, (list, tuple)) else v
        for k, v in data.items()
    }
    try:
        return cls(**kwargs)
    except TypeError as exc:
        raise ConfigError(str(exc)) from exc


def config_from_dict(data: dict) -> RunConfig:
    data = dict(data)
    sections = {}
    for name, cls in _SECTION_TYPES.items():
        raw = data.pop(name, {})
        if not isinstance(raw, dict):
            raise ConfigError(f"section '{name}' must be a table/object")
        sections[name] = _build_section(cls, raw)
    run_raw = data.pop("run", {})
    if not isinstance(run_raw, dict):
        raise ConfigError("section 'run' must be a table/object")
    if data:
        raise ConfigError(f"unknown top-level sections: {sorted(data)}")
    cfg = _build_section(RunConfig, run_raw)
    for name, value in sections.items():
        setattr(cfg, name, value)
    cfg.validate()
    return cfg


def config_to_dict(cfg: RunConfig) -> dict:
    out = {"run": {}}
    for f in dataclasses.fields(RunConfig):
        if f.name in _SECTION_TYPES:
            out[f.name] = dataclasses.asdict(getattr(cfg, f.name))
        else:
            v = getattr(cfg, f.name)
            out["run"][f.name] = list(v) if isinstance(v, tuple) else v
    for section in out.values():
        for k, v in section.items():
            if isinstance(v, tuple):
                section[k] = list(v)
    return out


def load_run_config(path: str | Path) -> RunConfig:
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"config file not found: {path}")
    if path.suffix.lower() == ".toml":
        with open(path, "rb") as fh:
            data = tomllib.load(fh)
    elif path.suffix.lower() == ".json":
        with open(path, "r", encoding="utf-8") as fh:
            data = json.load(fh)
    else:
        raise ConfigError(f"config must be .toml or .json, got {path.suffix}")
    return config_from_dict(data)


def save_run_config(cfg: RunConfig, path: str | Path) -> None:
    """JSON round-trip writer (TOML is read-only input)."""
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(config_to_dict(cfg), fh, indent=2, sort_keys=True)
        fh.write("\n")


def world_from_dict(data: dict) -> WorldConfig:
    cfg = _build_section(WorldConfig, data)
    cfg.validate()
    return cfg
