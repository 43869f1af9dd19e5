"""Experiment orchestration.

Training follows the two-stage procedure: cluster-based initial poses (or
random feasible poses under the no_phase1 ablation), then the episode loop
with PPO updates every full rollout buffer and the reset-and-finetune check
at every episode boundary. Every run directory gets a fixed-schema CSV log,
a manifest, and checkpoints sufficient to resume bit-identically.

All randomness is derived from counters (run seed, episode index, update
index), never from shared global state, so seeds are isolated and resumed
runs replay the exact stream.
"""

from __future__ import annotations

import csv
import json
from pathlib import Path

import numpy as np

from . import phase1
from .config import ConfigError, RunConfig
from .env import FleetEnv
from .learn import Critic, GaussianTanhPolicy, NumericAbort, gae, ppo_update
from .nets import Adam
from .rnf import RnfState, apply_reset, check_trigger, update_window
from .scenario import Scenario, load_scenario

LOG_SCHEMA_VERSION = 1
LOG_COLUMNS = ("seed", "episode", "total_reward", "nee", "jfi_load",
               "jfi_rate", "coverage_pct", "eta_actor", "eta_critic",
               "rnf_triggered")
ACT_DIM = 4


def _fmt(value) -> str:
    if isinstance(value, float):
        return repr(value)
    return str(value)


class RunLogWriter:
    def __init__(self, path: Path, append: bool = False):
        self.path = Path(path)
        mode = "a" if append and self.path.exists() else "w"
        self._fh = open(self.path, mode, newline="", encoding="utf-8")
        self._writer = csv.writer(self._fh)
        if mode == "w":
            self._writer.writerow(LOG_COLUMNS)

    def write(self, row: dict) -> None:
        self._writer.writerow([_fmt(row[c]) for c in LOG_COLUMNS])
        self._fh.flush()

    def close(self) -> None:
        self._fh.close()


def read_runlog(path) -> list[dict]:
    with open(path, newline="", encoding="utf-8") as fh:
        return [dict(r) for r in csv.DictReader(fh)]


# ---------------------------------------------------------------------------
# rollouts

def _one_hot(n: int) -> np.ndarray:
    return np.eye(n)


def collect_episode(env: FleetEnv, policy, episode_index: int,
                    sample_stream=None, deterministic: bool = False,
                    trace_writer=None):
    """Roll one episode. policy=None holds position (zero actions).

    Returns (trajectory dict, episode metric dict). The trajectory holds the
    arrays the PPO update needs; metrics are raw (unweighted) aggregates.
    """
    n = env.n
    t_len = env.params.episode_steps
    obs, gstate = env.reset(episode_seed=episode_index)
    eye = _one_hot(n)
    ain_dim = env.obs_dim + n

    traj = {
        "actor_in": np.empty((t_len, n, ain_dim)),
        "actions": np.empty((t_len, n, ACT_DIM)),
        "logp": np.empty((t_len, n)),
        "rewards": np.empty((t_len, n)),
        "gstates": np.empty((t_len + 1, env.state_dim)),
    }
    ee, jl, jr, cov = [], [], [], []
    rng = None
    if policy is not None and not deterministic:
        rng = np.random.default_rng([*sample_stream, episode_index])

    for t in range(t_len):
        ain = np.concatenate([obs, eye], axis=1)
        if policy is None:
            actions = np.zeros((n, ACT_DIM))
            logp = np.zeros(n)
        elif deterministic:
            actions = policy.act_deterministic(ain)
            logp = np.zeros(n)
        else:
            actions, logp = policy.sample(ain, rng)
        traj["actor_in"][t] = ain
        traj["gstates"][t] = gstate
        obs, gstate, breakdown, done, info = env.step(actions)
        traj["actions"][t] = actions
        traj["logp"][t] = logp
        traj["rewards"][t] = breakdown.totals
        ee.append(info["ee_sys"])
        jl.append(info["jfi_load"])
        jr.append(info["jfi_rate"])
        cov.append(info["coverage_frac"])
        if trace_writer is not None:
            trace_writer(episode_index, t, env, breakdown)
    traj["gstates"][t_len] = gstate

    metrics = {
        "total_reward": float(np.mean(np.sum(traj["rewards"], axis=0))),
        "ee_mean": float(np.mean(ee)),
        "jfi_load": float(np.mean(jl)),
        "jfi_rate": float(np.mean(jr)),
        "coverage_pct": float(np.mean(cov)) * 100.0,
    }
    return traj, metrics


def baseline_reference_ee(scenario: Scenario, config: RunConfig) -> float:
    """Mean system EE of the static-random deployment, the NEE denominator.

    Derived from the scenario seed only, so every method evaluated on a
    scenario shares the same reference.
    """
    env = FleetEnv(scenario, _random_poses(scenario, config, [scenario.seed, 9090, 0]),
                   config.channel, config.env, objective="mmf")
    ee_values = []
    for ep in range(config.baseline_ref_episodes):
        env.set_initial_poses(_random_poses(scenario, config,
                                            [scenario.seed, 9090, ep]))
        _, metrics = collect_episode(env, None, episode_index=ep)
        ee_values.append(metrics["ee_mean"])
    return float(np.mean(ee_values))


def _random_poses(scenario: Scenario, config: RunConfig, stream) -> np.ndarray:
    rng = np.random.default_rng(stream)
    return phase1.random_feasible_poses(
        scenario.config.num_uavs, scenario.config.area_side_m,
        config.env.alt_min_m, config.env.alt_max_m, rng)


def phase1_poses(scenario: Scenario, config: RunConfig, stream):
    rng = np.random.default_rng(stream)
    poses, result = phase1.initial_poses(
        scenario.users, scenario.config.num_uavs, scenario.gbs_position,
        config.env.alt_init_m, rng, restarts=config.kmeans_restarts)
    return poses, result


# ---------------------------------------------------------------------------
# checkpoints

def save_checkpoint(path, policy: GaussianTanhPolicy, critic: Critic,
                    actor_opt: Adam, critic_opt: Adam, meta: dict,
                    buffer: list) -> None:
    arrays = {}
    for i, p in enumerate(policy.params):
        arrays[f"actor_p_{i}"] = p
        arrays[f"actor_m_{i}"] = actor_opt.m[i]
        arrays[f"actor_v_{i}"] = actor_opt.v[i]
    for i, p in enumerate(critic.params):
        arrays[f"critic_p_{i}"] = p
        arrays[f"critic_m_{i}"] = critic_opt.m[i]
        arrays[f"critic_v_{i}"] = critic_opt.v[i]
    for j, ep in enumerate(buffer):
        for key, arr in ep.items():
            arrays[f"buf{j}_{key}"] = arr
    meta = dict(meta)
    meta["n_actor_params"] = len(policy.params)
    meta["n_critic_params"] = len(critic.params)
    meta["n_buffer_episodes"] = len(buffer)
    meta["actor_opt"] = {"t": actor_opt.t, "lr": actor_opt.lr,
                         "lr_init": actor_opt.lr_init}
    meta["critic_opt"] = {"t": critic_opt.t, "lr": critic_opt.lr,
                          "lr_init": critic_opt.lr_init}
    arrays["meta_json"] = np.array(json.dumps(meta))
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    np.savez(path, **arrays)


def load_checkpoint(path) -> dict:
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"checkpoint not found: {path}")
    with np.load(path, allow_pickle=False) as data:
        meta = json.loads(str(data["meta_json"]))
        out = {"meta": meta}
        out["actor_p"] = [data[f"actor_p_{i}"] for i in range(meta["n_actor_params"])]
        out["actor_m"] = [data[f"actor_m_{i}"] for i in range(meta["n_actor_params"])]
        out["actor_v"] = [data[f"actor_v_{i}"] for i in range(meta["n_actor_params"])]
        out["critic_p"] = [data[f"critic_p_{i}"] for i in range(meta["n_critic_params"])]
        out["critic_m"] = [data[f"critic_m_{i}"] for i in range(meta["n_critic_params"])]
        out["critic_v"] = [data[f"critic_v_{i}"] for i in range(meta["n_critic_params"])]
        buffer = []
        for j in range(meta["n_buffer_episodes"]):
            buffer.append({key: data[f"buf{j}_{key}"] for key in
                           ("actor_in", "actions", "logp", "rewards", "gstates")})
        out["buffer"] = buffer
    return out


def build_learner(meta: dict):
    """Fresh (policy, critic, optimizers) matching the checkpoint metadata."""
    dims = meta["dims"]
    seed = meta["run_seed"]
    policy = GaussianTanhPolicy(
        dims["actor_in"], ACT_DIM, dims["hidden"],
        np.random.default_rng([seed, 11]),
        log_std_init=meta["learn"]["log_std_init"],
        log_std_min=meta["learn"]["log_std_min"],
        log_std_max=meta["learn"]["log_std_max"])
    critic = Critic(dims["state_dim"], dims["hidden"],
                    np.random.default_rng([seed, 12]))
    actor_opt = Adam(policy.params, meta["learn"]["actor_lr"],
                     meta["learn"]["adam_beta1"], meta["learn"]["adam_beta2"],
                     meta["learn"]["adam_eps"])
    critic_opt = Adam(critic.params, meta["learn"]["critic_lr"],
                      meta["learn"]["adam_beta1"], meta["learn"]["adam_beta2"],
                      meta["learn"]["adam_eps"])
    return policy, critic, actor_opt, critic_opt


def restore_learner(ck: dict):
    policy, critic, actor_opt, critic_opt = build_learner(ck["meta"])
    for dst, src in zip(policy.params, ck["actor_p"]):
        dst[:] = src
    for dst, src in zip(critic.params, ck["critic_p"]):
        dst[:] = src
    for opt, tag in ((actor_opt, "actor"), (critic_opt, "critic")):
        for dst, src in zip(opt.m, ck[f"{tag}_m"]):
            dst[:] = src
        for dst, src in zip(opt.v, ck[f"{tag}_v"]):
            dst[:] = src
        opt.t = int(ck["meta"][f"{tag}_opt"]["t"])
        opt.lr = float(ck["meta"][f"{tag}_opt"]["lr"])
        opt.lr_init = float(ck["meta"][f"{tag}_opt"]["lr_init"])
    return policy, critic, actor_opt, critic_opt


# ---------------------------------------------------------------------------
# training

def _method_name(config: RunConfig) -> str:
    name = f"orchid_{config.objective}"
    if config.ablation != "none":
        name += f"_{config.ablation}"
    return name


def _update_batch(buffer: list, critic: Critic, cfg) -> dict:
    """Assemble the PPO batch: GAE per (episode, agent) with shared values."""
    n = buffer[0]["rewards"].shape[1]
    t_len = buffer[0]["rewards"].shape[0]
    gstates = np.stack([ep["gstates"] for ep in buffer])      # (E, T+1, S)
    e_count = gstates.shape[0]
    values = critic.value(gstates.reshape(-1, gstates.shape[2]))
    values = values.reshape(e_count, t_len + 1)

    adv_all = np.empty((e_count, t_len, n))
    ret_all = np.empty((e_count, t_len, n))
    for e in range(e_count):
        for agent in range(n):
            adv, ret = gae(buffer[e]["rewards"][:, agent], values[e],
                           cfg.discount, cfg.gae_lambda)
            adv_all[e, :, agent] = adv
            ret_all[e, :, agent] = ret

    actor_in = np.concatenate([ep["actor_in"].reshape(t_len * n, -1)
                               for ep in buffer])
    actions = np.concatenate([ep["actions"].reshape(t_len * n, -1)
                              for ep in buffer])
    logp_old = np.concatenate([ep["logp"].reshape(-1) for ep in buffer])
    critic_in = np.concatenate([np.repeat(ep["gstates"][:t_len], n, axis=0)
                                for ep in buffer])
    return {
        "actor_in": actor_in,
        "critic_in": critic_in,
        "actions": actions,
        "logp_old": logp_old,
        "advantages": adv_all.reshape(-1),
        "returns": ret_all.reshape(-1),
    }


def train(config: RunConfig, out_dir, resume: bool = False) -> dict:
    """Train every configured seed sequentially; returns {seed: run_dir}."""
    config.validate()
    scenario = load_scenario(config.scenario_path)
    out_dir = Path(out_dir)
    runs = {}
    for seed in config.seeds:
        run_dir = out_dir / f"seed_{seed}"
        _train_single(config, scenario, int(seed), run_dir, resume=resume)
        runs[int(seed)] = run_dir
    return runs


def _trace_writer(path: Path):
    fh = open(path, "w", newline="", encoding="utf-8")
    writer = csv.writer(fh)
    writer.writerow(["episode", "t", "uav", "x", "y", "z", "power_mw",
                     "r_cov", "r_ee", "r_load", "r_rate", "r_pen", "total"])

    def write(episode, t, env, breakdown):
        for i in range(env.n):
            writer.writerow([
                episode, t, i,
                _fmt(float(env.positions[i, 0])), _fmt(float(env.positions[i, 1])),
                _fmt(float(env.positions[i, 2])), _fmt(float(env.powers_mw[i])),
                _fmt(breakdown.coverage), _fmt(breakdown.energy),
                _fmt(breakdown.load), _fmt(breakdown.rate),
                _fmt(float(breakdown.penalties[i])), _fmt(float(breakdown.totals[i])),
            ])
    write.close = fh.close
    return write


def _train_single(config: RunConfig, scenario: Scenario, seed: int,
                  run_dir: Path, resume: bool = False) -> None:
    run_dir = Path(run_dir)
    ckpt_dir = run_dir / "checkpoints"
    run_dir.mkdir(parents=True, exist_ok=True)
    lp = config.learn
    n = scenario.config.num_uavs

    start_episode = 0
    ck = None
    if resume:
        latest = _latest_checkpoint(ckpt_dir)
        if latest is not None:
            ck = load_checkpoint(latest)
            start_episode = int(ck["meta"]["episode"])

    if ck is None:
        if config.ablation == "no_phase1":
            poses = _random_poses(scenario, config, [seed, scenario.seed, 3])
        else:
            poses, _ = phase1_poses(scenario, config, [seed, scenario.seed, 2])
    else:
        poses = np.asarray(ck["meta"]["initial_poses"], dtype=float)

    env = FleetEnv(scenario, poses, config.channel, config.env,
                   objective=config.objective)
    ref_ee = baseline_reference_ee(scenario, config)

    meta_static = {
        "schema_version": LOG_SCHEMA_VERSION,
        "run_seed": seed,
        "method": _method_name(config),
        "objective": config.objective,
        "ablation": config.ablation,
        "scenario": {"seed": scenario.seed,
                     "num_users": scenario.config.num_users,
                     "num_uavs": n},
        "dims": {"obs_dim": env.obs_dim, "actor_in": env.obs_dim + n,
                 "state_dim": env.state_dim, "hidden": list(lp.hidden_sizes)},
        "learn": {
            "actor_lr": lp.actor_lr, "critic_lr": lp.critic_lr,
            "adam_beta1": lp.adam_beta1, "adam_beta2": lp.adam_beta2,
            "adam_eps": lp.adam_eps, "log_std_init": lp.log_std_init,
            "log_std_min": lp.log_std_min, "log_std_max": lp.log_std_max,
        },
        "initial_poses": poses.tolist(),
        "baseline_ref_ee": ref_ee,
    }

    if ck is None:
        policy, critic, actor_opt, critic_opt = build_learner(meta_static)
        rnf = RnfState(window=config.rnf.window, tolerance=config.rnf.tolerance,
                       decay=config.rnf.decay, min_episode=config.rnf.min_episode,
                       force_trigger_at=config.rnf.force_trigger_at)
        buffer = []
        update_idx = 0
    else:
        policy, critic, actor_opt, critic_opt = restore_learner(ck)
        m = ck["meta"]
        rnf = RnfState(window=m["rnf"]["window"], tolerance=m["rnf"]["tolerance"],
                       decay=m["rnf"]["decay"], min_episode=m["rnf"]["min_episode"],
                       force_trigger_at=m["rnf"]["force_trigger_at"])
        rnf.history = list(m["rnf"]["history"])
        rnf.triggered = bool(m["rnf"]["triggered"])
        rnf.trigger_episode = m["rnf"]["trigger_episode"]
        env.ee_norm.load_state(m["ee_norm"])
        env.pf_norm.load_state(m["pf_norm"])
        buffer = ck["buffer"]
        update_idx = int(m["update_idx"])

    if resume and (run_dir / "runlog.csv").exists() and start_episode > 0:
        rows = [r for r in read_runlog(run_dir / "runlog.csv")
                if int(r["episode"]) <= start_episode]
        writer = RunLogWriter(run_dir / "runlog.csv")
        for r in rows:
            writer.write(r)
    else:
        writer = RunLogWriter(run_dir / "runlog.csv")

    trace = None
    if config.trace_steps:
        trace = _trace_writer(run_dir / "trace.csv")

    def _meta_now(episode: int) -> dict:
        meta = dict(meta_static)
        meta["episode"] = episode
        meta["update_idx"] = update_idx
        meta["rnf"] = {
            "window": rnf.window, "tolerance": rnf.tolerance,
            "decay": rnf.decay, "min_episode": rnf.min_episode,
            "force_trigger_at": rnf.force_trigger_at,
            "history": rnf.history, "triggered": rnf.triggered,
            "trigger_episode": rnf.trigger_episode,
        }
        meta["ee_norm"] = list(env.ee_norm.state())
        meta["pf_norm"] = list(env.pf_norm.state())
        return meta

    try:
        for episode in range(start_episode + 1, config.episodes + 1):
            traj, metrics = collect_episode(
                env, policy, episode_index=episode,
                sample_stream=[seed, 5], trace_writer=trace)
            buffer.append(traj)

            if len(buffer) >= lp.buffer_episodes:
                batch = _update_batch(buffer, critic, lp)
                update_idx += 1
                ppo_update(policy, critic, actor_opt, critic_opt, batch, lp,
                           np.random.default_rng([seed, 17, update_idx]))
                buffer.clear()

            update_window(rnf, metrics["jfi_rate"])
            if config.ablation != "no_rnf" and check_trigger(rnf, episode):
                apply_reset(actor_opt, critic_opt, rnf.decay)
                save_checkpoint(ckpt_dir / f"ep_{episode:06d}.npz", policy,
                                critic, actor_opt, critic_opt,
                                _meta_now(episode), buffer)

            writer.write({
                "seed": seed, "episode": episode,
                "total_reward": metrics["total_reward"],
                "nee": metrics["ee_mean"] / ref_ee,
                "jfi_load": metrics["jfi_load"],
                "jfi_rate": metrics["jfi_rate"],
                "coverage_pct": metrics["coverage_pct"],
                "eta_actor": actor_opt.lr, "eta_critic": critic_opt.lr,
                "rnf_triggered": int(rnf.triggered),
            })

            if episode % config.checkpoint_every == 0:
                save_checkpoint(ckpt_dir / f"ep_{episode:06d}.npz", policy,
                                critic, actor_opt, critic_opt,
                                _meta_now(episode), buffer)

        save_checkpoint(ckpt_dir / "final.npz", policy, critic, actor_opt,
                        critic_opt, _meta_now(config.episodes), buffer)
        manifest = _meta_now(config.episodes)
        manifest["episodes"] = config.episodes
        del manifest["initial_poses"]
        manifest["trigger_episode"] = rnf.trigger_episode
        with open(run_dir / "manifest.json", "w", encoding="utf-8") as fh:
            json.dump(manifest, fh, indent=2, sort_keys=True, default=float)
    finally:
        writer.close()
        if trace is not None:
            trace.close()


def _latest_checkpoint(ckpt_dir: Path):
    ckpt_dir = Path(ckpt_dir)
    if not ckpt_dir.exists():
        return None
    candidates = sorted(ckpt_dir.glob("ep_*.npz"))
    return candidates[-1] if candidates else None


# ---------------------------------------------------------------------------
# baselines and evaluation

def run_baseline(method: str, scenario: Scenario, config: RunConfig,
                 episodes: int, out_dir, seed: int = 0) -> Path:
    """Static deployments: hold pose and mid-range power for every step."""
    if method not in ("static_random", "static_kmeans"):
        raise ConfigError(f"unknown baseline method {method!r}")
    out_dir = Path(out_dir)
    run_dir = out_dir / f"seed_{seed}"
    run_dir.mkdir(parents=True, exist_ok=True)
    ref_ee = baseline_reference_ee(scenario, config)

    if method == "static_kmeans":
        poses, _ = phase1_poses(scenario, config, [seed, scenario.seed, 2])
        env = FleetEnv(scenario, poses, config.channel, config.env)
    else:
        env = FleetEnv(scenario,
                       _random_poses(scenario, config, [seed, scenario.seed, 4, 0]),
                       config.channel, config.env)

    writer = RunLogWriter(run_dir / "runlog.csv")
    try:
        for episode in range(1, episodes + 1):
            if method == "static_random":
                env.set_initial_poses(
                    _random_poses(scenario, config, [seed, scenario.seed, 4, episode]))
            _, metrics = collect_episode(env, None, episode_index=episode)
            writer.write({
                "seed": seed, "episode": episode,
                "total_reward": metrics["total_reward"],
                "nee": metrics["ee_mean"] / ref_ee,
                "jfi_load": metrics["jfi_load"],
                "jfi_rate": metrics["jfi_rate"],
                "coverage_pct": metrics["coverage_pct"],
                "eta_actor": 0.0, "eta_critic": 0.0,
                "rnf_triggered": 0,
            })
    finally:
        writer.close()

    manifest = {
        "schema_version": LOG_SCHEMA_VERSION,
        "method": method, "run_seed": seed,
        "scenario": {"seed": scenario.seed,
                     "num_users": scenario.config.num_users,
                     "num_uavs": scenario.config.num_uavs},
        "episodes": episodes,
        "baseline_ref_ee": ref_ee,
        "trigger_episode": None,
    }
    with open(run_dir / "manifest.json", "w", encoding="utf-8") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True, default=float)
    return run_dir


def evaluate(checkpoint_path, scenario: Scenario, config: RunConfig,
             episodes: int = 20, eval_seed: int = 777) -> dict:
    """Deterministic-mean-action rollouts of a trained policy."""
    ck = load_checkpoint(checkpoint_path)
    meta = ck["meta"]
    fp = meta["scenario"]
    if (fp["seed"] != scenario.seed
            or fp["num_users"] != scenario.config.num_users
            or fp["num_uavs"] != scenario.config.num_uavs):
        raise ConfigError("checkpoint does not match the provided scenario")
    policy, _, _, _ = restore_learner(ck)
    poses = np.asarray(meta["initial_poses"], dtype=float)
    env = FleetEnv(scenario, poses, config.channel, config.env,
                   objective=meta.get("objective", "mmf"))
    if env.obs_dim + env.n != meta["dims"]["actor_in"]:
        raise ConfigError("checkpoint dimensions do not match the scenario")
    ref_ee = meta.get("baseline_ref_ee") or baseline_reference_ee(scenario, config)

    rows = []
    for i in range(episodes):
        _, metrics = collect_episode(env, policy,
                                     episode_index=eval_seed * 1000 + i,
                                     deterministic=True)
        rows.append(metrics)

    def agg(key):
        vals = np.array([r[key] for r in rows])
        return {"mean": float(vals.mean()), "std": float(vals.std())}

    out = {
        "episodes": episodes,
        "coverage_pct": agg("coverage_pct"),
        "nee": {"mean": agg("ee_mean")["mean"] / ref_ee,
                "std": agg("ee_mean")["std"] / ref_ee},
        "jfi_load": agg("jfi_load"),
        "jfi_rate": agg("jfi_rate"),
        "total_reward": agg("total_reward"),
        "rnf_trigger_episode": meta.get("rnf", {}).get("trigger_episode"),
    }
    return out


# ---------------------------------------------------------------------------
# tidy exports for the plotting frontend

TIDY_METRICS = ("total_reward", "nee", "jfi_load", "jfi_rate", "coverage_pct")


def export_figures(runs_root, out_dir) -> dict:
    """Flatten every run directory under runs_root into tidy CSVs.

    runs_tidy.csv: (method, seed, episode, metric, value) long format.
    runs_meta.csv: (method, seed, episodes, trigger_episode).
    """
    runs_root = Path(runs_root)
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    run_dirs = sorted(p.parent for p in runs_root.rglob("manifest.json"))
    if not run_dirs:
        raise ConfigError(f"no run manifests found under {runs_root}")

    tidy_path = out_dir / "runs_tidy.csv"
    meta_path = out_dir / "runs_meta.csv"
    with open(tidy_path, "w", newline="", encoding="utf-8") as tf, \
            open(meta_path, "w", newline="", encoding="utf-8") as mf:
        tw = csv.writer(tf)
        mw = csv.writer(mf)
        tw.writerow(["method", "seed", "episode", "metric", "value"])
        mw.writerow(["method", "seed", "episodes", "trigger_episode"])
        for run_dir in run_dirs:
            with open(run_dir / "manifest.json", encoding="utf-8") as fh:
                manifest = json.load(fh)
            method = manifest["method"]
            seed = manifest["run_seed"]
            trigger = manifest.get("trigger_episode")
            rows = read_runlog(run_dir / "runlog.csv")
            for row in rows:
                for metric in TIDY_METRICS:
                    tw.writerow([method, seed, row["episode"], metric,
                                 row[metric]])
            mw.writerow([method, seed, len(rows),
                         "" if trigger is None else trigger])
    return {"tidy": tidy_path, "meta": meta_path}
