"""Acceptance suite: one test per release criterion, each printing a
[PASS]/[FAIL] line. The desk-scale learning experiment trains ten runs of
300 episodes and dominates the suite's runtime (several minutes on a
desktop CPU); everything else finishes in seconds.
"""

import json
import time
from pathlib import Path

import numpy as np
import pytest

from orchid import channel as ch
from orchid import harness
from orchid.config import ChannelParams, RunConfig, WorldConfig, load_run_config
from orchid.env import FleetEnv
from orchid.learn import (Critic, GaussianTanhPolicy, actor_loss_and_grads,
                          critic_loss_and_grads, gae)
from orchid.metrics import jain_index
from orchid.nets import Adam, flat_params
from orchid.rnf import RnfState, apply_reset, check_trigger, update_window
from orchid.scenario import generate_scenario, save_scenario

from conftest import make_actor_dataset, measure_update_variance
from test_learn import finite_difference, make_actor_batch, max_rel_err

CONFIG_DIR = Path(__file__).resolve().parents[1] / "configs"


def report(name: str, ok: bool, detail: str = "") -> None:
    print(f"[{'PASS' if ok else 'FAIL'}] {name}" + (f" ({detail})" if detail else ""))
    assert ok, f"{name}: {detail}"


# ---------------------------------------------------------------------------
# criterion: channel numerics

def test_channel_numerics():
    t0 = time.perf_counter()
    params = ChannelParams()
    fspl = float(ch.fspl_db(1000.0, params))
    hx = np.sqrt(100.0 ** 2 - 30.0 ** 2)
    gbs = float(ch.gbs_pathloss((0.0, 0.0, 30.0), (hx, 0.0), 0.0, params))
    plos = float(ch.los_probability(9.61, params))
    elapsed = time.perf_counter() - t0
    ok = (abs(fspl - 100.05) <= 0.01 and abs(gbs - 110.05) <= 0.01
          and abs(plos - 0.09425) <= 1e-4 and elapsed < 1.0)
    report("channel numerics", ok,
           f"fspl={fspl:.4f} gbs={gbs:.4f} plos={plos:.6f} in {elapsed:.3f}s")


# ---------------------------------------------------------------------------
# criterion: JFI oracle suite

def test_jfi_oracle_suite():
    ok = (abs(jain_index([4.2] * 9) - 1.0) < 1e-12
          and abs(jain_index([0, 0, 7, 0]) - 0.25) < 1e-12
          and abs(jain_index([3, 1]) - 0.8) < 1e-12)
    rng = np.random.default_rng(123)
    worst = 0.0
    for _ in range(1000):
        n = int(rng.integers(2, 40))
        x = rng.uniform(0.0, 100.0, n)
        j = jain_index(x)
        c = float(rng.uniform(1e-3, 1e3))
        worst = max(worst,
                    abs(jain_index(c * x) - j),
                    abs(jain_index(rng.permutation(x)) - j))
    ok = ok and worst < 1e-12
    report("jfi oracle suite", ok, f"max invariance error {worst:.2e}")


# ---------------------------------------------------------------------------
# criterion: GAE equivalence

def test_gae_equivalence():
    rng = np.random.default_rng(321)
    worst = 0.0
    for _ in range(200):
        t_len = int(rng.integers(1, 11))
        r = rng.normal(size=t_len)
        v = rng.normal(size=t_len + 1)
        gamma = float(rng.uniform(0.5, 0.999))
        adv1, _ = gae(r, v, gamma, 1.0)
        for t in range(t_len):
            brute = sum(gamma ** (k - t) * r[k] for k in range(t, t_len))
            brute += gamma ** (t_len - t) * v[t_len]
            worst = max(worst, abs(adv1[t] - (brute - v[t])))
        adv0, _ = gae(r, v, gamma, 0.0)
        td = r + gamma * v[1:] - v[:-1]
        worst = max(worst, float(np.max(np.abs(adv0 - td))))
    report("gae equivalence", worst < 1e-10, f"max deviation {worst:.2e}")


# ---------------------------------------------------------------------------
# criterion: gradient fidelity

def test_gradient_fidelity():
    t0 = time.perf_counter()
    policy = GaussianTanhPolicy(6, 4, (8, 8), np.random.default_rng(5),
                                log_std_init=-0.5)
    n_actor = flat_params(policy.params).size
    obs, actions, logp_old, adv = make_actor_batch(policy, batch=16, seed=77)
    _, grads, _ = actor_loss_and_grads(policy, obs, actions, logp_old, adv,
                                       clip_eps=0.2, entropy_coef=0.01)
    fd = finite_difference(
        lambda: actor_loss_and_grads(policy, obs, actions, logp_old, adv,
                                     clip_eps=0.2, entropy_coef=0.01)[0],
        policy.params)
    err_actor = max_rel_err(flat_params(grads), fd)

    critic = Critic(12, (8, 8), np.random.default_rng(6))
    n_critic = flat_params(critic.params).size
    rng = np.random.default_rng(7)
    states = rng.normal(size=(16, 12))
    returns = rng.normal(size=16)
    _, cgrads = critic_loss_and_grads(critic, states, returns)
    cfd = finite_difference(
        lambda: critic_loss_and_grads(critic, states, returns)[0],
        critic.params)
    err_critic = max_rel_err(flat_params(cgrads), cfd)
    elapsed = time.perf_counter() - t0

    ok = (n_actor <= 1000 and n_critic <= 1000
          and err_actor < 1e-4 and err_critic < 1e-4 and elapsed < 30.0)
    report("gradient fidelity", ok,
           f"actor({n_actor}p)={err_actor:.2e} critic({n_critic}p)="
           f"{err_critic:.2e} in {elapsed:.1f}s")


# ---------------------------------------------------------------------------
# criterion: reset-and-finetune semantics

def test_rnf_trigger_at_exactly_100():
    st = RnfState(window=50, tolerance=0.02, min_episode=100)
    fired_at = None
    for e in range(1, 151):
        update_window(st, 0.47)
        if check_trigger(st, e) and fired_at is None:
            fired_at = e
    report("rnf trigger episode", fired_at == 100, f"e*={fired_at}")


def test_rnf_post_trigger_checkpoint(tmp_path):
    world = WorldConfig(num_users=16, num_uavs=2, num_clusters=3, seed=5)
    scenario = generate_scenario(world)
    spath = tmp_path / "s.json"
    save_scenario(scenario, spath)
    cfg = RunConfig()
    cfg.world = world
    cfg.scenario_path = str(spath)
    cfg.episodes = 5
    cfg.seeds = (0,)
    cfg.checkpoint_every = 100
    cfg.baseline_ref_episodes = 2
    cfg.kmeans_restarts = 2
    cfg.env.episode_steps = 10
    cfg.learn.hidden_sizes = (8, 8)
    cfg.learn.buffer_episodes = 2
    cfg.learn.minibatch_size = 16
    cfg.rnf.force_trigger_at = 3
    runs = harness.train(cfg, tmp_path / "run")
    ck = harness.load_checkpoint(runs[0] / "checkpoints" / "ep_000003.npz")
    moments_zero = all(np.all(m == 0.0) for m in ck["actor_m"] + ck["actor_v"]
                       + ck["critic_m"] + ck["critic_v"])
    eta_a = ck["meta"]["actor_opt"]["lr"]
    eta_c = ck["meta"]["critic_opt"]["lr"]
    steps_zero = (ck["meta"]["actor_opt"]["t"] == 0
                  and ck["meta"]["critic_opt"]["t"] == 0)
    ok = (moments_zero and steps_zero
          and abs(eta_a - 1e-5) < 1e-12 and abs(eta_c - 1e-4) < 1e-12)
    report("rnf post-trigger checkpoint", ok,
           f"moments_zero={moments_zero} eta_actor={eta_a} eta_critic={eta_c}")


def test_rnf_update_variance_suppression():
    policy = GaussianTanhPolicy(8, 4, (16, 16), np.random.default_rng(0))
    opt = Adam(policy.params, lr=1e-4)
    dataset = make_actor_dataset(policy, size=512, seed=1)
    obs, actions, logp_old, adv = dataset
    warm = np.random.default_rng(2)
    for _ in range(80):
        idx = warm.choice(512, size=64, replace=False)
        _, grads, _ = actor_loss_and_grads(policy, obs[idx], actions[idx],
                                           logp_old[idx], adv[idx], 0.2, 0.01)
        opt.m = [opt.beta1 * m + (1 - opt.beta1) * g for m, g in zip(opt.m, grads)]
        opt.v = [opt.beta2 * v + (1 - opt.beta2) * g * g for v, g in zip(opt.v, grads)]
        opt.t += 1
    var_pre = measure_update_variance(policy, opt, dataset, n_steps=50,
                                      minibatch=64, rng=np.random.default_rng(3))
    apply_reset(opt, Adam([np.zeros(1)], lr=1e-3), decay=0.1)
    var_post = measure_update_variance(policy, opt, dataset, n_steps=50,
                                       minibatch=64, rng=np.random.default_rng(4))
    ratio = var_post / var_pre
    report("rnf variance suppression", ratio <= 0.02, f"ratio={ratio:.4f}")


# ---------------------------------------------------------------------------
# criterion: constraint preservation

def test_constraint_preservation_10k_steps():
    world = WorldConfig(num_users=20, num_uavs=3, num_clusters=3, seed=11)
    scenario = generate_scenario(world)
    cfg = RunConfig()
    cfg.world = world
    env = FleetEnv(scenario,
                   np.array([[100.0, 100.0, 100.0], [500.0, 500.0, 100.0],
                             [900.0, 900.0, 100.0]]),
                   cfg.channel, cfg.env)
    p = cfg.env
    d = world.area_side_m
    rng = np.random.default_rng(99)
    steps = 0
    violations = 0
    mismatches = 0
    while steps < 10_000:
        xy = rng.uniform(0.0, d, size=(3, 2))
        z = rng.uniform(p.alt_min_m, p.alt_max_m, size=(3, 1))
        env.set_initial_poses(np.hstack([xy, z]))
        env.reset(steps)
        for _ in range(p.episode_steps):
            before = env.violations[:, 1].copy()
            _, _, bd, done, info = env.step(rng.uniform(-2.0, 2.0, (3, 4)))
            steps += 1
            if not (np.all((env.positions[:, :2] >= 0.0)
                           & (env.positions[:, :2] <= d))
                    and np.all((env.positions[:, 2] >= p.alt_min_m)
                               & (env.positions[:, 2] <= p.alt_max_m))
                    and np.all((env.powers_mw >= p.power_min_mw)
                               & (env.powers_mw <= p.power_max_mw))):
                violations += 1
            # clamp events and the boundary-penalty indicator must co-occur
            expected = (p.pen_collision * info["collisions"]
                        + p.pen_boundary * info["clamped"]
                        + p.pen_backhaul * (info["backhaul_snr_db"]
                                            < p.backhaul_threshold_db))
            if not np.allclose(bd.penalties, expected, atol=1e-12):
                mismatches += 1
            if not np.array_equal(env.violations[:, 1] - before,
                                  info["clamped"].astype(np.int64)):
                mismatches += 1
            if steps >= 10_000 or done:
                break
    ok = violations == 0 and mismatches == 0
    report("constraint preservation", ok,
           f"{steps} steps, {violations} violations, {mismatches} mismatches")


# ---------------------------------------------------------------------------
# criterion: phase-1 structural floor

def test_phase1_structural_floor():
    scenario = generate_scenario(WorldConfig())  # default seeded scenario
    cfg = RunConfig()
    rng_master = range(20)
    wins = 0
    for seed in rng_master:
        poses_p1, _ = harness.phase1_poses(scenario, cfg, [seed])
        poses_rand = harness._random_poses(scenario, cfg, [seed])
        jfis = []
        for poses in (poses_p1, poses_rand):
            env = FleetEnv(scenario, poses, cfg.channel, cfg.env)
            env.reset(0)
            _, _, _, _, info = env.step(np.zeros((scenario.config.num_uavs, 4)))
            jfis.append(info["jfi_load"])
        wins += jfis[0] > jfis[1]
    report("phase-1 structural floor", wins >= 16, f"{wins}/20 seeds")


# ---------------------------------------------------------------------------
# criterion: desk-scale learning

@pytest.fixture(scope="module")
def desk_runs(tmp_path_factory):
    """Ten desk-scale training runs (MMF with and without the stabilizer)
    plus the static baselines, per the shipped desk configuration."""
    root = tmp_path_factory.mktemp("desk")
    cfg = load_run_config(CONFIG_DIR / "desk_scale.toml")
    scenario = generate_scenario(cfg.world)
    spath = root / "scenario.json"
    save_scenario(scenario, spath)
    cfg.scenario_path = str(spath)

    t0 = time.time()
    harness.train(cfg, root / "rnf")
    cfg_ablate = load_run_config(CONFIG_DIR / "desk_scale.toml")
    cfg_ablate.scenario_path = str(spath)
    cfg_ablate.ablation = "no_rnf"
    harness.train(cfg_ablate, root / "nornf")
    kmeans_nee = {}
    for seed in cfg.seeds:
        run = harness.run_baseline("static_kmeans", scenario, cfg, episodes=20,
                                   out_dir=root / "kmeans", seed=seed)
        rows = harness.read_runlog(run / "runlog.csv")
        kmeans_nee[seed] = float(np.mean([float(r["nee"]) for r in rows]))
    print(f"desk-scale experiment: 10 training runs + baselines in "
          f"{time.time() - t0:.0f}s")
    return {"root": root, "cfg": cfg, "kmeans_nee": kmeans_nee}


def _final50(root, arm, seed, metric):
    rows = harness.read_runlog(root / arm / f"seed_{seed}" / "runlog.csv")
    return np.array([float(r[metric]) for r in rows[-50:]])


def test_desk_scale_nee_beats_baselines(desk_runs):
    root = desk_runs["root"]
    cfg = desk_runs["cfg"]
    beat_random = 0
    beat_kmeans = 0
    details = []
    for seed in cfg.seeds:
        nee = float(np.mean(_final50(root, "rnf", seed, "nee")))
        beat_random += nee > 1.0
        beat_kmeans += nee >= desk_runs["kmeans_nee"][seed]
        details.append(f"s{seed}:{nee:.2f}/km{desk_runs['kmeans_nee'][seed]:.2f}")
    ok = beat_random == 5 and beat_kmeans >= 4
    report("desk-scale NEE vs baselines", ok,
           f">random {beat_random}/5, >=kmeans {beat_kmeans}/5 "
           + " ".join(details))


def test_desk_scale_rnf_narrows_fairness_band(desk_runs):
    root = desk_runs["root"]
    cfg = desk_runs["cfg"]
    wins = 0
    details = []
    for seed in cfg.seeds:
        std_rnf = float(np.std(_final50(root, "rnf", seed, "jfi_rate")))
        std_ablate = float(np.std(_final50(root, "nornf", seed, "jfi_rate")))
        wins += std_rnf <= std_ablate
        with open(root / "rnf" / f"seed_{seed}" / "manifest.json") as fh:
            trig = json.load(fh)["trigger_episode"]
        details.append(f"s{seed}:trig={trig},{std_rnf:.4f}<={std_ablate:.4f}")
    report("desk-scale fairness stabilization", wins >= 4,
           f"{wins}/5 seeds " + " ".join(details))


# ---------------------------------------------------------------------------
# criterion: full-scale run (documented, not CI)

def test_full_scale_documented_not_ci():
    """The 700-episode reference configuration ships as
    configs/full_scale.toml and is documented in the README (expected NEE
    band 2.2-2.4x the random baseline, MMF fairness >= PF). It runs for
    hours on a desktop CPU, so it is exercised manually, never in CI."""
    cfg = load_run_config(CONFIG_DIR / "full_scale.toml")
    assert cfg.episodes == 700 and cfg.world.num_uavs == 6
    report("full-scale config present (manual experiment)", True,
           "see README: reproducing the full-scale comparison")
    pytest.skip("full-scale 700-episode experiment is documented, not CI")
