import numpy as np
import pytest

from orchid.config import ChannelParams, EnvParams, RunConfig, WorldConfig
from orchid.scenario import generate_scenario


@pytest.fixture
def channel():
    return ChannelParams()


@pytest.fixture
def small_world():
    return WorldConfig(num_users=20, num_uavs=3, num_clusters=3, seed=7)


@pytest.fixture
def small_scenario(small_world):
    return generate_scenario(small_world)


@pytest.fixture
def small_config(small_world):
    cfg = RunConfig()
    cfg.world = small_world
    return cfg


@pytest.fixture
def default_scenario():
    return generate_scenario(WorldConfig())


def make_env(scenario, cfg, poses=None, objective="mmf"):
    from orchid.env import FleetEnv
    if poses is None:
        n = scenario.config.num_uavs
        rng = np.random.default_rng(123)
        xy = rng.uniform(100, scenario.config.area_side_m - 100, size=(n, 2))
        poses = np.column_stack([xy, np.full(n, cfg.env.alt_init_m)])
    return FleetEnv(scenario, poses, cfg.channel, cfg.env, objective=objective)


def measure_update_variance(policy, opt, dataset, n_steps, minibatch, rng,
                            clip_eps=0.2, entropy_coef=0.01):
    """Empirical variance of actor update vectors with a frozen policy.

    Gradients are always evaluated at the frozen parameters on resampled
    minibatches; the optimizer's moments advance with each step but the
    updates are recorded rather than applied, so the gradient distribution
    stays stationary while the optimizer behaves as in live training.
    """
    from orchid.learn import actor_loss_and_grads
    from orchid.nets import flat_params

    obs, actions, logp_old, adv = dataset
    size = obs.shape[0]
    updates = []
    for _ in range(n_steps):
        idx = rng.choice(size, size=minibatch, replace=False)
        _, grads, _ = actor_loss_and_grads(
            policy, obs[idx], actions[idx], logp_old[idx], adv[idx],
            clip_eps=clip_eps, entropy_coef=entropy_coef)
        updates.append(flat_params(opt.update_of(grads)))
        # advance the moments with the same gradient stream
        opt.m = [opt.beta1 * m + (1 - opt.beta1) * g
                 for m, g in zip(opt.m, grads)]
        opt.v = [opt.beta2 * v + (1 - opt.beta2) * g * g
                 for v, g in zip(opt.v, grads)]
        opt.t += 1
    return float(np.var(np.stack(updates)))


def make_actor_dataset(policy, size, seed):
    rng = np.random.default_rng(seed)
    obs = rng.normal(size=(size, policy.obs_dim))
    actions, logp = policy.sample(obs, rng)
    adv = rng.normal(size=size) + 0.5
    return obs, actions, logp, adv
