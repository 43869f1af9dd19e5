"""MAPPO under centralized training with decentralized execution.

The shared actor is a tanh-squashed Gaussian over the 4D action (dx, dy,
dz, dP); the centralized critic scores the concatenated global state. Both
are plain MLPs with hand-derived reverse-mode gradients so the optimizer
moments stay inspectable. Advantages come from generalized advantage
estimation; the actor maximizes the clipped surrogate with an entropy bonus.
"""

from __future__ import annotations

import numpy as np

from .config import LearnParams
from .nets import Adam, Mlp

LOG_2PI = np.log(2.0 * np.pi)
ATANH_CLIP = 1.0 - 1e-6


class NumericAbort(RuntimeError):
    """Raised when a loss or gradient goes non-finite (CLI exit code 3)."""


def _atanh(x: np.ndarray) -> np.ndarray:
    return 0.5 * (np.log1p(x) - np.log1p(-x))


def _softplus(x: np.ndarray) -> np.ndarray:
    return np.logaddexp(0.0, x)


def squash_correction(u: np.ndarray) -> np.ndarray:
    """log(1 - tanh(u)^2) per component, numerically stable for any u."""
    return 2.0 * (np.log(2.0) - u - _softplus(-2.0 * u))


class GaussianTanhPolicy:
    """Shared actor head: MLP mean + state-independent log-std vector."""

    def __init__(self, obs_dim: int, act_dim: int, hidden,
                 rng: np.random.Generator, log_std_init: float = -0.5,
                 log_std_min: float = -5.0, log_std_max: float = 2.0):
        self.obs_dim = int(obs_dim)
        self.act_dim = int(act_dim)
        self.net = Mlp([obs_dim, *hidden, act_dim], rng, out_gain=0.01)
        self.log_std = np.full(act_dim, float(log_std_init))
        self.log_std_min = float(log_std_min)
        self.log_std_max = float(log_std_max)
        self.params = self.net.params + [self.log_std]

    def effective_log_std(self) -> np.ndarray:
        return np.clip(self.log_std, self.log_std_min, self.log_std_max)

    def forward(self, obs):
        """Mean and log-std of the pre-squash Gaussian for a batch."""
        mean, _ = self.net.forward(obs)
        return mean, self.effective_log_std()

    def sample(self, obs, rng: np.random.Generator):
        """Draw squashed actions and their log-probabilities."""
        mean, cache = self.net.forward(obs)
        ls = self.effective_log_std()
        sigma = np.exp(ls)
        u = mean + sigma * rng.standard_normal(mean.shape)
        actions = np.tanh(u)
        z = (u - mean) / sigma
        logp = np.sum(-0.5 * z * z - ls - 0.5 * LOG_2PI - squash_correction(u),
                      axis=1)
        return actions, logp

    def log_prob(self, obs, actions):
        """Log-probability of stored squashed actions under current params."""
        mean, _ = self.net.forward(obs)
        ls = self.effective_log_std()
        sigma = np.exp(ls)
        u = _atanh(np.clip(actions, -ATANH_CLIP, ATANH_CLIP))
        z = (u - mean) / sigma
        return np.sum(-0.5 * z * z - ls - 0.5 * LOG_2PI - squash_correction(u),
                      axis=1)

    def act_deterministic(self, obs) -> np.ndarray:
        mean, _ = self.net.forward(obs)
        return np.tanh(mean)

    def entropy(self) -> float:
        """Entropy of the pre-squash Gaussian (the bonus used in the loss)."""
        ls = self.effective_log_std()
        return float(np.sum(ls) + 0.5 * self.act_dim * (1.0 + LOG_2PI))


class Critic:
    """Centralized value head over the global state."""

    def __init__(self, state_dim: int, hidden, rng: np.random.Generator):
        self.state_dim = int(state_dim)
        self.net = Mlp([state_dim, *hidden, 1], rng, out_gain=1.0)
        self.params = self.net.params

    def value(self, states) -> np.ndarray:
        out, _ = self.net.forward(states)
        return out.ravel()


def gae(rewards, values, gamma: float, lam: float):
    """Generalized advantage estimation over one trajectory.

    values has length T+1 (bootstrap value last). Returns (advantages,
    returns) with returns = advantages + values[:T].
    """
    rewards = np.asarray(rewards, dtype=float)
    values = np.asarray(values, dtype=float)
    if not (0.0 <= gamma < 1.0):
        raise ValueError("gamma must be in [0, 1)")
    if not (0.0 <= lam <= 1.0):
        raise ValueError("lambda must be in [0, 1]")
    t_len = rewards.shape[0]
    if values.shape[0] != t_len + 1:
        raise ValueError("values must have length T+1")
    adv = np.empty(t_len)
    running = 0.0
    for t in range(t_len - 1, -1, -1):
        delta = rewards[t] + gamma * values[t + 1] - values[t]
        running = delta + gamma * lam * running
        adv[t] = running
    return adv, adv + values[:t_len]


def actor_loss_and_grads(policy: GaussianTanhPolicy, obs, actions, logp_old,
                         advantages, clip_eps: float, entropy_coef: float):
    """Clipped-surrogate-plus-entropy loss with analytic gradients.

    Returns (loss, grads, stats); grads align with ``policy.params``.
    """
    obs = np.asarray(obs, dtype=float)
    actions = np.asarray(actions, dtype=float)
    logp_old = np.asarray(logp_old, dtype=float)
    adv = np.asarray(advantages, dtype=float)
    batch = obs.shape[0]

    mean, cache = policy.net.forward(obs)
    ls = policy.effective_log_std()
    ls_open = ((policy.log_std > policy.log_std_min)
               & (policy.log_std < policy.log_std_max)).astype(float)
    sigma = np.exp(ls)
    u = _atanh(np.clip(actions, -ATANH_CLIP, ATANH_CLIP))
    z = (u - mean) / sigma
    logp = np.sum(-0.5 * z * z - ls - 0.5 * LOG_2PI - squash_correction(u),
                  axis=1)

    ratio = np.exp(logp - logp_old)
    s_plain = ratio * adv
    s_clip = np.clip(ratio, 1.0 - clip_eps, 1.0 + clip_eps) * adv
    surrogate = np.minimum(s_plain, s_clip)
    entropy = np.sum(ls) + 0.5 * policy.act_dim * (1.0 + LOG_2PI)
    loss = -float(np.mean(surrogate)) - entropy_coef * entropy

    # d surrogate / d rho: the unclipped branch is active unless the ratio
    # has saturated on the advantage's losing side.
    active = np.where(adv >= 0.0, ratio <= 1.0 + clip_eps,
                      ratio >= 1.0 - clip_eps).astype(float)
    dlogp = -(active * adv * ratio) / batch

    dmean = dlogp[:, None] * (z / sigma)
    dlogstd = np.sum(dlogp[:, None] * (z * z - 1.0), axis=0) - entropy_coef
    dlogstd = dlogstd * ls_open

    grads = policy.net.backward(cache, dmean) + [dlogstd]
    stats = {
        "clip_fraction": float(np.mean(1.0 - active)),
        "ratio_mean": float(np.mean(ratio)),
        "entropy": float(entropy),
    }
    return loss, grads, stats


def critic_loss_and_grads(critic: Critic, states, returns):
    """Mean-squared value error and gradients aligned with critic.params."""
    states = np.asarray(states, dtype=float)
    returns = np.asarray(returns, dtype=float)
    batch = states.shape[0]
    out, cache = critic.net.forward(states)
    err = out.ravel() - returns
    loss = float(np.mean(err * err))
    dout = (2.0 / batch) * err[:, None]
    return loss, critic.net.backward(cache, dout)


def normalize_advantages(adv: np.ndarray) -> np.ndarray:
    """Zero-mean unit-variance scaling, skipped for near-constant batches."""
    adv = np.asarray(adv, dtype=float)
    std = adv.std()
    if std < 1e-8:
        return adv - adv.mean()
    return (adv - adv.mean()) / std


def ppo_update(policy: GaussianTanhPolicy, critic: Critic, actor_opt: Adam,
               critic_opt: Adam, batch: dict, cfg: LearnParams,
               rng: np.random.Generator) -> dict:
    """Run the configured epochs of minibatch updates over one rollout batch.

    batch keys: actor_in, critic_in, actions, logp_old, advantages, returns.
    """
    actor_in = batch["actor_in"]
    critic_in = batch["critic_in"]
    actions = batch["actions"]
    logp_old = batch["logp_old"]
    returns = batch["returns"]
    adv = normalize_advantages(batch["advantages"])
    size = actor_in.shape[0]

    stats = {"actor_loss": 0.0, "critic_loss": 0.0, "clip_fraction": 0.0,
             "n_minibatches": 0}
    for _ in range(cfg.epochs):
        perm = rng.permutation(size)
        for start in range(0, size, cfg.minibatch_size):
            idx = perm[start:start + cfg.minibatch_size]
            a_loss, a_grads, a_stats = actor_loss_and_grads(
                policy, actor_in[idx], actions[idx], logp_old[idx], adv[idx],
                cfg.clip_eps, cfg.entropy_coef)
            c_loss, c_grads = critic_loss_and_grads(
                critic, critic_in[idx], returns[idx])
            if not (np.isfinite(a_loss) and np.isfinite(c_loss)):
                raise NumericAbort(
                    f"non-finite loss (actor={a_loss}, critic={c_loss})")
            actor_opt.step(policy.params, a_grads)
            critic_opt.step(critic.params, c_grads)
            stats["actor_loss"] += a_loss
            stats["critic_loss"] += c_loss
            stats["clip_fraction"] += a_stats["clip_fraction"]
            stats["n_minibatches"] += 1
    k = max(stats["n_minibatches"], 1)
    stats["actor_loss"] /= k
    stats["critic_loss"] /= k
    stats["clip_fraction"] /= k
    return stats
