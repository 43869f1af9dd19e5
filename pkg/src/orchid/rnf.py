"""Reset-and-finetune stability controller.

Tracks the per-episode user-rate fairness index in a sliding window; when
two consecutive window means agree within a relative tolerance (a plateau),
it fires once: both Adam optimizers lose their moment estimates and step
counters, and both learning rates drop to decay * initial rate in the same
episode boundary. Late-stage gradient noise then shrinks with the square of
the decay factor.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .nets import Adam


@dataclass
class RnfState:
    window: int = 50
    tolerance: float = 0.02
    decay: float = 0.1
    min_episode: int = 100
    force_trigger_at: Optional[int] = None
    history: list = field(default_factory=list)
    triggered: bool = False
    trigger_episode: Optional[int] = None

    def __post_init__(self):
        if self.window < 1:
            raise ValueError("window must be >= 1")
        if not (0.0 < self.decay < 1.0):
            raise ValueError("decay must be in (0, 1)")


def update_window(state: RnfState, episode_jfi: float) -> RnfState:
    """Record one episode-level fairness value (1-indexed episodes)."""
    if not np.isfinite(episode_jfi):
        raise ValueError("episode JFI must be finite")
    state.history.append(float(episode_jfi))
    return state


def window_mean(state: RnfState, end_episode: int) -> Optional[float]:
    """Mean of the window ending at ``end_episode``; None during warm-up."""
    if end_episode < state.window or end_episode > len(state.history):
        return None
    lo = end_episode - state.window
    return float(np.mean(state.history[lo:end_episode]))


def check_trigger(state: RnfState, episode: int) -> bool:
    """Plateau test at the given episode; latches on first firing."""
    if state.triggered:
        return False
    if state.force_trigger_at is not None:
        if episode == state.force_trigger_at:
            state.triggered = True
            state.trigger_episode = episode
            return True
        return False
    if episode < max(2 * state.window, state.min_episode):
        return False
    current = window_mean(state, episode)
    previous = window_mean(state, episode - state.window)
    if current is None or previous is None:
        return False
    if abs(current - previous) < state.tolerance * abs(previous):
        state.triggered = True
        state.trigger_episode = episode
        return True
    return False


def apply_reset(actor_opt: Adam, critic_opt: Adam, decay: float) -> None:
    """Synchronized one-shot stabilization: zero both optimizers' moments and
    step counters, and Heaviside-decay both rates from their initial values."""
    actor_opt.reset()
    critic_opt.reset()
    actor_opt.lr = decay * actor_opt.lr_init
    critic_opt.lr = decay * critic_opt.lr_init
