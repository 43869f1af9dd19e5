"""Minimal dense networks with explicit reverse-mode gradients, plus an Adam
optimizer whose moment estimates are plain arrays that can be inspected and
zeroed in place (the reset-and-finetune controller depends on that).
"""

from __future__ import annotations

import numpy as np


def orthogonal_init(shape, gain: float, rng: np.random.Generator) -> np.ndarray:
    a = rng.normal(size=shape)
    u, _, vt = np.linalg.svd(a, full_matrices=False)
    q = u if u.shape == shape else vt
    return gain * q


class Mlp:
    """Fully connected net: ReLU hidden layers, linear output.

    Parameters are exposed as the flat list [W0, b0, W1, b1, ...] so the
    optimizer and checkpoints can treat every network uniformly.
    """

    def __init__(self, sizes, rng: np.random.Generator,
                 hidden_gain: float = np.sqrt(2.0), out_gain: float = 1.0):
        self.sizes = tuple(int(s) for s in sizes)
        self.params = []
        last = len(self.sizes) - 2
        for i in range(len(self.sizes) - 1):
            gain = out_gain if i == last else hidden_gain
            w = orthogonal_init((self.sizes[i], self.sizes[i + 1]), gain, rng)
            b = np.zeros(self.sizes[i + 1])
            self.params.extend([w, b])

    @property
    def n_layers(self) -> int:
        return len(self.params) // 2

    def forward(self, x: np.ndarray):
        """Returns (output, cache); cache keeps the post-activation inputs of
        every layer for the backward pass."""
        x = np.asarray(x, dtype=float)
        if x.ndim == 1:
            x = x[None, :]
        if x.shape[1] != self.sizes[0]:
            raise ValueError(
                f"input dim {x.shape[1]} does not match net input {self.sizes[0]}")
        acts = [x]
        h = x
        n = self.n_layers
        for i in range(n):
            w, b = self.params[2 * i], self.params[2 * i + 1]
            z = h @ w + b
            h = z if i == n - 1 else np.maximum(z, 0.0)
            acts.append(h)
        return h, acts

    def backward(self, cache, grad_out: np.ndarray):
        """Gradient of a scalar loss wrt every parameter given dLoss/dOutput.

        Returns the gradient list aligned with ``self.params``.
        """
        n = self.n_layers
        grads = [None] * len(self.params)
        delta = np.asarray(grad_out, dtype=float)
        for i in range(n - 1, -1, -1):
            h_in = cache[i]
            if i != n - 1:
                # ReLU mask: cache[i+1] holds the post-activation values
                delta = delta * (cache[i + 1] > 0.0)
            grads[2 * i] = h_in.T @ delta
            grads[2 * i + 1] = delta.sum(axis=0)
            if i > 0:
                delta = delta @ self.params[2 * i].T
        return grads


class Adam:
    """Bias-corrected Adam over a list of parameter arrays.

    ``lr_init`` is remembered separately so a Heaviside decay can always be
    expressed as a multiple of the initial rate, idempotent under replay.
    """

    def __init__(self, params, lr: float, beta1: float = 0.9,
                 beta2: float = 0.999, eps: float = 1e-8):
        self.lr = float(lr)
        self.lr_init = float(lr)
        self.beta1 = beta1
        self.beta2 = beta2
        self.eps = eps
        self.m = [np.zeros_like(p) for p in params]
        self.v = [np.zeros_like(p) for p in params]
        self.t = 0

    def step(self, params, grads) -> None:
        self.t += 1
        b1, b2 = self.beta1, self.beta2
        c1 = 1.0 - b1 ** self.t
        c2 = 1.0 - b2 ** self.t
        for p, g, m, v in zip(params, grads, self.m, self.v):
            m *= b1
            m += (1.0 - b1) * g
            v *= b2
            v += (1.0 - b2) * g * g
            p -= self.lr * (m / c1) / (np.sqrt(v / c2) + self.eps)

    def update_of(self, grads) -> list:
        """The update vectors one step would apply, without mutating any
        state. Used for update-variance diagnostics."""
        t = self.t + 1
        b1, b2 = self.beta1, self.beta2
        c1 = 1.0 - b1 ** t
        c2 = 1.0 - b2 ** t
        out = []
        for g, m, v in zip(grads, self.m, self.v):
            m_new = b1 * m + (1.0 - b1) * g
            v_new = b2 * v + (1.0 - b2) * g * g
            out.append(-self.lr * (m_new / c1) / (np.sqrt(v_new / c2) + self.eps))
        return out

    def reset(self) -> None:
        """Zero both moment estimates and the step counter."""
        for m in self.m:
            m[:] = 0.0
        for v in self.v:
            v[:] = 0.0
        self.t = 0

    def state(self) -> dict:
        return {"m": [a.copy() for a in self.m],
                "v": [a.copy() for a in self.v],
                "t": self.t, "lr": self.lr, "lr_init": self.lr_init}

    def load_state(self, state: dict) -> None:
        for dst, src in zip(self.m, state["m"]):
            dst[:] = src
        for dst, src in zip(self.v, state["v"]):
            dst[:] = src
        self.t = int(state["t"])
        self.lr = float(state["lr"])
        self.lr_init = float(state["lr_init"])


def flat_params(params) -> np.ndarray:
    return np.concatenate([p.ravel() for p in params])


def set_flat_params(params, flat: np.ndarray) -> None:
    off = 0
    for p in params:
        p[:] = flat[off:off + p.size].reshape(p.shape)
        off += p.size
    if off != flat.size:
        raise ValueError("flat vector size mismatch")
