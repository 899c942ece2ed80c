"""Small fully-connected networks with hand-rolled exact backprop.

Both the actor and the critic are two ReLU hidden layers of 64 units; the
critic ends linear, the actor ends in tanh. Gradients are analytic and are
verified against central finite differences in the test suite, so keep the
forward and backward passes in exact correspondence.
"""

from __future__ import annotations

import numpy as np

HIDDEN_UNITS = 64


class Mlp:
    """Feedforward net; params live in a flat list [W1, b1, W2, b2, W3, b3]."""

    def __init__(
        self,
        input_dim: int,
        output_dim: int,
        output_activation: str,
        rng: np.random.Generator,
        hidden_units: int = HIDDEN_UNITS,
        final_init_scale: float | None = None,
    ):
        if output_activation not in ("linear", "tanh"):
            raise ValueError(f"unknown output activation {output_activation!r}")
        self.output_activation = output_activation
        sizes = [input_dim, hidden_units, hidden_units, output_dim]
        self.params: list[np.ndarray] = []
        for i, (fan_in, fan_out) in enumerate(zip(sizes, sizes[1:])):
            last = i == len(sizes) - 2
            scale = final_init_scale if (last and final_init_scale is not None) \
                else 1.0 / np.sqrt(fan_in)
            self.params.append(rng.uniform(-scale, scale, size=(fan_in, fan_out)))
            self.params.append(rng.uniform(-scale, scale, size=(fan_out,)))

    def forward(self, x: np.ndarray) -> np.ndarray:
        y, _ = self.forward_cache(x)
        return y

    def forward_cache(self, x: np.ndarray) -> tuple[np.ndarray, dict]:
        w1, b1, w2, b2, w3, b3 = self.params
        z1 = x @ w1 + b1
        h1 = np.maximum(z1, 0.0)
        z2 = h1 @ w2 + b2
        h2 = np.maximum(z2, 0.0)
        z3 = h2 @ w3 + b3
        y = np.tanh(z3) if self.output_activation == "tanh" else z3
        return y, {"x": x, "z1": z1, "h1": h1, "z2": z2, "h2": h2, "y": y}

    def backward(self, cache: dict, dy: np.ndarray) -> tuple[list[np.ndarray], np.ndarray]:
        """Gradients of a scalar loss given dLoss/dOutput; also dLoss/dInput."""
        w1, b1, w2, b2, w3, b3 = self.params
        if self.output_activation == "tanh":
            dz3 = dy * (1.0 - cache["y"] ** 2)
        else:
            dz3 = dy
        dw3 = cache["h2"].T @ dz3
        db3 = dz3.sum(axis=0)
        dh2 = dz3 @ w3.T
        dz2 = dh2 * (cache["z2"] > 0.0)
        dw2 = cache["h1"].T @ dz2
        db2 = dz2.sum(axis=0)
        dh1 = dz2 @ w2.T
        dz1 = dh1 * (cache["z1"] > 0.0)
        dw1 = cache["x"].T @ dz1
        db1 = dz1.sum(axis=0)
        dx = dz1 @ w1.T
        return [dw1, db1, dw2, db2, dw3, db3], dx

    def copy_from(self, other: "Mlp") -> None:
        for mine, theirs in zip(self.params, other.params):
            mine[...] = theirs

    def clone(self) -> "Mlp":
        twin = object.__new__(Mlp)
        twin.output_activation = self.output_activation
        twin.params = [p.copy() for p in self.params]
        return twin

    def get_flat(self) -> np.ndarray:
        return np.concatenate([p.ravel() for p in self.params])

    def set_flat(self, flat: np.ndarray) -> None:
        offset = 0
        for p in self.params:
            p[...] = flat[offset:offset + p.size].reshape(p.shape)
            offset += p.size


def soft_update(target: Mlp, online: Mlp, blend: float) -> None:
    """target <- blend * online + (1 - blend) * target, in place."""
    for t, o in zip(target.params, online.params):
        t *= 1.0 - blend
        t += blend * o


class Adam:
    """Adaptive-moment optimizer over a list of parameter arrays."""

    def __init__(self, params: list[np.ndarray], lr: float,
                 beta1: float = 0.9, beta2: float = 0.999, eps: float = 1e-8):
        self.lr = lr
        self.beta1 = beta1
        self.beta2 = beta2
        self.eps = eps
        self.t = 0
        self.m = [np.zeros_like(p) for p in params]
        self.v = [np.zeros_like(p) for p in params]

    def step(self, params: list[np.ndarray], grads: list[np.ndarray]) -> None:
        self.t += 1
        bias1 = 1.0 - self.beta1 ** self.t
        bias2 = 1.0 - self.beta2 ** self.t
        for p, g, m, v in zip(params, grads, self.m, self.v):
            m *= self.beta1
            m += (1.0 - self.beta1) * g
            v *= self.beta2
            v += (1.0 - self.beta2) * g * g
            p -= self.lr * (m / bias1) / (np.sqrt(v / bias2) + self.eps)
