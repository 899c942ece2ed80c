"""Mean-reverting exploration noise whose state survives episode boundaries."""

from __future__ import annotations

import numpy as np


class MeanRevertingNoise:
    """Discrete Ornstein-Uhlenbeck-style process around zero.

    x <- x + theta * (0 - x) + sigma * N(0, 1). With sigma = 0 and x = 0 the
    process stays identically zero, so evaluation and training actions match.
    """

    def __init__(self, theta: float, sigma: float, state: float = 0.0):
        self.theta = theta
        self.sigma = sigma
        self.state = state

    def sample(self, rng: np.random.Generator) -> float:
        self.state += self.theta * (0.0 - self.state)
        if self.sigma != 0.0:
            self.state += self.sigma * rng.standard_normal()
        return self.state
