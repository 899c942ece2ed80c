"""Fixed-capacity experience replay with uniform sampling."""

from __future__ import annotations

import numpy as np


class ReplayBuffer:
    """Ring of (state, action, reward, next_state) transitions."""

    def __init__(self, capacity: int, state_dim: int):
        self.capacity = capacity
        self.state_dim = state_dim
        self.states = np.zeros((capacity, state_dim))
        self.actions = np.zeros((capacity, 1))
        self.rewards = np.zeros(capacity)
        self.next_states = np.zeros((capacity, state_dim))
        self.size = 0
        self.cursor = 0

    def push(self, state, action: float, reward: float, next_state) -> None:
        i = self.cursor
        self.states[i] = state
        self.actions[i, 0] = action
        self.rewards[i] = reward
        self.next_states[i] = next_state
        self.cursor = (i + 1) % self.capacity
        self.size = min(self.size + 1, self.capacity)

    def sample(self, batch: int, rng: np.random.Generator):
        if self.size < batch:
            raise ValueError(f"replay holds {self.size} < batch {batch}")
        idx = rng.integers(0, self.size, size=batch)
        return (
            self.states[idx],
            self.actions[idx],
            self.rewards[idx],
            self.next_states[idx],
        )
