"""DDPG pricing agent: per-slot price decisions, learning and persistence.

The action is a single price per MI in [0, 1], produced by mapping the
actor's tanh output through (raw + 1) / 2. Training adds mean-reverting
noise and starts episodes with a uniform-random exploration phase;
evaluation is strictly deterministic.
"""

from __future__ import annotations

import zipfile
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from ..domain import ServerSpec
from .mlp import Adam, Mlp, soft_update
from .noise import MeanRevertingNoise
from .replay import ReplayBuffer

STATE_FORMAT_VERSION = 1

TRAIN = "train"
EVALUATE = "evaluate"


@dataclass(frozen=True)
class AgentHyperparams:
    """Training knobs shared by every pricing agent in a run."""

    replay_capacity: int = 100_000
    batch_size: int = 64
    gamma: float = 0.95
    actor_lr: float = 5e-4
    critic_lr: float = 5e-4
    target_blend: float = 0.005        # soft-update coefficient
    updates_per_slot: int = 1
    noise_theta: float = 0.15
    noise_sigma: float = 0.2
    random_steps: int = 500            # uniform actions early in an episode
    random_episodes: int = 4           # episodes that use the full random phase
    energy_cost_coeff: float = 1e-5    # cost per joule in the profit
    slot_length: float = 5.0           # seconds per price slot
    normalize_state: bool = False

    def validate(self) -> None:
        if not (0.0 <= self.gamma <= 1.0):
            raise ValueError("gamma must lie in [0, 1]")
        if not (0.0 < self.target_blend <= 1.0):
            raise ValueError("target blend must lie in (0, 1]")
        if self.actor_lr <= 0 or self.critic_lr <= 0:
            raise ValueError("learning rates must be > 0")
        if self.slot_length <= 0:
            raise ValueError("slot length must be > 0")
        if self.batch_size < 1 or self.replay_capacity < self.batch_size:
            raise ValueError("replay must hold at least one batch")


def slot_profit(
    price_per_mi: float,
    offloaded_mi: float,
    spec: ServerSpec,
    energy_cost_coeff: float,
    slot_length: float,
    cluster_size: int = 1,
) -> float:
    """Revenue minus fixed and load-dependent energy cost for one slot.

    The fixed part bills idle draw for every server in the pricing domain;
    the varying part bills the excess draw for the time the domain's total
    capacity needs to absorb the offloaded MIs. A cluster of one reduces to
    the single-server profit.
    """
    revenue = price_per_mi * offloaded_mi
    fixed = cluster_size * slot_length * spec.idle_power
    varying = (spec.max_power - spec.idle_power) * offloaded_mi / spec.total_mips
    return revenue - energy_cost_coeff * (fixed + varying)


class AgentStateError(RuntimeError):
    """Missing or unreadable persisted agent state."""


class RunningNorm:
    """Optional per-feature standardization with persisted running moments."""

    def __init__(self, dim: int):
        self.count = 0
        self.mean = np.zeros(dim)
        self.m2 = np.zeros(dim)

    def observe(self, x: np.ndarray) -> None:
        self.count += 1
        delta = x - self.mean
        self.mean += delta / self.count
        self.m2 += delta * (x - self.mean)

    def apply(self, x: np.ndarray) -> np.ndarray:
        if self.count < 2:
            return x
        var = self.m2 / (self.count - 1)
        return (x - self.mean) / np.sqrt(var + 1e-8)


class PricingAgent:
    """One learner; owns actor/critic nets, targets, replay and noise."""

    STATE_DIM = 2

    def __init__(self, agent_id: str, hyperparams: AgentHyperparams,
                 init_rng: np.random.Generator):
        hyperparams.validate()
        self.agent_id = agent_id
        self.hp = hyperparams
        self.actor = Mlp(self.STATE_DIM, 1, "tanh", init_rng, final_init_scale=3e-3)
        self.critic = Mlp(self.STATE_DIM + 1, 1, "linear", init_rng)
        self.target_actor = self.actor.clone()
        self.target_critic = self.critic.clone()
        self.actor_opt = Adam(self.actor.params, hyperparams.actor_lr)
        self.critic_opt = Adam(self.critic.params, hyperparams.critic_lr)
        self.replay = ReplayBuffer(hyperparams.replay_capacity, self.STATE_DIM)
        self.noise = MeanRevertingNoise(hyperparams.noise_theta, hyperparams.noise_sigma)
        self.norm = RunningNorm(self.STATE_DIM)
        self.steps_total = 0
        self.episodes_done = 0
        # per-episode bookkeeping, reset by begin_episode
        self._episode_steps = 0
        self._noise_rng: np.random.Generator | None = None
        self._explore_rng: np.random.Generator | None = None
        self._replay_rng: np.random.Generator | None = None

    def begin_episode(self, noise_rng, explore_rng, replay_rng) -> None:
        self._episode_steps = 0
        self._noise_rng = noise_rng
        self._explore_rng = explore_rng
        self._replay_rng = replay_rng

    def _random_budget(self) -> int:
        if self.episodes_done < self.hp.random_episodes:
            return self.hp.random_steps
        # later episodes only randomize the very first decision
        return min(1, self.hp.random_steps)

    def _prepare(self, state: np.ndarray, mode: str) -> np.ndarray:
        if self.hp.normalize_state:
            if mode == TRAIN:
                self.norm.observe(state)
            return self.norm.apply(state)
        return state

    def act(self, state: np.ndarray, mode: str) -> float:
        """Price in [0, 1] for the new slot."""
        state = self._prepare(np.asarray(state, dtype=float), mode)
        in_random_phase = mode == TRAIN and self._episode_steps < self._random_budget()
        self._episode_steps += 1
        self.steps_total += 1
        if in_random_phase:
            return float(self._explore_rng.random())
        raw = float(self.actor.forward(state.reshape(1, -1))[0, 0])
        price = (raw + 1.0) / 2.0
        if mode == TRAIN:
            price += self.noise.sample(self._noise_rng)
            price = min(1.0, max(0.0, price))
        return price

    def observe(self, state, action: float, reward: float, next_state) -> None:
        state = self._prepare(np.asarray(state, dtype=float), EVALUATE)
        next_state = self._prepare(np.asarray(next_state, dtype=float), EVALUATE)
        self.replay.push(state, action, reward, next_state)

    # -- learning ---------------------------------------------------------

    def critic_loss_and_grads(self, states, actions, targets):
        """Mean squared TD error and its gradients w.r.t. critic params."""
        batch = states.shape[0]
        q, cache = self.critic.forward_cache(np.concatenate([states, actions], axis=1))
        diff = q - targets.reshape(-1, 1)
        loss = float(np.mean(diff ** 2))
        grads, _ = self.critic.backward(cache, 2.0 * diff / batch)
        return loss, grads

    def actor_objective_and_grads(self, states):
        """Mean critic value of the actor's actions, with ascent gradients."""
        batch = states.shape[0]
        actions, actor_cache = self.actor.forward_cache(states)
        _, critic_cache = self.critic.forward_cache(
            np.concatenate([states, actions], axis=1)
        )
        q = critic_cache["y"]
        objective = float(np.mean(q))
        _, dinput = self.critic.backward(critic_cache, np.full_like(q, 1.0 / batch))
        dq_daction = dinput[:, self.STATE_DIM:]
        grads, _ = self.actor.backward(actor_cache, dq_daction)
        return objective, grads

    def update(self) -> bool:
        """One DDPG step; skipped (returns False) until replay holds a batch."""
        if self.replay.size < self.hp.batch_size:
            return False
        states, actions, rewards, next_states = self.replay.sample(
            self.hp.batch_size, self._replay_rng
        )
        next_actions = self.target_actor.forward(next_states)
        next_q = self.target_critic.forward(
            np.concatenate([next_states, next_actions], axis=1)
        )[:, 0]
        targets = rewards + self.hp.gamma * next_q
        _, critic_grads = self.critic_loss_and_grads(states, actions, targets)
        self.critic_opt.step(self.critic.params, critic_grads)
        _, actor_grads = self.actor_objective_and_grads(states)
        # ascend the objective: Adam minimizes, so feed the negated gradients
        self.actor_opt.step(self.actor.params, [-g for g in actor_grads])
        soft_update(self.target_actor, self.actor, self.hp.target_blend)
        soft_update(self.target_critic, self.critic, self.hp.target_blend)
        return True

    def end_episode(self) -> None:
        self.episodes_done += 1

    # -- persistence ------------------------------------------------------

    def save(self, directory: str | Path) -> Path:
        """Write the full agent state to <directory>/state.npz, bit-exact."""
        directory = Path(directory)
        directory.mkdir(parents=True, exist_ok=True)
        path = directory / "state.npz"
        arrays: dict[str, np.ndarray] = {
            "format_version": np.array(STATE_FORMAT_VERSION),
            "steps_total": np.array(self.steps_total),
            "episodes_done": np.array(self.episodes_done),
            "noise_state": np.array(self.noise.state),
            "replay_size": np.array(self.replay.size),
            "replay_cursor": np.array(self.replay.cursor),
            "replay_states": self.replay.states[: self.replay.size],
            "replay_actions": self.replay.actions[: self.replay.size],
            "replay_rewards": self.replay.rewards[: self.replay.size],
            "replay_next_states": self.replay.next_states[: self.replay.size],
            "norm_count": np.array(self.norm.count),
            "norm_mean": self.norm.mean,
            "norm_m2": self.norm.m2,
            "adam_actor_t": np.array(self.actor_opt.t),
            "adam_critic_t": np.array(self.critic_opt.t),
        }
        for net, tag in (
            (self.actor, "actor"), (self.critic, "critic"),
            (self.target_actor, "target_actor"), (self.target_critic, "target_critic"),
        ):
            for i, p in enumerate(net.params):
                arrays[f"{tag}_{i}"] = p
        for opt, tag in ((self.actor_opt, "adam_actor"), (self.critic_opt, "adam_critic")):
            for i, (m, v) in enumerate(zip(opt.m, opt.v)):
                arrays[f"{tag}_m_{i}"] = m
                arrays[f"{tag}_v_{i}"] = v
        with open(path, "wb") as fh:
            np.savez_compressed(fh, **arrays)
        return path

    def load(self, directory: str | Path) -> None:
        """Restore a state written by save(); raises AgentStateError on problems."""
        path = Path(directory) / "state.npz"
        if not path.exists():
            raise AgentStateError(f"agent {self.agent_id}: no saved state at {path}")
        try:
            with np.load(path) as data:
                payload = {k: data[k] for k in data.files}
        except (zipfile.BadZipFile, ValueError, OSError, EOFError, KeyError) as exc:
            raise AgentStateError(
                f"agent {self.agent_id}: corrupt state file {path}: {exc}"
            ) from exc
        version = int(payload["format_version"])
        if version != STATE_FORMAT_VERSION:
            raise AgentStateError(
                f"agent {self.agent_id}: unsupported state version {version}"
            )
        try:
            for net, tag in (
                (self.actor, "actor"), (self.critic, "critic"),
                (self.target_actor, "target_actor"), (self.target_critic, "target_critic"),
            ):
                for i, p in enumerate(net.params):
                    p[...] = payload[f"{tag}_{i}"]
            for opt, tag in ((self.actor_opt, "adam_actor"), (self.critic_opt, "adam_critic")):
                for i in range(len(opt.m)):
                    opt.m[i][...] = payload[f"{tag}_m_{i}"]
                    opt.v[i][...] = payload[f"{tag}_v_{i}"]
            self.actor_opt.t = int(payload["adam_actor_t"])
            self.critic_opt.t = int(payload["adam_critic_t"])
            size = int(payload["replay_size"])
            self.replay.size = size
            self.replay.cursor = int(payload["replay_cursor"])
            self.replay.states[:size] = payload["replay_states"]
            self.replay.actions[:size] = payload["replay_actions"]
            self.replay.rewards[:size] = payload["replay_rewards"]
            self.replay.next_states[:size] = payload["replay_next_states"]
            self.noise.state = float(payload["noise_state"])
            self.steps_total = int(payload["steps_total"])
            self.episodes_done = int(payload["episodes_done"])
            self.norm.count = int(payload["norm_count"])
            self.norm.mean[...] = payload["norm_mean"]
            self.norm.m2[...] = payload["norm_m2"]
        except KeyError as exc:
            raise AgentStateError(
                f"agent {self.agent_id}: state file {path} is missing {exc}"
            ) from exc
